#pragma once

#include "kleinian/counting.hpp"
#include "kleinian/error.hpp"
#include "kleinian/exponent.hpp"
#include "kleinian/group.hpp"
#include "kleinian/hypgeom.hpp"
#include "kleinian/measures.hpp"
#include "kleinian/minimize.hpp"
#include "kleinian/mobius.hpp"
#include "kleinian/point.hpp"
#include "kleinian/sweep.hpp"
#include "kleinian/word.hpp"
