#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "kleinian/error.hpp"
#include "kleinian/hypgeom.hpp"
#include "kleinian/mobius.hpp"
#include "kleinian/parallel.hpp"
#include "kleinian/word.hpp"

namespace kleinian {

/// A finitely generated group given by generator matrices and a basepoint.
class GroupSpec {
 public:
  /// Validates the data. When freeness is assumed, every nonempty reduced
  /// word of length at most check_length must stay away from the identity.
  GroupSpec(std::vector<MobiusMap> generators, HPoint basepoint, bool freeness_assumed = true,
            int check_length = 6, double tol = Tolerances{}.dedup)
      : gens_(std::move(generators)), base_(basepoint), free_(freeness_assumed) {
    if (gens_.empty()) throw ValidationError("a group needs at least one generator");
    if (gens_.size() > 26) throw ValidationError("at most 26 generators are supported");
    for (const MobiusMap& g : gens_)
      if (g.dim() != gens_.front().dim()) throw DimensionError("generators live in different dimensions");
    if (base_.dim() != dim()) throw DimensionError("basepoint and generators live in different dimensions");
    if (!base_.is_interior()) throw ValidationError("basepoint must be an interior point");
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      inv_.push_back(gens_[i].inverse());
      if (gens_[i].is_identity(tol))
        throw ValidationError("generator " + std::string(1, letter_char(static_cast<Letter>(i + 1))) +
                              " is the identity");
    }
    slack_ = 0.0;
    for (const MobiusMap& g : gens_) slack_ = std::max(slack_, dist(base_, apply(g, base_)));
    if (free_) check_short_relators(check_length, tol);
  }

  Dim dim() const { return gens_.front().dim(); }
  int rank() const { return static_cast<int>(gens_.size()); }
  const std::vector<MobiusMap>& generators() const { return gens_; }
  const std::vector<MobiusMap>& inverses() const { return inv_; }
  const HPoint& basepoint() const { return base_; }
  bool freeness_assumed() const { return free_; }

  const MobiusMap& generator(Letter x) const {
    const std::size_t i = static_cast<std::size_t>(std::abs(x) - 1);
    return x > 0 ? gens_.at(i) : inv_.at(i);
  }

  /// Largest generator displacement of the basepoint; the default pruning slack.
  double max_generator_displacement() const { return slack_; }

  MobiusMap evaluate(const Word& w) const { return kleinian::evaluate(w, gens_, inv_); }

  GroupSpec with_basepoint(const HPoint& x) const {
    GroupSpec g = *this;
    if (x.dim() != dim()) throw DimensionError("basepoint and generators live in different dimensions");
    if (!x.is_interior()) throw ValidationError("basepoint must be an interior point");
    g.base_ = x;
    g.slack_ = 0.0;
    for (const MobiusMap& s : gens_) g.slack_ = std::max(g.slack_, dist(x, apply(s, x)));
    return g;
  }

  /// The conjugate group h G h^-1 with basepoint h x0.
  GroupSpec conjugated(const MobiusMap& h) const {
    std::vector<MobiusMap> gens;
    for (const MobiusMap& g : gens_) gens.push_back(MobiusMap(h * g * h.inverse()));
    return GroupSpec(std::move(gens), apply(h, base_), free_, 0);
  }

 private:
  void check_short_relators(int max_length, double tol) const {
    struct Frame {
      MobiusMap m;
      Letter last;
      int length;
    };
    std::vector<Frame> stack{{MobiusMap::identity(dim()), 0, 0}};
    while (!stack.empty()) {
      const Frame f = stack.back();
      stack.pop_back();
      if (f.length > 0 && f.m.is_identity(tol))
        throw ValidationError("a reduced word of length " + std::to_string(f.length) +
                              " evaluates to the identity; the group is not free");
      if (f.length == max_length) continue;
      for (Letter g = 1; g <= rank(); ++g)
        for (Letter y : {g, static_cast<Letter>(-g)})
          if (y != -f.last) stack.push_back({f.m * generator(y), y, f.length + 1});
    }
  }

  std::vector<MobiusMap> gens_;
  std::vector<MobiusMap> inv_;
  HPoint base_;
  bool free_;
  double slack_ = 0.0;
};

// ---------------------------------------------------------------------------
// Traversal of the reduced-word tree

struct Exact {
  int depth_limit = 20;
};

/// Depth-first search pruned at cutoff + slack; without a slack the largest
/// generator displacement is used.
struct Pruned {
  std::optional<double> slack;
};

using EnumerationMode = std::variant<Exact, Pruned>;

/// How complete an enumeration is. Exact runs record whether any word at the
/// depth limit was still within cutoff + generator displacement, in which
/// case deeper words might have been missed.
struct Certificate {
  enum class Kind { Exact, PrunedWithSlack };
  Kind kind = Kind::PrunedWithSlack;
  double slack = 0.0;
  int depth_limit = 0;
  bool depth_sufficient = true;

  std::string to_string() const {
    char buf[96];
    if (kind == Kind::Exact)
      std::snprintf(buf, sizeof buf, "Exact(depth_limit=%d,%s)", depth_limit,
                    depth_sufficient ? "depth_sufficient" : "depth_may_be_insufficient");
    else
      std::snprintf(buf, sizeof buf, "PrunedWithSlack(slack=%.17g)", slack);
    return buf;
  }
};

struct TraversalOptions {
  std::size_t node_budget = 400'000'000;
  int workers = 1;
  double dedup_tol = Tolerances{}.dedup;
};

namespace detail {

/// Current path of the traversal together with the node being visited.
struct TreeNode {
  const std::vector<Syllable>& path;
  const MobiusMap& map;
  double displacement;
  std::size_t length;
};

struct TraversalResult {
  Certificate certificate;
  std::size_t nodes = 0;
};

/// Walks the reduced-word tree of spec, calling visitors[p](node) for every
/// word with displacement at most T whose first letter is partition p, and
/// once for the identity on visitors[0] before anything else. Partitions are
/// the 2r first letters in the order a, A, b, B, ...; they run on separate
/// workers and never share a visitor.
template <class Visitor>
TraversalResult traverse(const GroupSpec& spec, double T, const EnumerationMode& mode,
                         const TraversalOptions& opt, std::vector<Visitor>& visitors) {
  if (!(T > 0.0)) throw ParameterError("cutoff T must be positive");
  const bool exact = std::holds_alternative<Exact>(mode);
  if (!exact && !spec.freeness_assumed())
    throw ValidationError("pruned enumeration requires a group assumed to be free");
  const int r = spec.rank();
  const std::size_t parts = static_cast<std::size_t>(2 * r);
  if (visitors.size() != parts) throw ParameterError("one visitor per first letter is required");

  TraversalResult result;
  double slack = spec.max_generator_displacement();
  int depth_limit = 0;
  if (exact) {
    depth_limit = std::get<Exact>(mode).depth_limit;
    if (depth_limit < 0) throw ParameterError("depth limit must be nonnegative");
    result.certificate.kind = Certificate::Kind::Exact;
    result.certificate.depth_limit = depth_limit;
  } else {
    if (const auto& s = std::get<Pruned>(mode).slack) slack = *s;
    if (!(slack >= 0.0)) throw ParameterError("pruning slack must be nonnegative");
    result.certificate.kind = Certificate::Kind::PrunedWithSlack;
    result.certificate.slack = slack;
  }
  const double prune_at = T + slack;
  const HPoint& x0 = spec.basepoint();

  std::atomic<std::size_t> nodes{1};
  std::atomic<std::size_t> kept{1};
  std::atomic<bool> deep_survivor{false};
  {
    const std::vector<Syllable> root;
    visitors[0](TreeNode{root, MobiusMap::identity(spec.dim()), 0.0, 0});
  }
  if (exact && depth_limit == 0) {
    result.certificate.depth_sufficient = spec.max_generator_displacement() > prune_at;
    result.nodes = 1;
    return result;
  }

  struct Pending {
    MobiusMap map;
    Syllable last;
    Syllable prev;
    std::size_t syllables;
    std::size_t length;
  };

  parallel_for(parts, opt.workers, [&](std::size_t p) {
    const Letter first = (p % 2 == 0) ? static_cast<Letter>(p / 2 + 1) : static_cast<Letter>(-(p / 2 + 1));
    Visitor& visit = visitors[p];
    std::vector<Syllable> path;
    std::vector<Pending> stack;
    stack.push_back({spec.generator(first), {std::abs(first), first > 0 ? 1 : -1}, {0, 0}, 1, 1});
    while (!stack.empty()) {
      const Pending node = stack.back();
      stack.pop_back();
      path.resize(node.syllables);
      path[node.syllables - 1] = node.last;
      if (node.syllables >= 2) path[node.syllables - 2] = node.prev;

      if (nodes.fetch_add(1) + 1 > opt.node_budget)
        throw BudgetExceeded(opt.node_budget, nodes.load(), kept.load());
      const double d = dist(x0, apply(node.map, x0));
      if (exact) {
        if (static_cast<int>(node.length) == depth_limit && d <= prune_at) deep_survivor = true;
      } else if (d > prune_at) {
        continue;
      }
      if (d <= T) {
        kept.fetch_add(1);
        visit(TreeNode{path, node.map, d, node.length});
      }
      if (exact && static_cast<int>(node.length) == depth_limit) continue;

      const Letter last = node.last.letter();
      for (Letter g = static_cast<Letter>(r); g >= 1; --g) {
        for (Letter y : {static_cast<Letter>(-g), g}) {
          if (y == -last) continue;
          Pending child{node.map * spec.generator(y), {}, {}, 0, node.length + 1};
          if (y == last) {
            child.syllables = node.syllables;
            child.last = {node.last.gen, node.last.exp + (y > 0 ? 1 : -1)};
            child.prev = node.prev;
          } else {
            child.syllables = node.syllables + 1;
            child.last = {std::abs(y), y > 0 ? 1 : -1};
            child.prev = node.last;
          }
          stack.push_back(child);
        }
      }
    }
  });
  result.nodes = nodes.load();
  if (exact) result.certificate.depth_sufficient = !deep_survivor.load();
  return result;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Orbit batches

struct OrbitEntry {
  Word word;
  MobiusMap map;
  double displacement;
};

/// Deterministic order: displacement, then word length, then letters.
inline bool entry_less(const OrbitEntry& x, const OrbitEntry& y) {
  if (x.displacement != y.displacement) return x.displacement < y.displacement;
  return x.word < y.word;
}

/// Orbit elements of the basepoint within the cutoff.
struct OrbitBatch {
  double cutoff = 0.0;
  std::vector<OrbitEntry> entries;
  Certificate certificate;
  std::size_t nodes_visited = 0;
  std::size_t duplicates_removed = 0;

  std::size_t size() const { return entries.size(); }
};

namespace detail {

struct CollectEntries {
  std::vector<OrbitEntry>* out;
  void operator()(const TreeNode& n) { out->push_back({Word(n.path), n.map, n.displacement}); }
};

struct CollectDisplacements {
  std::vector<double>* out;
  void operator()(const TreeNode& n) { out->push_back(n.displacement); }
};

/// Removes later entries that coincide with an earlier one as group
/// elements. Only entries with nearly equal displacement can coincide.
inline std::size_t remove_duplicates(std::vector<OrbitEntry>& entries, double tol) {
  std::vector<char> dead(entries.size(), 0);
  std::size_t removed = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (dead[i]) continue;
    const double di = entries[i].displacement;
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      if (entries[j].displacement - di > 1e-6 * std::max(1.0, di)) break;
      if (!dead[j] && matrix_distance(entries[i].map, entries[j].map) <= tol) {
        dead[j] = 1;
        ++removed;
      }
    }
  }
  if (removed == 0) return 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (!dead[i]) {
      if (k != i) entries[k] = std::move(entries[i]);
      ++k;
    }
  entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end());
  return removed;
}

}  // namespace detail

/// All orbit elements g with d(x0, g x0) <= T, sorted deterministically.
inline OrbitBatch enumerate_orbit(const GroupSpec& spec, double T, const EnumerationMode& mode = Pruned{},
                                  const TraversalOptions& opt = {}) {
  const std::size_t parts = static_cast<std::size_t>(2 * spec.rank());
  std::vector<std::vector<OrbitEntry>> found(parts);
  std::vector<detail::CollectEntries> visitors;
  for (auto& f : found) visitors.push_back({&f});
  const auto res = detail::traverse(spec, T, mode, opt, visitors);

  OrbitBatch batch;
  batch.cutoff = T;
  batch.certificate = res.certificate;
  batch.nodes_visited = res.nodes;
  std::size_t total = 0;
  for (const auto& f : found) total += f.size();
  batch.entries.reserve(total);
  for (auto& f : found) {
    std::move(f.begin(), f.end(), std::back_inserter(batch.entries));
    std::vector<OrbitEntry>().swap(f);
  }
  std::sort(batch.entries.begin(), batch.entries.end(), entry_less);
  batch.duplicates_removed = detail::remove_duplicates(batch.entries, opt.dedup_tol);
  return batch;
}

/// Sorted displacements of the orbit within T, without storing words.
struct DisplacementSet {
  double cutoff = 0.0;
  std::vector<double> values;
  Certificate certificate;
  std::size_t nodes_visited = 0;
};

inline DisplacementSet orbit_displacements(const GroupSpec& spec, double T,
                                           const EnumerationMode& mode = Pruned{},
                                           const TraversalOptions& opt = {}) {
  const std::size_t parts = static_cast<std::size_t>(2 * spec.rank());
  std::vector<std::vector<double>> found(parts);
  std::vector<detail::CollectDisplacements> visitors;
  for (auto& f : found) visitors.push_back({&f});
  const auto res = detail::traverse(spec, T, mode, opt, visitors);
  DisplacementSet out;
  out.cutoff = T;
  out.certificate = res.certificate;
  out.nodes_visited = res.nodes;
  for (auto& f : found) out.values.insert(out.values.end(), f.begin(), f.end());
  std::sort(out.values.begin(), out.values.end());
  return out;
}

// ---------------------------------------------------------------------------
// Conjugacy classes

struct ConjugacyClass {
  Word representative;
  double translation_length;
  bool primitive;
};

struct ClassList {
  std::vector<ConjugacyClass> classes;
  Certificate certificate;
  double max_length = 0.0;
  double search_radius = 0.0;
};

namespace detail {

inline std::vector<ConjugacyClass> make_classes(const GroupSpec& spec, const std::set<Word>& keys,
                                                double tol) {
  std::vector<ConjugacyClass> out;
  out.reserve(keys.size());
  for (const Word& w : keys)
    out.push_back({w, translation_length(spec.evaluate(w), tol), !is_proper_power(w)});
  std::sort(out.begin(), out.end(), [](const ConjugacyClass& x, const ConjugacyClass& y) {
    if (x.translation_length != y.translation_length) return x.translation_length < y.translation_length;
    return x.representative < y.representative;
  });
  return out;
}

}  // namespace detail

/// Conjugacy classes (modulo inversion) with translation length at most L.
///
/// Classes are read off the cyclically reduced words of the orbit within
/// L + search_margin; the default margin is twice the generator
/// displacement, enough for a basepoint near every axis that crosses the
/// ping-pong fundamental domain.
inline ClassList conjugacy_classes(const GroupSpec& spec, double L, const TraversalOptions& opt = {},
                                   std::optional<double> search_margin = std::nullopt,
                                   double tol = Tolerances{}.classify) {
  if (!spec.freeness_assumed()) throw ValidationError("conjugacy classes require a group assumed to be free");
  if (!(L > 0.0)) throw ParameterError("maximal length must be positive");
  const double margin = search_margin.value_or(2.0 * spec.max_generator_displacement());
  const OrbitBatch batch = enumerate_orbit(spec, L + margin, Pruned{}, opt);
  std::set<Word> keys;
  for (const OrbitEntry& e : batch.entries)
    if (!e.word.empty() && e.word.cyclically_reduced()) keys.insert(canonical_class(e.word));
  ClassList out;
  out.certificate = batch.certificate;
  out.max_length = L;
  out.search_radius = L + margin;
  for (ConjugacyClass& c : detail::make_classes(spec, keys, tol))
    if (c.translation_length <= L) out.classes.push_back(std::move(c));
  return out;
}

/// Conjugacy classes (modulo inversion) of all nontrivial cyclically reduced
/// words of length at most n, found by brute force.
inline std::vector<ConjugacyClass> conjugacy_classes_by_word_length(const GroupSpec& spec, std::size_t n,
                                                                    double tol = Tolerances{}.classify) {
  std::set<Word> keys;
  std::vector<Word> level{Word()};
  for (std::size_t len = 1; len <= n; ++len) {
    std::vector<Word> next;
    for (const Word& w : level)
      for (Letter g = 1; g <= spec.rank(); ++g)
        for (Letter y : {g, static_cast<Letter>(-g)}) {
          if (!w.empty() && w.back() == -y) continue;
          Word v = w;
          v.push(y);
          if (v.cyclically_reduced()) keys.insert(canonical_class(v));
          next.push_back(std::move(v));
        }
    level = std::move(next);
  }
  return detail::make_classes(spec, keys, tol);
}

// ---------------------------------------------------------------------------
// Double cosets

/// Stabilizer of a convex body: trivial, or generated by one generator.
struct Stabilizer {
  int generator = 0;  // 0 for the trivial group

  bool trivial() const { return generator == 0; }

  /// Accepts the identity word or a single letter.
  static Stabilizer from_word(const Word& w) {
    if (w.empty()) return {};
    if (w.size() != 1)
      throw UnsupportedError("stabilizer " + w.to_string() +
                             " is not supported; use a single generator or the trivial group");
    return {std::abs(w.front())};
  }

  Word word() const { return trivial() ? Word() : Word::letter(generator); }
};

/// Representative of <s-> w <s+> with no leading s- syllable and no trailing
/// s+ syllable; unique for generator stabilizers in a free group.
inline Word double_coset_normal_form(const Word& w, Stabilizer minus, Stabilizer plus) {
  std::vector<Syllable> s = w.syllables();
  std::size_t begin = 0, end = s.size();
  if (!minus.trivial() && begin < end && s[begin].gen == minus.generator) ++begin;
  if (!plus.trivial() && begin < end && s[end - 1].gen == plus.generator) --end;
  return Word(std::vector<Syllable>(s.begin() + static_cast<std::ptrdiff_t>(begin),
                                    s.begin() + static_cast<std::ptrdiff_t>(end)));
}

struct DoubleCoset {
  Word representative;
  MobiusMap map;
};

struct DoubleCosetList {
  std::vector<DoubleCoset> cosets;
  Certificate certificate;
  double search_radius = 0.0;
};

/// One representative per double coset meeting the orbit ball of radius R,
/// in shortlex order of the normal forms.
inline DoubleCosetList double_cosets(const GroupSpec& spec, Stabilizer minus, Stabilizer plus, double R,
                                     const TraversalOptions& opt = {}) {
  for (const Stabilizer& s : {minus, plus})
    if (s.generator < 0 || s.generator > spec.rank())
      throw ParameterError("stabilizer generator out of range");
  if ((!minus.trivial() || !plus.trivial()) && !spec.freeness_assumed())
    throw UnsupportedError("double coset normal forms need a free group");
  const OrbitBatch batch = enumerate_orbit(spec, R, Pruned{}, opt);
  std::set<Word> reps;
  for (const OrbitEntry& e : batch.entries) reps.insert(double_coset_normal_form(e.word, minus, plus));
  DoubleCosetList out;
  out.certificate = batch.certificate;
  out.search_radius = R;
  for (const Word& w : reps) out.cosets.push_back({w, spec.evaluate(w)});
  return out;
}

}  // namespace kleinian
