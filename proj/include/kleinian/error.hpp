#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kleinian {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

class ParameterError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parameter"; }
};

class ClassificationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "classification"; }
};

class ContainmentError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "containment"; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported"; }
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "insufficient_data"; }
};

/// Raised when a tree traversal visits more nodes than its budget allows.
/// Carries the statistics gathered before the traversal was abandoned.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t budget, std::size_t nodes_visited, std::size_t entries_found)
      : Error("node budget of " + std::to_string(budget) + " exceeded after visiting " +
              std::to_string(nodes_visited) + " nodes (" + std::to_string(entries_found) +
              " entries kept)"),
        budget_(budget),
        nodes_visited_(nodes_visited),
        entries_found_(entries_found) {}
  const char* kind() const noexcept override { return "budget_exceeded"; }

  std::size_t budget() const noexcept { return budget_; }
  std::size_t nodes_visited() const noexcept { return nodes_visited_; }
  std::size_t entries_found() const noexcept { return entries_found_; }

 private:
  std::size_t budget_;
  std::size_t nodes_visited_;
  std::size_t entries_found_;
};

}  // namespace kleinian
