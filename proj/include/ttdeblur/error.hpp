#pragma once

#include <stdexcept>
#include <string>

namespace ttdeblur {

/// Precondition violated by the caller (bad shapes, counts, parameters).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value fell outside the range a normalization assumed (e.g. a stale tau).
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Reading or decoding an on-disk artifact failed. The message names the path.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pipeline stage failed; carries the stage name and the kind of the
/// underlying failure (invalid_input, out_of_range, load_error, error).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, std::string cause = "error")
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), cause_(std::move(cause)) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  std::string cause_;
};

}  // namespace ttdeblur
