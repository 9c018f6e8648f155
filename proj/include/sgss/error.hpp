#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sgss {

// Base class for every data-level failure raised by the toolkit. The CLI maps
// these to exit status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when scoring needs a label that no labeller provided. `missing()`
// lists one human-readable target description per gap.
class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, std::vector<std::string> missing)
      : Error(what), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

}  // namespace sgss
