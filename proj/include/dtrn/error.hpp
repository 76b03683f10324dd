#pragma once

#include <stdexcept>
#include <string>

namespace dtrn {

// Bad shapes, out-of-range labels, malformed arguments. CLI exit code 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// File I/O and on-disk format problems. CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A label that no length-T path can represent. Distinct from numerical
// underflow so training loops can skip the sample instead of aborting.
class InfeasibleLabelError : public ValidationError {
 public:
  explicit InfeasibleLabelError(const std::string& what) : ValidationError(what) {}
};

}  // namespace dtrn
