#pragma once

#include <stdexcept>
#include <string>

namespace tnli {

/// Raised when a computation cannot produce a finite, meaningful result
/// (zero noise, non-positive-definite covariance, estimator failure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnli
