#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gab {

/// Configuration or model-specification problems. The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failures. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probability map produced a value outside [0,1].
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Stationarity denominators are not positive, or the mean system is singular.
class DegenerateMean : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An iterative linear-algebra routine hit its iteration cap.
class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, std::size_t iterations)
      : NumericalError(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

/// Every optimizer start failed.
class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Information matrix has an eigenvalue below the identification threshold.
class SingularInformation : public NumericalError {
 public:
  SingularInformation(const std::string& what, double min_eigenvalue)
      : NumericalError(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace gab
