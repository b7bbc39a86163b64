#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace prodsos {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands built over different variable layouts or coefficient fields.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A point, matrix or vector of the wrong size, or off the declared set.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A violated precondition on scalar arguments (degrees, orders, counts).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical self-check failed; indicates a bug rather than bad input.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// The relaxation order is too small for the requested certificate.
class OrderTooSmall : public Error {
 public:
  OrderTooSmall(int order, const std::string& what)
      : Error(what), order_(order) {}
  int order() const { return order_; }

 private:
  int order_;
};

/// Order below the validity threshold of a rate preset.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

class PresetNotOperational : public Error {
 public:
  using Error::Error;
};

/// Binomial coefficient as a double; exact for the magnitudes used here.
inline double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

}  // namespace prodsos
