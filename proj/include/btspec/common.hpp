#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace btspec {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using MatrixXc = Matrix<Complex>;
using VectorXc = Vector<Complex>;
using MatrixXr = Matrix<double>;
using VectorXr = Vector<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

/// e^{i phi}
inline Complex cis(double phi) { return std::polar(1.0, phi); }

// Error taxonomy. Every failure the library signals derives from Error so the
// CLI can map it onto the numeric-failure exit code; PreconditionError and
// DomainError indicate caller mistakes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class RootScanError : public NumericError {
 public:
  RootScanError(const std::string& what, double lo, double hi)
      : NumericError(what), lo_(lo), hi_(hi) {}
  double interval_lo() const { return lo_; }
  double interval_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

class QuadratureError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace btspec
