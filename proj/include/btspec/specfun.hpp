#pragma once

// Real special-function kernels used by the annulus basis and the Airy model
// problems: integer-order Bessel J/Y with derivatives, Airy Ai/Ai' and their
// negative zeros, and Gauss-Legendre rules.

#include <vector>

#include "btspec/common.hpp"

namespace btspec::specfun {

struct BesselJY {
  double j;
  double y;
  double dj;
  double dy;
};

/// Largest integer order accepted by the Bessel kernels.
inline constexpr int kMaxBesselOrder = 1000;

/// J_m(x), Y_m(x) and their x-derivatives for integer m >= 0 and x > 0.
/// Throws RangeError when Y_m(x) overflows (x far below the turning point m).
BesselJY bessel_jy(int m, double x);

/// J_m(x) and Y_m(x) without derivatives; same contract as bessel_jy.
std::pair<double, double> bessel_j_y(int m, double x);

struct AiryValue {
  double ai;
  double dai;
};

/// Ai(x) and Ai'(x). Maclaurin series for |x| <= 5; beyond that the Bessel
/// representations in terms of K_{1/3}, K_{2/3} (x > 0) or J/Y of order
/// 1/3, 2/3 (x < 0). Accepts x in [-60, 60].
AiryValue airy_ai(double x);

struct AiryZeros {
  std::vector<double> a;        // zeros of Ai, decreasing
  std::vector<double> a_prime;  // zeros of Ai', decreasing
};

/// First `count` zeros of Ai and Ai' (1 <= count <= 20), Newton-refined from
/// the large-|x| asymptotic locations.
AiryZeros airy_zeros(int count);

/// |a_n| and |a'_n| for the n-th zero (1-based); cached first 20 zeros.
double airy_zero(int n);
double airy_prime_zero(int n);

struct QuadratureRule {
  VectorXr nodes;    // increasing, in (-1, 1)
  VectorXr weights;  // positive, summing to 2
  int order = 0;

  /// Integral of f over [lo, hi] by affine mapping of the rule.
  template <typename F>
  double integrate(F&& f, double lo, double hi) const {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }

  /// Nodes and weights mapped to [lo, hi].
  std::pair<VectorXr, VectorXr> mapped(double lo, double hi) const;
};

/// Gauss-Legendre rule of the given order (1 <= order <= 4096).
QuadratureRule gauss_legendre(int order);

}  // namespace btspec::specfun
