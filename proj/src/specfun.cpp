#include "btspec/specfun.hpp"

#include <array>
#include <cmath>
#include <string>

namespace btspec::specfun {

namespace {

void check_bessel_args(int m, double x) {
  if (m < 0 || m > kMaxBesselOrder)
    throw PreconditionError("bessel: order " + std::to_string(m) + " out of range");
  if (!(x > 0.0) || !std::isfinite(x))
    throw PreconditionError("bessel: argument must be positive and finite");
}

}  // namespace

std::pair<double, double> bessel_j_y(int m, double x) {
  check_bessel_args(m, x);
  const double nu = static_cast<double>(m);
  const double j = std::cyl_bessel_j(nu, x);
  const double y = std::cyl_neumann(nu, x);
  if (!std::isfinite(y) || !std::isfinite(j))
    throw RangeError("bessel: Y_" + std::to_string(m) + "(" + std::to_string(x) +
                     ") overflows");
  return {j, y};
}

BesselJY bessel_jy(int m, double x) {
  const auto [j, y] = bessel_j_y(m, x);
  const double nu = static_cast<double>(m);
  // C' = (m/x) C_m - C_{m+1}; the m+1 evaluation stays on the same side of the
  // turning point as m except in a vanishing neighbourhood, so it is as
  // accurate as the order-m value.
  const double j1 = std::cyl_bessel_j(nu + 1.0, x);
  const double y1 = std::cyl_neumann(nu + 1.0, x);
  if (!std::isfinite(y1))
    throw RangeError("bessel: Y_" + std::to_string(m + 1) + " overflows");
  return {j, y, nu / x * j - j1, nu / x * y - y1};
}

namespace {

constexpr double kAi0 = 0.355028053887817239260;   // Ai(0)
constexpr double kDAi0 = 0.258819403792806798405;  // -Ai'(0)
constexpr double kSeriesLimit = 5.0;

AiryValue airy_maclaurin(double x) {
  const double x3 = x * x * x;
  // f(x) = sum t_k, g(x) = sum s_k with Ai = c1 f - c2 g.
  double t = 1.0, s = x;
  double f = t, g = s;
  // derivative series: f' = sum T_k (k >= 1), g' = sum G_k (k >= 0)
  double tt = 0.5 * x * x, gg = 1.0;
  double fp = tt, gp = gg;
  for (int k = 1; k < 200; ++k) {
    const double k3 = 3.0 * k;
    t *= x3 / ((k3 - 1.0) * k3);
    s *= x3 / (k3 * (k3 + 1.0));
    gg *= x3 / (k3 * (k3 - 2.0));
    if (k >= 2) tt *= x3 / ((k3 - 1.0) * (k3 - 3.0));
    f += t;
    g += s;
    gp += gg;
    if (k >= 2) fp += tt;
    const double scale = std::abs(f) + std::abs(g) + std::abs(fp) + std::abs(gp);
    if (std::abs(t) + std::abs(s) + std::abs(tt) + std::abs(gg) < 1e-18 * scale) break;
  }
  return {kAi0 * f - kDAi0 * g, kAi0 * fp - kDAi0 * gp};
}

}  // namespace

AiryValue airy_ai(double x) {
  if (!(x >= -60.0 && x <= 60.0)) throw PreconditionError("airy_ai: x outside [-60, 60]");
  if (std::abs(x) <= kSeriesLimit) return airy_maclaurin(x);
  if (x > 0.0) {
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const double k13 = std::cyl_bessel_k(1.0 / 3.0, zeta);
    const double k23 = std::cyl_bessel_k(2.0 / 3.0, zeta);
    return {std::sqrt(x / 3.0) * k13 / pi, -x / (pi * std::sqrt(3.0)) * k23};
  }
  const double t = -x;
  const double zeta = 2.0 / 3.0 * t * std::sqrt(t);
  const double rt3 = std::sqrt(3.0);
  const double j13 = std::cyl_bessel_j(1.0 / 3.0, zeta);
  const double y13 = std::cyl_neumann(1.0 / 3.0, zeta);
  const double j23 = std::cyl_bessel_j(2.0 / 3.0, zeta);
  const double y23 = std::cyl_neumann(2.0 / 3.0, zeta);
  return {0.5 * std::sqrt(t) * (j13 - y13 / rt3), 0.5 * t * (j23 + y23 / rt3)};
}

namespace {

constexpr int kMaxAiryZeros = 20;
constexpr int kNewtonIterations = 50;

// Newton on Ai (derivative = false) or Ai' (derivative = true, Ai'' = x Ai).
double newton_airy(double x, bool derivative, int index) {
  for (int it = 0; it < kNewtonIterations; ++it) {
    const AiryValue v = airy_ai(x);
    const double step = derivative ? v.dai / (x * v.ai) : v.ai / v.dai;
    x -= step;
    if (std::abs(step) < 1e-15 * std::abs(x)) {
      const AiryValue w = airy_ai(x);
      if (std::abs(derivative ? w.dai : w.ai) < 1e-10) return x;
    }
  }
  throw NumericError("airy_zeros: Newton failed to converge for zero #" +
                     std::to_string(index) + (derivative ? " of Ai'" : " of Ai"));
}

const AiryZeros& cached_zeros() {
  static const AiryZeros zeros = airy_zeros(kMaxAiryZeros);
  return zeros;
}

}  // namespace

AiryZeros airy_zeros(int count) {
  if (count < 1 || count > kMaxAiryZeros)
    throw PreconditionError("airy_zeros: count must lie in [1, 20]");
  AiryZeros out;
  out.a.reserve(count);
  out.a_prime.reserve(count);
  for (int n = 1; n <= count; ++n) {
    const double ta = 3.0 * pi * (4.0 * n - 1.0) / 8.0;
    const double tb = 3.0 * pi * (4.0 * n - 3.0) / 8.0;
    const double guess_a = -std::pow(ta, 2.0 / 3.0) * (1.0 + 5.0 / 48.0 / (ta * ta));
    const double guess_b = -std::pow(tb, 2.0 / 3.0) * (1.0 - 7.0 / 48.0 / (tb * tb));
    out.a.push_back(newton_airy(guess_a, false, n));
    out.a_prime.push_back(newton_airy(guess_b, true, n));
  }
  return out;
}

double airy_zero(int n) {
  if (n < 1 || n > kMaxAiryZeros) throw PreconditionError("airy_zero: index out of range");
  return std::abs(cached_zeros().a[n - 1]);
}

double airy_prime_zero(int n) {
  if (n < 1 || n > kMaxAiryZeros) throw PreconditionError("airy_prime_zero: index out of range");
  return std::abs(cached_zeros().a_prime[n - 1]);
}

std::pair<VectorXr, VectorXr> QuadratureRule::mapped(double lo, double hi) const {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  return {(mid + half * nodes.array()).matrix(), half * weights};
}

QuadratureRule gauss_legendre(int order) {
  if (order < 1 || order > 4096) throw PreconditionError("gauss_legendre: order out of range");
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // final derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order == 1 ? 1.0 : order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    if (2 * i + 1 == order) x = 0.0;
    rule.nodes[order - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[order - 1 - i] = w;
    rule.weights[i] = w;
  }
  return rule;
}

}  // namespace btspec::specfun
