#pragma once

// Independent eigenvalue oracle for small dense matrices, shared by the unit
// tests and the acceptance run.

#include <algorithm>
#include <vector>

#include "btspec/common.hpp"

namespace btspec::oracle {

// Faddeev-LeVerrier: coefficients c_0..c_n of det(zI - A) with c_n = 1.
inline std::vector<Complex> characteristic_polynomial(const MatrixXc& a) {
  const Eigen::Index n = a.rows();
  std::vector<Complex> c(static_cast<std::size_t>(n) + 1);
  c[n] = 1.0;
  MatrixXc M = MatrixXc::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = a * M + c[n - k + 1] * MatrixXc::Identity(n, n);
    c[n - k] = -(a * M).trace() / static_cast<double>(k);
  }
  return c;
}

inline Complex horner(const std::vector<Complex>& c, Complex z) {
  Complex v = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * z + *it;
  return v;
}

// Durand-Kerner simultaneous iteration, then Newton polishing.
inline std::vector<Complex> polynomial_roots(const std::vector<Complex>& c) {
  const std::size_t n = c.size() - 1;
  double bound = 0;
  for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i]));
  bound += 1.0;
  std::vector<Complex> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = bound * std::polar(1.0, 0.4 + 2 * pi * double(i) / double(n));
  for (int it = 0; it < 5000; ++it) {
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const Complex step = horner(c, z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15 * bound) break;
  }
  std::vector<Complex> d(n);
  for (std::size_t i = 1; i <= n; ++i) d[i - 1] = double(i) * c[i];
  for (auto& r : z)
    for (int it = 0; it < 3; ++it) {
      const Complex dp = horner(d, r);
      if (std::abs(dp) > 0) r -= horner(c, r) / dp;
    }
  return z;
}

inline double max_matching_distance(std::vector<Complex> a, std::vector<Complex> b) {
  double worst = 0;
  for (Complex z : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [z](Complex p, Complex q) { return std::abs(p - z) < std::abs(q - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

}  // namespace btspec::oracle
