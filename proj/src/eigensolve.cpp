#include "btspec/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SparseLU>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace btspec {

bool eigenvalue_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

namespace {

void check_finite(const MatrixXc& a, const char* who) {
  if (a.rows() != a.cols()) throw PreconditionError(std::string(who) + ": matrix must be square");
  if (!a.allFinite()) throw PreconditionError(std::string(who) + ": matrix has non-finite entries");
}

void sort_spectrum(Spectrum& s) {
  std::vector<std::size_t> order(s.eigenvalues.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return eigenvalue_less(s.eigenvalues[i], s.eigenvalues[j]);
  });
  Spectrum out;
  out.eigenvalues.reserve(order.size());
  for (auto i : order) out.eigenvalues.push_back(s.eigenvalues[i]);
  if (!s.sector.empty())
    for (auto i : order) out.sector.push_back(s.sector[i]);
  if (!s.residuals.empty())
    for (auto i : order) out.residuals.push_back(s.residuals[i]);
  if (s.eigenvectors) {
    MatrixXc v(s.eigenvectors->rows(), s.eigenvectors->cols());
    for (std::size_t c = 0; c < order.size(); ++c)
      v.col(static_cast<Eigen::Index>(c)) = s.eigenvectors->col(static_cast<Eigen::Index>(order[c]));
    out.eigenvectors = std::move(v);
  }
  s = std::move(out);
}

}  // namespace

Spectrum eig_dense(const MatrixXc& a, bool want_vectors) {
  check_finite(a, "eig_dense");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Spectrum s;
  if (n == 0) return s;

  MatrixXc work = a;
  VectorXc w(n);
  MatrixXc vr;
  if (want_vectors) vr.resize(n, n);
  std::vector<double> scale(static_cast<std::size_t>(n)), rconde(1), rcondv(1);
  lapack_int ilo = 0, ihi = 0;
  double abnrm = 0.0;
  const lapack_int info = LAPACKE_zgeevx(
      LAPACK_COL_MAJOR, 'B', 'N', want_vectors ? 'V' : 'N', 'N', n, work.data(), n, w.data(),
      nullptr, 1, want_vectors ? vr.data() : nullptr, want_vectors ? n : 1, &ilo, &ihi,
      scale.data(), &abnrm, rconde.data(), rcondv.data());
  if (info < 0) throw NumericError("eig_dense: invalid argument " + std::to_string(-info));
  if (info > 0)
    throw NumericError("eig_dense: QR iteration failed to converge; eigenvalues " +
                       std::to_string(info) + ".." + std::to_string(n) +
                       " are unconverged (stuck index " + std::to_string(info) + ")");

  s.eigenvalues.assign(w.data(), w.data() + n);
  if (want_vectors) {
    for (Eigen::Index c = 0; c < n; ++c) vr.col(c).normalize();
    s.residuals.resize(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < n; ++c)
      s.residuals[static_cast<std::size_t>(c)] = (a * vr.col(c) - w[c] * vr.col(c)).norm();
    s.eigenvectors = std::move(vr);
  }
  sort_spectrum(s);
  return s;
}

Spectrum merge_sectors(const std::vector<std::pair<Spectrum, Parity>>& parts,
                       const std::vector<std::vector<std::size_t>>& index_maps,
                       Eigen::Index full_dim) {
  Spectrum out;
  const bool vectors = std::all_of(parts.begin(), parts.end(),
                                   [](const auto& p) { return p.first.eigenvectors.has_value(); });
  std::size_t total = 0;
  for (const auto& p : parts) total += p.first.size();
  MatrixXc v;
  if (vectors) v = MatrixXc::Zero(full_dim, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& [spec, parity] = parts[k];
    for (std::size_t i = 0; i < spec.size(); ++i) {
      out.eigenvalues.push_back(spec.eigenvalues[i]);
      out.sector.push_back(parity);
      if (!spec.residuals.empty()) out.residuals.push_back(spec.residuals[i]);
      if (vectors) {
        const auto& map = index_maps.at(k);
        for (std::size_t r = 0; r < map.size(); ++r)
          v(static_cast<Eigen::Index>(map[r]), col) =
              (*spec.eigenvectors)(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
      }
      ++col;
    }
  }
  if (out.residuals.size() != out.eigenvalues.size()) out.residuals.clear();
  if (vectors) out.eigenvectors = std::move(v);
  sort_spectrum(out);
  return out;
}

Complex ComplexGrid::at(int i_re, int i_im) const {
  const double re = n_re == 1 ? re_min : re_min + (re_max - re_min) * i_re / (n_re - 1);
  const double im = n_im == 1 ? im_min : im_min + (im_max - im_min) * i_im / (n_im - 1);
  return {re, im};
}

namespace {

// Largest eigenvalue of the Hermitian positive operator x -> apply(x) by
// Lanczos with full reorthogonalisation.
template <typename Apply>
double lanczos_max(Apply&& apply, Eigen::Index n) {
  if (n == 0) return 0.0;
  const int max_steps = static_cast<int>(std::min<Eigen::Index>(n, 120));
  std::vector<VectorXc> q;
  q.reserve(static_cast<std::size_t>(max_steps) + 1);
  VectorXc start(n);
  for (Eigen::Index i = 0; i < n; ++i)  // deterministic, generic start vector
    start[i] = Complex(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
  q.push_back(start.normalized());
  std::vector<double> alpha, beta;
  double previous = 0.0;
  for (int k = 0; k < max_steps; ++k) {
    VectorXc w = apply(q.back());
    if (!w.allFinite()) return std::numeric_limits<double>::infinity();
    alpha.push_back(q.back().dot(w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) w -= qi.dot(w) * qi;
    const double b = w.norm();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) {
      t(i, i) = alpha[i];
      if (i < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    const double ritz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .maxCoeff();
    if (k > 0 && std::abs(ritz - previous) <= 1e-15 * ritz) return ritz;
    if (b <= 1e-14 * std::max(1.0, std::abs(ritz))) return ritz;
    previous = ritz;
    beta.push_back(b);
    q.push_back(w / b);
  }
  return previous;
}

double smin_triangular(const MatrixXc& t, Complex z) {
  MatrixXc u = t;
  u.diagonal().array() -= z;
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    if (u(i, i) == Complex(0.0)) return 0.0;
  const auto upper = u.triangularView<Eigen::Upper>();
  auto apply = [&](const VectorXc& x) -> VectorXc {
    VectorXc y = upper.adjoint().solve(x);
    return upper.solve(y);
  };
  const double mu = lanczos_max(apply, u.rows());
  return std::isfinite(mu) && mu > 0.0 ? 1.0 / std::sqrt(mu) : 0.0;
}

MatrixXc schur_factor(const MatrixXc& a) {
  MatrixXc t = a;
  const lapack_int n = static_cast<lapack_int>(a.rows());
  VectorXc w(n);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'N', 'N', nullptr, n, t.data(), n,
                                        &sdim, w.data(), nullptr, 1);
  if (info != 0) throw NumericError("smin_grid: Schur decomposition failed, info " +
                                    std::to_string(info));
  return t;
}

}  // namespace

ResolventGrid smin_grid(const MatrixXc& a, const ComplexGrid& grid) {
  check_finite(a, "smin_grid");
  if (grid.n_re < 1 || grid.n_im < 1) throw PreconditionError("smin_grid: empty grid");
  const MatrixXc t = schur_factor(a);
  ResolventGrid out{grid, {}, {}};
  for (int i = 0; i < grid.n_re; ++i)
    for (int j = 0; j < grid.n_im; ++j) {
      const Complex z = grid.at(i, j);
      out.z.push_back(z);
      out.smin.push_back(smin_triangular(t, z));
    }
  return out;
}

double smallest_singular_value(const SparseXc& a, Complex z) {
  SparseXc shifted = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) shifted.coeffRef(i, i) -= z;
  shifted.makeCompressed();
  Eigen::SparseLU<SparseXc, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) return 0.0;  // exactly singular
  auto apply = [&](const VectorXc& x) -> VectorXc {
    VectorXc y = lu.adjoint().solve(x);
    return lu.solve(y);
  };
  const double mu = lanczos_max(apply, a.rows());
  return std::isfinite(mu) && mu > 0.0 ? 1.0 / std::sqrt(mu) : 0.0;
}

ResolventGrid smin_grid(const SparseXc& a, const ComplexGrid& grid) {
  if (a.rows() != a.cols()) throw PreconditionError("smin_grid: matrix must be square");
  if (grid.n_re < 1 || grid.n_im < 1) throw PreconditionError("smin_grid: empty grid");
  ResolventGrid out{grid, {}, {}};
  for (int i = 0; i < grid.n_re; ++i)
    for (int j = 0; j < grid.n_im; ++j) {
      const Complex z = grid.at(i, j);
      out.z.push_back(z);
      out.smin.push_back(smallest_singular_value(a, z));
    }
  return out;
}

ConjugatePairing match_conjugates(const Spectrum& s, double rel_tol) {
  ConjugatePairing out;
  const std::size_t n = s.size();
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    const Complex target = std::conj(s.eigenvalues[i]);
    const double tol = rel_tol * (1.0 + std::abs(s.eigenvalues[i]));
    if (std::abs(s.eigenvalues[i].imag()) <= tol) {
      used[i] = true;
      out.pairs.emplace_back(i, i);
      continue;
    }
    std::size_t best = n;
    double best_d = tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || j == i) continue;
      const double d = std::abs(s.eigenvalues[j] - target);
      if (d <= best_d) {
        best_d = d;
        best = j;
      }
    }
    used[i] = true;
    if (best == n) {
      out.unpaired.push_back(i);
    } else {
      used[best] = true;
      out.pairs.emplace_back(i, best);
    }
  }
  return out;
}

std::pair<VectorXc, double> inverse_iteration(const SparseXc& a, Complex lambda) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) throw PreconditionError("inverse_iteration: bad matrix");
  // Shift slightly off the eigenvalue so the factorisation is regular.
  const double nudge = 1e-10 * (1.0 + std::abs(lambda));
  SparseXc shifted = a;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= lambda + Complex(nudge, nudge);
  shifted.makeCompressed();
  Eigen::SparseLU<SparseXc, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw NumericError("inverse_iteration: factorisation failed");
  VectorXc v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(1.0 + 0.1 * std::cos(0.9 * i), 0.05 * i / n);
  v.normalize();
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 8; ++it) {
    VectorXc next = lu.solve(v);
    if (!next.allFinite()) throw NumericError("inverse_iteration: solve produced non-finite values");
    v = next.normalized();
    residual = (a * v - lambda * v).norm();
    if (it >= 1 && residual <= 1e-12 * (1.0 + std::abs(lambda))) break;
  }
  // fix the phase so the largest component is real positive
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::abs(v[imax]) / v[imax];
  return {v, residual};
}

RefinedEigenpair refine_eigenpair(const SparseXc& a, Complex shift, const VectorXc& start,
                                  double tol, int max_iterations) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) throw PreconditionError("refine_eigenpair: bad matrix");
  if (start.size() != 0 && start.size() != n)
    throw PreconditionError("refine_eigenpair: start vector has the wrong length");
  SparseXc shifted = a;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  shifted.makeCompressed();
  Eigen::SparseLU<SparseXc, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) {
    // the shift is an eigenvalue to working precision
    const double nudge = 1e-12 * (1.0 + std::abs(shift));
    return refine_eigenpair(a, shift + Complex(nudge, nudge), start, tol, max_iterations);
  }
  VectorXc v = start.size() == n ? start : VectorXc::Ones(n);
  if (start.size() != n)
    for (Eigen::Index i = 0; i < n; ++i) v[i] += Complex(0.3 * std::sin(1.7 * i), 0.2 * std::cos(0.3 * i));
  v.normalize();
  RefinedEigenpair out;
  out.value = shift;
  for (int it = 1; it <= max_iterations; ++it) {
    VectorXc next = lu.solve(v);
    if (!next.allFinite()) throw NumericError("refine_eigenpair: solve produced non-finite values");
    v = next.normalized();
    const VectorXc av = a * v;
    const Complex denom = v.transpose() * v;
    const Complex value = std::abs(denom) > 1e-8 ? Complex(v.transpose() * av) / denom
                                                 : Complex(v.dot(av));
    const double change = std::abs(value - out.value);
    out.value = value;
    out.iterations = it;
    out.residual = (av - value * v).norm();
    if (it > 1 && change <= tol * (1.0 + std::abs(value))) {
      out.converged = true;
      break;
    }
  }
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::abs(v[imax]) / v[imax];
  out.vector = std::move(v);
  return out;
}

}  // namespace btspec
