#include "btspec/model1d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "btspec/specfun.hpp"

namespace btspec::model1d {

const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::dirichlet ? "D" : "N";
}

namespace {

constexpr int kCoarseN = 400;
constexpr int kMaxLDoublings = 4;

// Tridiagonal matrix with diagonal d and off-diagonal products c_i = T(i,i+1) T(i+1,i).
struct Tridiagonal {
  std::vector<Complex> d;
  std::vector<double> upper, lower;

  Eigen::Index size() const { return static_cast<Eigen::Index>(d.size()); }

  MatrixXc dense() const {
    MatrixXc t = MatrixXc::Zero(size(), size());
    for (Eigen::Index i = 0; i < size(); ++i) {
      t(i, i) = d[i];
      if (i + 1 < size()) {
        t(i, i + 1) = upper[i];
        t(i + 1, i) = lower[i];
      }
    }
    return t;
  }

  SparseXc sparse() const {
    std::vector<Eigen::Triplet<Complex>> trip;
    for (Eigen::Index i = 0; i < size(); ++i) {
      trip.emplace_back(i, i, d[i]);
      if (i + 1 < size()) {
        trip.emplace_back(i, i + 1, upper[i]);
        trip.emplace_back(i + 1, i, lower[i]);
      }
    }
    SparseXc s(size(), size());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
  }
};

using Potential = std::function<Complex(double)>;

// Interval [x0, x0 + L], N cells, Dirichlet at the right end.
enum class LeftEnd { dirichlet, neumann };

Tridiagonal discretize(const Potential& v, double x0, double L, int N, LeftEnd left) {
  const double dx = L / N;
  const double inv = 1.0 / (dx * dx);
  Tridiagonal t;
  const int first = left == LeftEnd::neumann ? 0 : 1;
  for (int i = first; i < N; ++i) t.d.push_back(2.0 * inv + v(x0 + i * dx));
  const std::size_t n = t.d.size();
  t.upper.assign(n - 1, -inv);
  t.lower.assign(n - 1, -inv);
  // ghost point u_{-1} = u_1
  if (left == LeftEnd::neumann) t.upper[0] = -2.0 * inv;
  return t;
}

// (log det(T - lambda))' by the ratio recurrence; O(N).
Complex log_det_derivative(const Tridiagonal& t, Complex lambda) {
  Complex r = t.d[0] - lambda;
  Complex rp = -1.0;
  Complex sum = rp / r;
  for (std::size_t i = 1; i < t.d.size(); ++i) {
    const double c = t.upper[i - 1] * t.lower[i - 1];
    const Complex r_prev = r;
    r = (t.d[i] - lambda) - c / r_prev;
    rp = -1.0 + c * rp / (r_prev * r_prev);
    sum += rp / r;
  }
  return sum;
}

Complex newton_refine(const Tridiagonal& t, Complex guess) {
  Complex lambda = guess;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    const Complex g = log_det_derivative(t, lambda);
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()) || g == Complex(0.0))
      throw NumericError("model1d: determinant Newton iteration broke down");
    const Complex step = 1.0 / g;
    lambda -= step;
    const double size = std::abs(step) / (1.0 + std::abs(lambda));
    // the recurrence sums O(N) rounding errors, so stop once steps stagnate
    if (size < 1e-14 || (size < 1e-9 && size >= 0.5 * previous)) return lambda;
    previous = size;
  }
  throw NumericError("model1d: determinant Newton iteration did not converge from seed " +
                     std::to_string(guess.real()) + (guess.imag() < 0 ? "" : "+") +
                     std::to_string(guess.imag()) + "i on a mesh of " +
                     std::to_string(t.d.size()) + " points");
}

double max_movement(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct Solved {
  std::vector<Complex> eigenvalues;
  ConvergenceRecord record;
};

std::vector<Complex> refine_all(const Tridiagonal& t, const std::vector<Complex>& guesses) {
  std::vector<Complex> out;
  out.reserve(guesses.size());
  for (Complex g : guesses) out.push_back(newton_refine(t, g));
  std::sort(out.begin(), out.end(), eigenvalue_less);
  for (std::size_t i = 1; i < out.size(); ++i)
    if (std::abs(out[i] - out[i - 1]) < 1e-9 * (1.0 + std::abs(out[i])))
      throw NumericError("model1d: two seeds converged to the same eigenvalue");
  return out;
}

// Richardson extrapolation in dx^2 over meshes N, 2N, 4N, ...: the scheme's
// error expands in even powers of dx for both end conditions. Returns the
// Romberg diagonal, one entry per level.
struct Romberg {
  std::vector<std::vector<Complex>> diagonal;
  std::vector<Complex> raw_finest;
};

Romberg romberg(const Potential& v, double x0, double L, LeftEnd left, int N0, int levels,
                const std::vector<Complex>& seeds) {
  Romberg out;
  std::vector<std::vector<Complex>> row;  // previous row of the tableau
  std::vector<Complex> guess = seeds;
  for (int k = 0; k < levels; ++k) {
    const auto raw = refine_all(discretize(v, x0, L, N0 << k, left), guess);
    guess = raw;
    std::vector<std::vector<Complex>> next{raw};
    double factor = 1.0;
    for (std::size_t j = 1; j <= row.size(); ++j) {
      factor *= 4.0;
      std::vector<Complex> t(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i)
        t[i] = next[j - 1][i] + (next[j - 1][i] - row[j - 1][i]) / (factor - 1.0);
      next.push_back(std::move(t));
    }
    out.diagonal.push_back(next.back());
    row = std::move(next);
    out.raw_finest = raw;
  }
  return out;
}

constexpr int kMinLevels = 3;
constexpr int kMaxLevels = 7;

// Extrapolated eigenvalues at fixed L. With N fixed the tableau has
// kMinLevels levels; otherwise levels are added until the diagonal settles.
std::vector<Complex> refine_in_N(const Potential& v, double x0, double L, LeftEnd left,
                                 const std::vector<Complex>& seeds, int N0, bool fixed_N,
                                 int& levels, ConvergenceRecord& rec) {
  if (fixed_N) levels = kMinLevels;
  Romberg r = romberg(v, x0, L, left, N0, levels, seeds);
  rec.N_movement = max_movement(r.diagonal[levels - 1], r.diagonal[levels - 2]);
  while (!fixed_N && rec.N_movement >= kConvergenceTol && levels < kMaxLevels) {
    ++levels;
    r = romberg(v, x0, L, left, N0, levels, seeds);
    rec.N_movement = max_movement(r.diagonal[levels - 1], r.diagonal[levels - 2]);
  }
  rec.N_converged = rec.N_movement < kConvergenceTol;
  return r.diagonal.back();
}

Solved solve(const Potential& v, double x0, double L, LeftEnd left, int N_request, int n_report,
             bool symmetric_interval) {
  if (n_report < 1) throw PreconditionError("model1d: n_report must be >= 1");
  if (!(L > 0.0)) throw PreconditionError("model1d: L must be positive");
  if (N_request != 0 && N_request < 16) throw PreconditionError("model1d: N must be >= 16");

  // Coarse seeds. The Dirichlet wall at the truncation end carries its own
  // family of eigenvalues, recognised by where their vectors live; grid modes
  // near the top of the discrete spectrum mirror the low ones and are dropped
  // by size. A domain too short to separate the families is doubled.
  const int coarse = std::max(kCoarseN, 4 * n_report);
  std::vector<Complex> seeds;
  for (int attempt = 0;; ++attempt) {
    const auto dense = eig_dense(discretize(v, x0, L, coarse, left).dense(), true);
    const double resolved = static_cast<double>(coarse) * coarse / (L * L);
    const Eigen::Index n = dense.eigenvectors->rows();
    seeds.clear();
    for (std::size_t c = 0; c < dense.size() && static_cast<int>(seeds.size()) < n_report; ++c) {
      if (std::abs(dense.eigenvalues[c]) > resolved) continue;
      const auto col = dense.eigenvectors->col(static_cast<Eigen::Index>(c));
      double far = 0.0;
      if (symmetric_interval)
        far = col.head(n / 8).squaredNorm() + col.tail(n / 8).squaredNorm();
      else
        far = col.tail(n / 4).squaredNorm();
      if (far < 1e-3 * col.squaredNorm()) seeds.push_back(dense.eigenvalues[c]);
    }
    if (static_cast<int>(seeds.size()) == n_report) break;
    if (attempt == 3)
      throw NumericError("model1d: could not isolate the requested eigenvalues from the wall modes");
    L *= 2.0;
    if (symmetric_interval) x0 = -0.5 * L;
  }

  Solved out;
  ConvergenceRecord& rec = out.record;
  const bool fixed_N = N_request != 0;
  int N = fixed_N ? N_request : coarse;
  int levels = kMinLevels;
  std::vector<Complex> current = refine_in_N(v, x0, L, left, seeds, N, fixed_N, levels, rec);

  // Extend the domain at fixed mesh width.
  double L_cur = L;
  for (int d = 0; d < kMaxLDoublings; ++d) {
    const double L2 = 2.0 * L_cur;
    const double x2 = symmetric_interval ? -0.5 * L2 : x0;
    const auto wider = romberg(v, x2, L2, left, 2 * N, levels, current).diagonal.back();
    rec.L_movement = max_movement(current, wider);
    if (rec.L_movement < kConvergenceTol) {
      rec.L_converged = true;
      break;
    }
    L_cur = L2;
    x0 = x2;
    N *= 2;
    current = wider;
  }
  rec.L = L_cur;
  rec.N = N << (levels - 1);
  out.eigenvalues = std::move(current);
  return out;
}

double default_length(double magnitude, double coefficient) {
  return 8.0 * std::sqrt(std::max(1.0, magnitude)) / std::cbrt(coefficient);
}

}  // namespace

double left_margin(BoundaryCondition bc, double j_m) {
  if (!(j_m > 0.0)) throw PreconditionError("left_margin: j_m must be positive");
  const double zero = bc == BoundaryCondition::dirichlet ? specfun::airy_zero(1)
                                                         : specfun::airy_prime_zero(1);
  return 0.5 * zero * std::pow(j_m, 2.0 / 3.0);
}

namespace {

ModelSpectrumReport halfline_unscaled(const HalfLineAiryProblem& p) {
  if (!(p.j > 0.0)) throw PreconditionError("halfline_airy_spectrum: j must be positive");
  if (p.n_report < 1 || p.n_report > 20)
    throw PreconditionError("halfline_airy_spectrum: n_report must be in [1, 20]");
  const double zero = p.bc == BoundaryCondition::dirichlet ? specfun::airy_zero(p.n_report)
                                                           : specfun::airy_prime_zero(p.n_report);
  const double L = p.L > 0.0 ? p.L : default_length(zero * std::pow(p.j, 2.0 / 3.0), p.j);
  const double j = p.j;
  const auto solved = solve([j](double x) { return Complex(0.0, j * x); }, 0.0, L,
                            p.bc == BoundaryCondition::neumann ? LeftEnd::neumann
                                                               : LeftEnd::dirichlet,
                            p.N, p.n_report, false);
  ModelSpectrumReport r;
  r.eigenvalues = solved.eigenvalues;
  r.convergence = solved.record;
  r.lambda_sharp = r.eigenvalues.front().real();
  return r;
}

}  // namespace

ModelSpectrumReport halfline_airy_spectrum(const HalfLineAiryProblem& problem) {
  ModelSpectrumReport r = halfline_unscaled(problem);
  if (problem.j != 1.0) {
    HalfLineAiryProblem unit = problem;
    unit.j = 1.0;
    unit.L = 0.0;
    unit.n_report = 1;
    const double base = halfline_unscaled(unit).lambda_sharp;
    r.scaling_defect = std::abs(r.lambda_sharp - std::pow(problem.j, 2.0 / 3.0) * base);
  }
  return r;
}

std::vector<Complex> halfline_airy_fd(BoundaryCondition bc, double j, double L, int N,
                                      const std::vector<Complex>& guesses) {
  if (!(L > 0.0) || N < 16) throw PreconditionError("halfline_airy_fd: need L > 0, N >= 16");
  return refine_all(discretize([j](double x) { return Complex(0.0, j * x); }, 0.0, L, N,
                               bc == BoundaryCondition::neumann ? LeftEnd::neumann
                                                                : LeftEnd::dirichlet),
                    guesses);
}

OscillatorReport rotated_oscillator_spectrum(double a, double L, int N, int n_report) {
  if (!(a > 0.0)) throw PreconditionError("rotated_oscillator_spectrum: a must be positive");
  const double magnitude = std::sqrt(a) * (2 * n_report - 1);
  const double half = L > 0.0 ? L : default_length(magnitude, a);
  const auto solved = solve([a](double x) { return Complex(0.0, a * x * x); }, -half, 2.0 * half,
                            LeftEnd::dirichlet, N, n_report, true);
  OscillatorReport r;
  r.eigenvalues = solved.eigenvalues;
  r.convergence = solved.record;
  r.convergence.L *= 0.5;  // report the half-width
  return r;
}

SparseXc wholeline_airy_matrix(double L, int N) {
  if (!(L > 0.0) || N < 16) throw PreconditionError("wholeline_airy_matrix: need L > 0, N >= 16");
  return discretize([](double x) { return Complex(0.0, x); }, -L, 2.0 * L, N, LeftEnd::dirichlet)
      .sparse();
}

WholeLineProbe wholeline_airy_probe(const std::vector<double>& L, int N_first,
                                    const ComplexGrid& grid) {
  if (L.empty()) throw PreconditionError("wholeline_airy_probe: empty L list");
  if (std::max(std::abs(grid.re_min), std::abs(grid.re_max)) > 10.0)
    throw PreconditionError("wholeline_airy_probe: grid must satisfy |Re z| <= 10");
  WholeLineProbe out;
  out.L = L;
  for (double l : L) {
    const int N = static_cast<int>(std::lround(N_first * l / L.front()));
    out.grids.push_back(smin_grid(wholeline_airy_matrix(l, N), grid));
  }
  const std::size_t nodes = out.grids.front().smin.size();
  for (std::size_t k = 0; k < nodes; ++k) {
    const double first = out.grids.front().smin[k];
    double lowest = first;
    for (const auto& g : out.grids) lowest = std::min(lowest, g.smin[k]);
    out.ratio.push_back(first > 0.0 ? out.grids.back().smin[k] / first : 0.0);
    out.bounded_below.push_back(first > 0.0 && lowest >= 0.5 * first);
  }
  return out;
}

}  // namespace btspec::model1d
