#pragma once

// One-dimensional model operators behind the semiclassical margin:
//
//   -u'' + i j x u  on (0, L),   u(0) = 0 or u'(0) = 0,  u(L) = 0
//   -u'' + i a x^2 u  on (-L, L), Dirichlet ends
//   -u'' + i x u    on (-L, L), Dirichlet ends (resolvent probe only)
//
// All use second-order central differences. Eigenvalues are seeded from a
// coarse dense solve, refined by Newton's method on the tridiagonal
// determinant, and Richardson-extrapolated in dx^2 over successive mesh
// doublings. Plain refinement stalls near 1e-10 because the entries grow like
// 1/dx^2.

#include <vector>

#include "btspec/common.hpp"
#include "btspec/eigensolve.hpp"

namespace btspec::model1d {

enum class BoundaryCondition { dirichlet, neumann };

const char* to_string(BoundaryCondition bc);

/// Movement below which a doubling of L or N counts as converged.
inline constexpr double kConvergenceTol = 1e-8;

struct HalfLineAiryProblem {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  double j = 1.0;
  double L = 0.0;  // 0: default 8 max(1, |lambda|)^{1/2} / j^{1/3}
  int N = 0;       // coarsest mesh of the extrapolation; 0: 400, levels added until converged
  int n_report = 3;
};

struct ConvergenceRecord {
  double L = 0.0;
  int N = 0;  // finest mesh used
  bool L_converged = false;
  bool N_converged = false;
  double L_movement = 0.0;  // max change over the last doubling of L
  double N_movement = 0.0;  // max change over the last extrapolation level

  bool converged() const { return L_converged && N_converged; }
};

struct ModelSpectrumReport {
  std::vector<Complex> eigenvalues;  // ascending real part
  double lambda_sharp = 0.0;         // leftmost real part
  double scaling_defect = 0.0;       // |lambda_sharp(j) - j^{2/3} lambda_sharp(1)|
  ConvergenceRecord convergence;
};

ModelSpectrumReport halfline_airy_spectrum(const HalfLineAiryProblem& problem);

/// Unextrapolated second-order eigenvalues on the mesh (L, N) nearest to
/// `guesses`; exposes the discretisation order.
std::vector<Complex> halfline_airy_fd(BoundaryCondition bc, double j, double L, int N,
                                      const std::vector<Complex>& guesses);

/// |a_1|/2 j^{2/3} (Dirichlet) or |a'_1|/2 j^{2/3} (Neumann).
double left_margin(BoundaryCondition bc, double j_m);

struct OscillatorReport {
  std::vector<Complex> eigenvalues;
  ConvergenceRecord convergence;
};

/// Leftmost `n_report` eigenvalues of -u'' + i a x^2 u. L = 0 and N = 0 pick
/// defaults as for the Airy problem.
OscillatorReport rotated_oscillator_spectrum(double a, double L = 0.0, int N = 0,
                                             int n_report = 4);

struct WholeLineProbe {
  std::vector<double> L;
  std::vector<ResolventGrid> grids;  // one per L, same nodes
  std::vector<double> ratio;         // per node: smin(L_last) / smin(L_first)
  std::vector<bool> bounded_below;   // per node: smin never fell below half its first value
};

/// sigma_min(A_L - z) for the Dirichlet truncation of -u'' + i x u on
/// [-L, L] at mesh width 2L/N, for every L in the list (N scaled with L).
WholeLineProbe wholeline_airy_probe(const std::vector<double>& L, int N_first,
                                    const ComplexGrid& grid);

/// Sparse finite-difference matrix of the whole-line probe.
SparseXc wholeline_airy_matrix(double L, int N);

}  // namespace btspec::model1d
