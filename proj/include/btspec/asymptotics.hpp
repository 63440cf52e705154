#pragma once

// Boundary-layer approximations of the annulus eigenvalues and their
// identification with computed ones.
//
//   inner (Neumann, r = 1):
//     i + h^{2/3}|a'_n| e^{i pi/3} + h (2k-1) e^{-i pi/4}/sqrt(2)
//       + h^{4/3} e^{i pi/6} / (2|a'_n|)
//   outer (Dirichlet, r = R):
//     iR + h^{2/3}|a_n| e^{-i pi/3} + h (2k-1) e^{-i pi/4}/sqrt(2R)
//
// Both have an O(h^{5/3}) remainder. The values localise at x_1 = 1 and
// x_1 = R; their conjugates belong to x_1 = -1 and x_1 = -R.

#include <optional>
#include <vector>

#include "btspec/annulus_basis.hpp"
#include "btspec/eigensolve.hpp"

namespace btspec::asymptotics {

enum class Boundary { inner_neumann, outer_dirichlet };

const char* to_string(Boundary b);

struct AsymptoticEigenvalue {
  Boundary boundary = Boundary::inner_neumann;
  int n = 1;  // Airy-zero index
  int k = 1;  // transverse index
  bool conjugate = false;
  Complex value;
  double order = 5.0 / 3.0;  // exponent of the remainder
};

Complex lambda_app(Boundary boundary, int n, int k, double h, double r_outer);

/// Every branch with n <= n_max and k <= k_max on both boundaries, with
/// conjugates appended when requested.
std::vector<AsymptoticEigenvalue> candidates(double h, double r_outer, int n_max, int k_max,
                                             bool include_conjugates = true);

/// 20 h^{5/3}.
double default_tau(double h);

struct Match {
  std::size_t eigen_index;
  std::size_t candidate_index;
  double distance;
};

struct Realization {
  std::size_t candidate_index;
  bool even = false;  // matched by an eigenvalue of the cos sector
  bool odd = false;   // matched by an eigenvalue of the sin sector
};

struct MatchReport {
  double tau = 0.0;
  std::vector<Match> matches;  // ascending eigen_index
  std::vector<std::size_t> unmatched_eigenvalues;
  std::vector<std::size_t> unmatched_candidates;
  std::vector<Realization> realized;  // one per candidate

  /// Candidate matched to eigenvalue i, if any.
  std::optional<std::size_t> candidate_for(std::size_t eigen_index) const;
};

/// Greedy nearest-pair matching in the complex plane, accepting pairs within
/// tau (0: default_tau(h)). Sector flags need `spectrum.sector`.
MatchReport match_spectrum(const Spectrum& spectrum, double h,
                           const std::vector<AsymptoticEigenvalue>& candidates, double tau = 0.0);

enum class Label { inner, outer, delocalized };

const char* to_string(Label l);

struct LocalizationReport {
  std::size_t eigen_index = 0;
  double inner_mass = 0.0;  // fraction of |u|^2 in 1 <= r <= 1 + delta
  double outer_mass = 0.0;  // fraction in R - delta <= r <= R
  Label label = Label::delocalized;
};

/// 5 h^{2/3}.
double default_shell(double h);

/// Mass fractions of the eigenfunctions sum_i c_i u_i. The angular integral
/// is exact by orthogonality; the radial one uses Gauss-Legendre on each
/// shell. Shells wider than half the annulus are cut at the midline.
/// `indices` empty means every eigenvector.
std::vector<LocalizationReport> localize(const Spectrum& spectrum, const Basis& basis, double h,
                                         const std::vector<std::size_t>& indices = {},
                                         double delta = 0.0);

}  // namespace btspec::asymptotics
