#pragma once

// Orthonormal eigenbasis of -Delta on the annulus 1 < r < R with a Neumann
// condition at r = 1 and a Dirichlet condition at r = R:
//
//   u_{m,n}(r, theta) = c_{m,n} R_{m,n}(r) {cos, sin}(m theta),
//   R_{m,n}(r) = J_m(k r) Y'_m(k) - Y_m(k r) J'_m(k),
//
// where k = k_{m,n} is the n-th positive root of
//   F_m(k) = J'_m(k) Y_m(k R) - Y'_m(k) J_m(k R).

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "btspec/common.hpp"
#include "btspec/specfun.hpp"

namespace btspec {

struct AnnulusGeometry {
  double r_inner = 1.0;
  double r_outer = 2.0;

  explicit AnnulusGeometry(double outer) : r_outer(outer) {
    if (!(outer > 1.0) || !std::isfinite(outer))
      throw PreconditionError("AnnulusGeometry: outer radius must exceed 1");
  }
  double width() const { return r_outer - r_inner; }
};

enum class Parity { even, odd };

inline const char* to_string(Parity p) { return p == Parity::even ? "even" : "odd"; }

struct BasisMode {
  int m = 0;
  Parity parity = Parity::even;
  int n = 1;
  double k = 0.0;
  double lambda = 0.0;  // k^2
  double norm_const = 1.0;
};

/// Which modes enter the basis: m in [0, m_max], n in [1, n_max], and
/// optionally only roots with k <= k_max.
struct BasisTruncation {
  int m_max = 60;
  int n_max = 40;
  double k_max = std::numeric_limits<double>::infinity();

  bool has_k_cut() const { return std::isfinite(k_max); }
  BasisTruncation scaled(double factor) const;
};

namespace annulus {

/// F_m(k); the sign flips at every eigenvalue.
double cross_product(const AnnulusGeometry& g, int m, double k);

/// First n_max positive roots of F_m, or fewer if k_max is reached first.
std::vector<double> radial_roots(const AnnulusGeometry& g, int m, int n_max,
                                 double k_max = std::numeric_limits<double>::infinity());

/// Unnormalised radial profile R_{m,n}(r).
double radial_function(int m, double k, double r);
/// d/dr R_{m,n}(r).
double radial_derivative(int m, double k, double r);

/// Quadrature order used for normalisation and projections: max(64, 4 n_max),
/// raised for k-cut bases so the most oscillatory mode is resolved.
int default_quadrature_order(const AnnulusGeometry& g, int n_max, double k_top);

/// Sample c * R_{m,n}(r_i) for every node; the workhorse for the projection
/// integrals.
VectorXr sample_radial(const BasisMode& mode, const VectorXr& r);

}  // namespace annulus

struct Basis {
  AnnulusGeometry geometry;
  BasisTruncation truncation;
  std::vector<BasisMode> modes;

  std::size_t size() const { return modes.size(); }
  std::size_t count(Parity p) const;
};

/// Builds modes ordered by parity (even block first), then m, then n.
/// Root scans run in parallel over m.
Basis build_basis(const AnnulusGeometry& g, const BasisTruncation& t);
inline Basis build_basis(const AnnulusGeometry& g, int m_max, int n_max) {
  return build_basis(g, BasisTruncation{m_max, n_max});
}

/// c R_{m,n}(r) {cos, sin}(m theta). Throws DomainError outside [1, R].
double evaluate_mode(const AnnulusGeometry& g, const BasisMode& mode, double r, double theta);

/// Radial mass fraction integral int_a^b c^2 R^2 r dr times the angular norm;
/// used by the orthonormality checks.
double mode_inner_product(const AnnulusGeometry& g, const BasisMode& a, const BasisMode& b,
                          int quadrature_order);

namespace basis_cache {

inline constexpr const char* kSchema = "btspec-basis-v1";

std::string serialize(const Basis& basis);
Basis deserialize(const std::string& text);
std::filesystem::path file_for(const std::filesystem::path& dir, double r_outer,
                               const BasisTruncation& t);

/// Loads the cached basis if present and matching; otherwise builds and
/// writes it. `dir` empty disables caching.
Basis load_or_build(const std::filesystem::path& dir, const AnnulusGeometry& g,
                    const BasisTruncation& t);

}  // namespace basis_cache

}  // namespace btspec
