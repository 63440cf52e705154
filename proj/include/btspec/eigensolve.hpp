#pragma once

// Dense non-Hermitian eigenvalues and smallest-singular-value grids.

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "btspec/annulus_basis.hpp"
#include "btspec/common.hpp"

namespace btspec {

using SparseXc = Eigen::SparseMatrix<Complex>;

struct Spectrum {
  std::vector<Complex> eigenvalues;       // ascending real part, ties by imaginary part
  std::optional<MatrixXc> eigenvectors;   // columns, unit 2-norm
  std::vector<Parity> sector;             // per eigenvalue when known, else empty
  std::vector<double> residuals;          // ||A v - lambda v|| / ||v|| when vectors present

  std::size_t size() const { return eigenvalues.size(); }
};

/// Sort key shared by every spectrum in the library.
bool eigenvalue_less(Complex a, Complex b);

/// Balanced Hessenberg-QR eigendecomposition of a general complex matrix.
/// Throws NumericError (naming the first unconverged index) if QR stalls.
Spectrum eig_dense(const MatrixXc& a, bool want_vectors = false);

/// Merge per-sector spectra into one sorted spectrum; vectors (if all present)
/// are scattered into full coordinates using `index_maps`.
Spectrum merge_sectors(const std::vector<std::pair<Spectrum, Parity>>& parts,
                       const std::vector<std::vector<std::size_t>>& index_maps,
                       Eigen::Index full_dim);

struct ComplexGrid {
  double re_min = 0.0, re_max = 0.0;
  double im_min = 0.0, im_max = 0.0;
  int n_re = 1, n_im = 1;

  Complex at(int i_re, int i_im) const;
  std::size_t size() const { return static_cast<std::size_t>(n_re) * n_im; }
};

struct ResolventGrid {
  ComplexGrid grid;
  std::vector<Complex> z;     // row-major: i_re outer, i_im inner
  std::vector<double> smin;   // sigma_min(A - z)
};

/// sigma_min(A - z) over the grid. The matrix is reduced to Schur form once;
/// each node then runs inverse Lanczos on the shifted triangular factor.
ResolventGrid smin_grid(const MatrixXc& a, const ComplexGrid& grid);
/// Same contract for sparse A (factorises A - z per node).
ResolventGrid smin_grid(const SparseXc& a, const ComplexGrid& grid);

/// Single-point sparse variant.
double smallest_singular_value(const SparseXc& a, Complex z);

struct ConjugatePairing {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (i, j) with lambda_j ~ conj(lambda_i)
  std::vector<std::size_t> unpaired;
};

/// Greedy nearest matching of each eigenvalue with a conjugate partner within
/// 1e-6 (1 + |lambda|). Real eigenvalues pair with themselves.
ConjugatePairing match_conjugates(const Spectrum& s, double rel_tol = 1e-6);

/// Eigenvector for a known eigenvalue by shifted inverse iteration on sparse A.
/// Returns a unit vector and its residual ||A v - lambda v||.
std::pair<VectorXc, double> inverse_iteration(const SparseXc& a, Complex lambda);

struct RefinedEigenpair {
  Complex value;
  VectorXc vector;  // unit 2-norm
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Eigenpair of A nearest `shift`: inverse iteration with one factorisation of
/// A - shift and the Rayleigh quotient v^T A v / v^T v, which is second-order
/// accurate when A is complex symmetric (A = A^T, as every Galerkin sector is).
/// `start` (if non-empty) seeds the iteration.
RefinedEigenpair refine_eigenpair(const SparseXc& a, Complex shift, const VectorXc& start = {},
                                  double tol = 1e-13, int max_iterations = 40);

}  // namespace btspec
