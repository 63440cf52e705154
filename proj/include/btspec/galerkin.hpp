#pragma once

// Truncated matrix of -h^2 Delta + i x_1 in the annulus eigenbasis:
//
//   A = h^2 Lambda + i B,   Lambda = diag(k^2),   B_ij = <u_i, x_1 u_j>.
//
// x_1 = r cos(theta) couples only modes with |m_i - m_j| = 1 and equal
// parity, so A is block diagonal over the two parity sectors.

#include <array>
#include <vector>

#include <Eigen/SparseCore>

#include "btspec/annulus_basis.hpp"
#include "btspec/specfun.hpp"

namespace btspec {

struct ParityBlock {
  Parity parity = Parity::even;
  std::vector<std::size_t> mode_index;  // positions in GalerkinSystem::modes
  VectorXr lambda;                      // k^2 per block row
  MatrixXr B;                           // projections of x_1, symmetric
  bool assembled = true;                // false: sector skipped, B empty

  Eigen::Index size() const { return static_cast<Eigen::Index>(mode_index.size()); }
};

struct GalerkinSystem {
  double h = 0.0;
  AnnulusGeometry geometry{2.0};
  std::vector<BasisMode> modes;
  std::array<ParityBlock, 2> blocks;  // [0] even, [1] odd
  int quadrature_order = 0;

  const ParityBlock& block(Parity p) const { return blocks[p == Parity::even ? 0 : 1]; }

  /// h^2 Lambda + i B restricted to one sector.
  MatrixXc sector_operator(Parity p) const;
  /// Both sectors as one dense matrix in `modes` order.
  MatrixXc full_operator() const;
  MatrixXr full_B() const;
  VectorXr full_lambda() const;

  /// trace(A) = h^2 sum k^2 since the selection rule empties diag(B).
  Complex trace() const;
  Complex sector_trace(Parity p) const;
};

namespace galerkin {

/// Normalised angular integral of phi_m(theta) cos(theta) phi_m'(theta), where
/// phi is cos(m theta)/sqrt(pi) (1/sqrt(2 pi) for m = 0) or sin(m theta)/sqrt(pi).
double angular_coupling(int m, Parity p, int m_prime, Parity p_prime);

/// int_1^R Rhat_i(r) Rhat_j(r) r^2 dr with radially normalised profiles.
/// Throws QuadratureError when doubling the rule moves the value by >= 1e-10.
double radial_coupling(const AnnulusGeometry& g, const BasisMode& a, const BasisMode& b,
                       const specfun::QuadratureRule& rule);

struct AssemblyOptions {
  int quadrature_order = 0;     // 0: default_quadrature_order of the basis
  bool verify_quadrature = true;  // compare every block against twice the order
  std::vector<Parity> sectors{Parity::even, Parity::odd};  // others are left zero
};

GalerkinSystem assemble(double h, const Basis& basis, const AssemblyOptions& opt = {});

/// One sector of h^2 Lambda + i B in compressed sparse form, for bases too
/// large to hold densely. Same entries as the dense assembly.
struct SparseSector {
  Parity parity = Parity::even;
  std::vector<std::size_t> mode_index;
  Eigen::SparseMatrix<Complex> matrix;
};

SparseSector assemble_sparse(double h, const Basis& basis, Parity p,
                             const AssemblyOptions& opt = {});

}  // namespace galerkin

}  // namespace btspec
