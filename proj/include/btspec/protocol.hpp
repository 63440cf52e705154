#pragma once

// Converged eigenvalues of the annulus operator.
//
// The spectrum of a Galerkin truncation is only trusted where it is stable
// under enlarging the truncation. Three nested bases are used per sector:
//
//   survey  (k <= k_s)        dense eigensolve, every eigenvalue
//   base    (k <= K)          sparse refinement of each survey eigenpair
//   raised  (k <= growth K)   sparse refinement again
//
// An eigenvalue is reported when base and raised values differ by less than
// the tolerance; the raised value is the one reported. The survey equals the
// base whenever the base sector fits the dense size limit.

#include <filesystem>
#include <optional>
#include <vector>

#include "btspec/annulus_basis.hpp"
#include "btspec/eigensolve.hpp"
#include "btspec/galerkin.hpp"

namespace btspec::protocol {

/// Energy cut K = 100 (0.008/h)^{2/3}, m_max = ceil(K R) and n_max large
/// enough that only the k cut binds.
BasisTruncation default_truncation(double h, double r_outer);

/// Default real-part window for candidates: 4 |a'_1|/2 h^{2/3}.
double default_window(double h);

struct Options {
  std::vector<Parity> sectors{Parity::even, Parity::odd};
  std::optional<BasisTruncation> base;  // default_truncation(h, R)
  double growth = 1.25;
  double tolerance = 1e-5;
  double re_window = 0.0;  // 0: default_window(h)
  int dense_limit = 4500;  // largest survey sector solved densely
  bool want_vectors = false;
  std::filesystem::path cache_dir;  // empty: no basis cache
};

struct SectorRecord {
  Parity parity = Parity::even;
  double survey_k_max = 0.0;
  double window = 0.0;  // real-part window actually used (capped below the survey's cut-off band)
  std::size_t survey_size = 0, base_size = 0, raised_size = 0;
  std::size_t candidates = 0;  // survey eigenvalues inside the window
  std::size_t converged = 0;
  std::size_t duplicates = 0;  // converged onto an eigenvalue already found
};

struct Record {
  BasisTruncation base, raised;
  double growth = 1.25;
  double tolerance = 1e-5;
  double re_window = 0.0;
  int dense_limit = 0;
  std::vector<SectorRecord> sectors;
};

struct AnnulusSpectrum {
  double h = 0.0;
  AnnulusGeometry geometry{2.0};
  Spectrum spectrum;              // converged raised values; vectors in raised-basis coordinates
  std::vector<double> movement;   // |raised - base| per eigenvalue
  std::vector<Complex> base_value;
  Basis raised_basis{AnnulusGeometry{2.0}, {}, {}};
  Record record;
};

AnnulusSpectrum compute_spectrum(double h, const AnnulusGeometry& g, const Options& opt = {});

/// The odd-indexed eigenvalues lambda_1, lambda_3, ... of the cos sector:
/// its converged eigenvalues with positive imaginary part in order of real
/// part (each stands for a conjugate pair). Throws if fewer than `count`.
std::vector<Complex> odd_index_eigenvalues(const AnnulusSpectrum& s, int count);

/// Positions in `s.spectrum` of the values returned by odd_index_eigenvalues.
std::vector<std::size_t> odd_index_positions(const AnnulusSpectrum& s, int count);

}  // namespace btspec::protocol
