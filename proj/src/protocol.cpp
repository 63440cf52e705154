#include "btspec/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "btspec/specfun.hpp"

namespace btspec::protocol {

BasisTruncation default_truncation(double h, double r_outer) {
  if (!(h > 0.0)) throw PreconditionError("default_truncation: h must be positive");
  if (!(r_outer > 1.0)) throw PreconditionError("default_truncation: R must exceed 1");
  BasisTruncation t;
  t.k_max = 100.0 * std::pow(0.008 / h, 2.0 / 3.0);
  t.m_max = static_cast<int>(std::ceil(t.k_max * r_outer));
  t.n_max = static_cast<int>(std::ceil(t.k_max * (r_outer - 1.0) / pi)) + 3;
  return t;
}

double default_window(double h) { return 2.0 * specfun::airy_prime_zero(1) * std::pow(h, 2.0 / 3.0); }

namespace {

constexpr double kSurveyBand = 0.25;

using ModeKey = std::tuple<int, Parity, int>;

ModeKey key_of(const BasisMode& m) { return {m.m, m.parity, m.n}; }

// Positions of `from` sector rows inside the `to` sector, which must contain
// every mode of `from`.
std::vector<Eigen::Index> embedding(const Basis& from, const std::vector<std::size_t>& from_index,
                                    const Basis& to, const std::vector<std::size_t>& to_index) {
  std::map<ModeKey, Eigen::Index> where;
  for (std::size_t i = 0; i < to_index.size(); ++i)
    where[key_of(to.modes[to_index[i]])] = static_cast<Eigen::Index>(i);
  std::vector<Eigen::Index> out;
  out.reserve(from_index.size());
  for (auto i : from_index) {
    const auto it = where.find(key_of(from.modes[i]));
    if (it == where.end())
      throw NumericError("compute_spectrum: truncations are not nested");
    out.push_back(it->second);
  }
  return out;
}

VectorXc embed(const VectorXc& v, const std::vector<Eigen::Index>& map, Eigen::Index n) {
  VectorXc out = VectorXc::Zero(n);
  for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] = v[static_cast<Eigen::Index>(i)];
  return out;
}

Basis survey_basis(const Basis& base, double k_cut) {
  Basis out{base.geometry, base.truncation, {}};
  out.truncation.k_max = k_cut;
  for (const auto& m : base.modes)
    if (m.k <= k_cut) out.modes.push_back(m);
  return out;
}

// Largest k cut whose sector holds at most `limit` modes.
double survey_cut(const Basis& base, Parity p, int limit, double k_max) {
  std::vector<double> ks;
  for (const auto& m : base.modes)
    if (m.parity == p) ks.push_back(m.k);
  if (static_cast<int>(ks.size()) <= limit) return k_max;
  std::sort(ks.begin(), ks.end());
  return 0.5 * (ks[static_cast<std::size_t>(limit) - 1] + ks[static_cast<std::size_t>(limit)]);
}

struct Found {
  Complex value;
  Complex base;
  Parity parity;
  double movement;
  double residual;
  VectorXc vector;  // raised sector coordinates
};

}  // namespace

AnnulusSpectrum compute_spectrum(double h, const AnnulusGeometry& g, const Options& opt) {
  if (!(h > 0.0)) throw PreconditionError("compute_spectrum: h must be positive");
  if (!(opt.growth > 1.0)) throw PreconditionError("compute_spectrum: growth must exceed 1");
  if (!(opt.tolerance > 0.0)) throw PreconditionError("compute_spectrum: tolerance must be positive");
  if (opt.dense_limit < 16) throw PreconditionError("compute_spectrum: dense_limit must be >= 16");
  if (opt.sectors.empty()) throw PreconditionError("compute_spectrum: no sectors requested");

  AnnulusSpectrum out;
  out.h = h;
  out.geometry = g;
  Record& rec = out.record;
  rec.base = opt.base ? *opt.base : default_truncation(h, g.r_outer);
  rec.raised = rec.base.scaled(opt.growth);
  rec.growth = opt.growth;
  rec.tolerance = opt.tolerance;
  rec.re_window = opt.re_window > 0.0 ? opt.re_window : default_window(h);
  rec.dense_limit = opt.dense_limit;

  const Basis base = basis_cache::load_or_build(opt.cache_dir, g, rec.base);
  out.raised_basis = basis_cache::load_or_build(opt.cache_dir, g, rec.raised);
  const Basis& raised = out.raised_basis;

  std::vector<Found> found;
  std::vector<std::vector<std::size_t>> raised_index(2);
  for (Parity p : opt.sectors) {
    SectorRecord srec;
    srec.parity = p;
    srec.survey_k_max = survey_cut(base, p, opt.dense_limit, rec.base.k_max);
    const Basis survey = survey_basis(base, srec.survey_k_max);

    galerkin::AssemblyOptions aopt;
    aopt.sectors = {p};
    const auto survey_sparse = galerkin::assemble_sparse(h, survey, p, aopt);
    const auto base_sparse = galerkin::assemble_sparse(h, base, p, aopt);
    const auto raised_sparse = galerkin::assemble_sparse(h, raised, p, aopt);
    raised_index[p == Parity::even ? 0 : 1] = raised_sparse.mode_index;
    srec.survey_size = survey_sparse.mode_index.size();
    srec.base_size = base_sparse.mode_index.size();
    srec.raised_size = raised_sparse.mode_index.size();

    const auto to_base = embedding(survey, survey_sparse.mode_index, base, base_sparse.mode_index);
    const auto to_raised = embedding(base, base_sparse.mode_index, raised, raised_sparse.mode_index);

    // The survey's own cut produces a band of spurious eigenvalues from about
    // 0.3 h^2 k_s^2 upward; candidates stay below it.
    srec.window = std::min(rec.re_window, kSurveyBand * h * h * srec.survey_k_max * srec.survey_k_max);
    std::vector<Complex> candidates;
    {
      const MatrixXc dense = MatrixXc(survey_sparse.matrix);
      for (Complex z : eig_dense(dense).eigenvalues)
        if (z.real() <= srec.window) candidates.push_back(z);
    }
    srec.candidates = candidates.size();

    std::vector<Found> sector_found;
    for (Complex z : candidates) {
      const auto s = refine_eigenpair(survey_sparse.matrix, z);
      const auto b = refine_eigenpair(base_sparse.matrix, s.value,
                                      embed(s.vector, to_base, base_sparse.matrix.rows()));
      const auto r = refine_eigenpair(raised_sparse.matrix, b.value,
                                      embed(b.vector, to_raised, raised_sparse.matrix.rows()));
      const double movement = std::abs(r.value - b.value);
      if (!b.converged || !r.converged || movement >= opt.tolerance) continue;
      const bool duplicate = std::any_of(sector_found.begin(), sector_found.end(), [&](const Found& f) {
        return std::abs(f.value - r.value) < 1e-9 * (1.0 + std::abs(r.value));
      });
      if (duplicate) {
        ++srec.duplicates;
        continue;
      }
      sector_found.push_back({r.value, b.value, p, movement, r.residual,
                              opt.want_vectors ? r.vector : VectorXc()});
    }
    srec.converged = sector_found.size();
    for (auto& f : sector_found) found.push_back(std::move(f));
    rec.sectors.push_back(srec);
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const Found& a, const Found& b) { return eigenvalue_less(a.value, b.value); });
  Spectrum& spec = out.spectrum;
  MatrixXc vectors;
  if (opt.want_vectors)
    vectors = MatrixXc::Zero(static_cast<Eigen::Index>(raised.size()),
                             static_cast<Eigen::Index>(found.size()));
  for (std::size_t c = 0; c < found.size(); ++c) {
    const Found& f = found[c];
    spec.eigenvalues.push_back(f.value);
    spec.sector.push_back(f.parity);
    spec.residuals.push_back(f.residual);
    out.movement.push_back(f.movement);
    out.base_value.push_back(f.base);
    if (opt.want_vectors) {
      const auto& index = raised_index[f.parity == Parity::even ? 0 : 1];
      for (std::size_t i = 0; i < index.size(); ++i)
        vectors(static_cast<Eigen::Index>(index[i]), static_cast<Eigen::Index>(c)) =
            f.vector[static_cast<Eigen::Index>(i)];
    }
  }
  if (opt.want_vectors) spec.eigenvectors = std::move(vectors);
  return out;
}

std::vector<std::size_t> odd_index_positions(const AnnulusSpectrum& s, int count) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < s.spectrum.size() && static_cast<int>(pos.size()) < count; ++i)
    if (s.spectrum.sector[i] == Parity::even && s.spectrum.eigenvalues[i].imag() > 0.0)
      pos.push_back(i);
  if (static_cast<int>(pos.size()) < count)
    throw NumericError("odd_index_eigenvalues: only " + std::to_string(pos.size()) +
                       " converged eigenvalues in the cos sector, " + std::to_string(count) +
                       " requested");
  return pos;
}

std::vector<Complex> odd_index_eigenvalues(const AnnulusSpectrum& s, int count) {
  std::vector<Complex> out;
  for (auto i : odd_index_positions(s, count)) out.push_back(s.spectrum.eigenvalues[i]);
  return out;
}

}  // namespace btspec::protocol
