#include "btspec/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "btspec/specfun.hpp"

namespace btspec::asymptotics {

const char* to_string(Boundary b) { return b == Boundary::inner_neumann ? "N" : "D"; }

const char* to_string(Label l) {
  switch (l) {
    case Label::inner: return "inner";
    case Label::outer: return "outer";
    default: return "delocalized";
  }
}

Complex lambda_app(Boundary boundary, int n, int k, double h, double r_outer) {
  if (!(h > 0.0)) throw PreconditionError("lambda_app: h must be positive");
  if (!(r_outer > 1.0)) throw PreconditionError("lambda_app: R must exceed 1");
  if (k < 1) throw PreconditionError("lambda_app: k must be >= 1");
  const double h23 = std::cbrt(h * h);
  const double transverse = h * (2 * k - 1);
  if (boundary == Boundary::inner_neumann) {
    const double a = specfun::airy_prime_zero(n);
    return I + h23 * a * cis(pi / 3) + transverse * cis(-pi / 4) / std::sqrt(2.0) +
           h23 * h23 * cis(pi / 6) / (2.0 * a);
  }
  const double a = specfun::airy_zero(n);
  return I * r_outer + h23 * a * cis(-pi / 3) + transverse * cis(-pi / 4) / std::sqrt(2.0 * r_outer);
}

std::vector<AsymptoticEigenvalue> candidates(double h, double r_outer, int n_max, int k_max,
                                             bool include_conjugates) {
  if (n_max < 1 || k_max < 1) throw PreconditionError("candidates: n_max and k_max must be >= 1");
  std::vector<AsymptoticEigenvalue> out;
  for (Boundary b : {Boundary::inner_neumann, Boundary::outer_dirichlet})
    for (int n = 1; n <= n_max; ++n)
      for (int k = 1; k <= k_max; ++k)
        out.push_back({b, n, k, false, lambda_app(b, n, k, h, r_outer)});
  if (include_conjugates) {
    const std::size_t direct = out.size();
    for (std::size_t i = 0; i < direct; ++i) {
      AsymptoticEigenvalue c = out[i];
      c.conjugate = true;
      c.value = std::conj(c.value);
      out.push_back(c);
    }
  }
  return out;
}

double default_tau(double h) { return 20.0 * std::pow(h, 5.0 / 3.0); }

std::optional<std::size_t> MatchReport::candidate_for(std::size_t eigen_index) const {
  for (const auto& m : matches)
    if (m.eigen_index == eigen_index) return m.candidate_index;
  return std::nullopt;
}

MatchReport match_spectrum(const Spectrum& spectrum, double h,
                           const std::vector<AsymptoticEigenvalue>& cands, double tau) {
  MatchReport report;
  report.tau = tau > 0.0 ? tau : default_tau(h);
  std::vector<Match> pairs;
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const double d = std::abs(spectrum.eigenvalues[i] - cands[c].value);
      if (d <= report.tau) pairs.push_back({i, c, d});
    }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Match& a, const Match& b) { return a.distance < b.distance; });
  std::vector<bool> eig_used(spectrum.size(), false), cand_used(cands.size(), false);
  for (const auto& p : pairs) {
    if (eig_used[p.eigen_index] || cand_used[p.candidate_index]) continue;
    eig_used[p.eigen_index] = cand_used[p.candidate_index] = true;
    report.matches.push_back(p);
  }
  std::sort(report.matches.begin(), report.matches.end(),
            [](const Match& a, const Match& b) { return a.eigen_index < b.eigen_index; });
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    if (!eig_used[i]) report.unmatched_eigenvalues.push_back(i);
  for (std::size_t c = 0; c < cands.size(); ++c) {
    if (!cand_used[c]) report.unmatched_candidates.push_back(c);
    report.realized.push_back({c, false, false});
  }
  const bool sectors = spectrum.sector.size() == spectrum.size();
  for (const auto& m : report.matches) {
    auto& r = report.realized[m.candidate_index];
    if (!sectors) continue;
    (spectrum.sector[m.eigen_index] == Parity::even ? r.even : r.odd) = true;
  }
  return report;
}

double default_shell(double h) { return 5.0 * std::cbrt(h * h); }

std::vector<LocalizationReport> localize(const Spectrum& spectrum, const Basis& basis, double h,
                                         const std::vector<std::size_t>& indices, double delta) {
  if (!spectrum.eigenvectors)
    throw PreconditionError("localize: spectrum carries no eigenvectors");
  const MatrixXc& vectors = *spectrum.eigenvectors;
  if (vectors.rows() != static_cast<Eigen::Index>(basis.size()))
    throw PreconditionError("localize: eigenvectors do not match the basis");
  const AnnulusGeometry& g = basis.geometry;
  const double shell = std::min(delta > 0.0 ? delta : default_shell(h), 0.5 * g.width());

  // group rows by angular function
  std::map<std::pair<int, Parity>, std::vector<std::size_t>> groups;
  double k_top = 1.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    groups[{basis.modes[i].m, basis.modes[i].parity}].push_back(i);
    k_top = std::max(k_top, basis.modes[i].k);
  }
  const int order = std::min(4096, std::max(96, 2 * static_cast<int>(std::ceil(k_top * shell / pi)) + 32));
  const auto rule = specfun::gauss_legendre(order);
  const auto [r_in, w_in] = rule.mapped(g.r_inner, g.r_inner + shell);
  const auto [r_out, w_out] = rule.mapped(g.r_outer - shell, g.r_outer);

  // samples per group: rows = modes, columns = nodes, scaled by sqrt(angular norm r w)
  struct GroupSamples {
    std::vector<Eigen::Index> rows;
    MatrixXr inner, outer;
  };
  std::vector<GroupSamples> samples;
  for (const auto& [key, rows] : groups) {
    GroupSamples s;
    const double ang = key.first == 0 ? 2.0 * pi : pi;
    s.inner.resize(static_cast<Eigen::Index>(rows.size()), r_in.size());
    s.outer.resize(static_cast<Eigen::Index>(rows.size()), r_out.size());
    const VectorXr sc_in = (ang * r_in.array() * w_in.array()).sqrt().matrix();
    const VectorXr sc_out = (ang * r_out.array() * w_out.array()).sqrt().matrix();
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto& mode = basis.modes[rows[j]];
      s.rows.push_back(static_cast<Eigen::Index>(rows[j]));
      s.inner.row(static_cast<Eigen::Index>(j)) =
          (annulus::sample_radial(mode, r_in).array() * sc_in.array()).matrix().transpose();
      s.outer.row(static_cast<Eigen::Index>(j)) =
          (annulus::sample_radial(mode, r_out).array() * sc_out.array()).matrix().transpose();
    }
    samples.push_back(std::move(s));
  }

  std::vector<std::size_t> which = indices;
  if (which.empty())
    for (std::size_t i = 0; i < spectrum.size(); ++i) which.push_back(i);

  std::vector<LocalizationReport> out;
  for (auto idx : which) {
    if (idx >= static_cast<std::size_t>(vectors.cols()))
      throw PreconditionError("localize: eigen index out of range");
    const auto c = vectors.col(static_cast<Eigen::Index>(idx));
    const double total = c.squaredNorm();
    if (!(total > 0.0)) throw PreconditionError("localize: zero eigenvector");
    double inner = 0.0, outer = 0.0;
    for (const auto& s : samples) {
      VectorXc coef(static_cast<Eigen::Index>(s.rows.size()));
      for (std::size_t j = 0; j < s.rows.size(); ++j) coef[static_cast<Eigen::Index>(j)] = c[s.rows[j]];
      if (coef.squaredNorm() == 0.0) continue;
      inner += (s.inner.transpose().cast<Complex>() * coef).squaredNorm();
      outer += (s.outer.transpose().cast<Complex>() * coef).squaredNorm();
    }
    LocalizationReport rep;
    rep.eigen_index = idx;
    rep.inner_mass = std::clamp(inner / total, 0.0, 1.0);
    rep.outer_mass = std::clamp(outer / total, 0.0, 1.0);
    rep.label = rep.inner_mass > 0.8   ? Label::inner
                : rep.outer_mass > 0.8 ? Label::outer
                                       : Label::delocalized;
    out.push_back(rep);
  }
  return out;
}

}  // namespace btspec::asymptotics
