#include "btspec/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <tuple>
#include <string>

namespace btspec {

namespace {

void require_assembled(const GalerkinSystem& sys, Parity p) {
  if (!sys.block(p).assembled)
    throw PreconditionError(std::string("GalerkinSystem: ") + to_string(p) +
                            " sector was not assembled");
}

}  // namespace

MatrixXc GalerkinSystem::sector_operator(Parity p) const {
  require_assembled(*this, p);
  const ParityBlock& b = block(p);
  MatrixXc a = Complex(0.0, 1.0) * b.B.cast<Complex>();
  a.diagonal() += (h * h * b.lambda).cast<Complex>();
  return a;
}

MatrixXc GalerkinSystem::full_operator() const {
  MatrixXc a = Complex(0.0, 1.0) * full_B().cast<Complex>();
  a.diagonal() += (h * h * full_lambda()).cast<Complex>();
  return a;
}

MatrixXr GalerkinSystem::full_B() const {
  require_assembled(*this, Parity::even);
  require_assembled(*this, Parity::odd);
  const auto n = static_cast<Eigen::Index>(modes.size());
  MatrixXr out = MatrixXr::Zero(n, n);
  for (const auto& blk : blocks)
    for (Eigen::Index i = 0; i < blk.size(); ++i)
      for (Eigen::Index j = 0; j < blk.size(); ++j)
        out(static_cast<Eigen::Index>(blk.mode_index[i]),
            static_cast<Eigen::Index>(blk.mode_index[j])) = blk.B(i, j);
  return out;
}

VectorXr GalerkinSystem::full_lambda() const {
  VectorXr out(static_cast<Eigen::Index>(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i) out[static_cast<Eigen::Index>(i)] = modes[i].lambda;
  return out;
}

Complex GalerkinSystem::sector_trace(Parity p) const {
  require_assembled(*this, p);
  const ParityBlock& b = block(p);
  return {h * h * b.lambda.sum(), b.B.trace()};
}

Complex GalerkinSystem::trace() const {
  return sector_trace(Parity::even) + sector_trace(Parity::odd);
}

namespace galerkin {

namespace {

double angular_norm(int m) { return m == 0 ? 2.0 * pi : pi; }

// Radially normalised profile times r sqrt(w) at every node, one row per mode.
MatrixXr weighted_samples(const std::vector<const BasisMode*>& group, const VectorXr& r,
                          const VectorXr& w) {
  MatrixXr s(static_cast<Eigen::Index>(group.size()), r.size());
  const VectorXr rw = (r.array() * w.array().sqrt()).matrix();
  for (std::size_t i = 0; i < group.size(); ++i) {
    const double scale = std::sqrt(angular_norm(group[i]->m));
    s.row(static_cast<Eigen::Index>(i)) =
        (scale * annulus::sample_radial(*group[i], r).array() * rw.array()).matrix().transpose();
  }
  return s;
}

}  // namespace

double angular_coupling(int m, Parity p, int m_prime, Parity p_prime) {
  if (m < 0 || m_prime < 0) throw PreconditionError("angular_coupling: negative index");
  if ((p == Parity::odd && m == 0) || (p_prime == Parity::odd && m_prime == 0))
    throw PreconditionError("angular_coupling: odd parity needs m >= 1");
  if (p != p_prime || std::abs(m - m_prime) != 1) return 0.0;
  // cos(m t) cos(t) = (cos((m+1)t) + cos((m-1)t)) / 2, likewise for sin.
  if (m == 0 || m_prime == 0) return 1.0 / std::sqrt(2.0);
  return 0.5;
}

double radial_coupling(const AnnulusGeometry& g, const BasisMode& a, const BasisMode& b,
                       const specfun::QuadratureRule& rule) {
  if (std::abs(a.m - b.m) != 1) throw PreconditionError("radial_coupling: requires |m - m'| = 1");
  auto value = [&](const specfun::QuadratureRule& q) {
    const auto [r, w] = q.mapped(g.r_inner, g.r_outer);
    const VectorXr fa = annulus::sample_radial(a, r) * std::sqrt(angular_norm(a.m));
    const VectorXr fb = annulus::sample_radial(b, r) * std::sqrt(angular_norm(b.m));
    return (fa.array() * fb.array() * r.array().square() * w.array()).sum();
  };
  const double coarse = value(rule);
  const double fine = value(specfun::gauss_legendre(std::min(2 * rule.order, 4096)));
  if (std::abs(fine - coarse) >= 1e-10)
    throw QuadratureError("radial_coupling: unconverged for (m=" + std::to_string(a.m) +
                          ",n=" + std::to_string(a.n) + ") x (m=" + std::to_string(b.m) +
                          ",n=" + std::to_string(b.n) + ")");
  return fine;
}

namespace {

struct RuleNodes {
  VectorXr r, w, r2, w2;
  bool verify = false;
};

RuleNodes make_nodes(const AnnulusGeometry& g, int order, bool verify) {
  RuleNodes n;
  std::tie(n.r, n.w) = specfun::gauss_legendre(order).mapped(g.r_inner, g.r_outer);
  n.verify = verify;
  if (verify)
    std::tie(n.r2, n.w2) =
        specfun::gauss_legendre(std::min(2 * order, 4096)).mapped(g.r_inner, g.r_outer);
  return n;
}

// Visits every nonzero coupling block (m, m+1) of one parity sector.
// `index` lists the sector's positions in `modes`; the callback receives the
// block-row positions (into `index`) of m and m+1 and the block itself.
template <typename F>
void for_each_block(const std::vector<BasisMode>& modes, const std::vector<std::size_t>& index,
                    Parity p, const RuleNodes& nodes, F&& visit) {
  std::map<int, std::vector<std::size_t>> by_m;
  for (std::size_t i = 0; i < index.size(); ++i) by_m[modes[index[i]].m].push_back(i);
  auto samples_for = [&](const std::vector<std::size_t>& rows, const VectorXr& r,
                         const VectorXr& w) {
    std::vector<const BasisMode*> group;
    for (auto row : rows) group.push_back(&modes[index[row]]);
    return weighted_samples(group, r, w);
  };
  MatrixXr current, current_check;
  bool have_current = false;
  for (auto it = by_m.begin(); it != by_m.end(); ++it) {
    const auto next = std::next(it);
    if (next == by_m.end() || next->first != it->first + 1) {
      have_current = false;
      continue;
    }
    if (!have_current) {
      current = samples_for(it->second, nodes.r, nodes.w);
      if (nodes.verify) current_check = samples_for(it->second, nodes.r2, nodes.w2);
    }
    MatrixXr following = samples_for(next->second, nodes.r, nodes.w);
    MatrixXr following_check;
    if (nodes.verify) following_check = samples_for(next->second, nodes.r2, nodes.w2);

    const int m = it->first;
    const double ang = angular_coupling(m, p, m + 1, p);
    const MatrixXr coupling = ang * current * following.transpose();
    if (nodes.verify) {
      const MatrixXr fine = ang * current_check * following_check.transpose();
      const double defect = (fine - coupling).cwiseAbs().maxCoeff();
      if (defect >= 1e-10)
        throw QuadratureError("assemble: quadrature unconverged between m=" + std::to_string(m) +
                              " and m=" + std::to_string(m + 1) + " (" + to_string(p) +
                              "), defect " + std::to_string(defect));
    }
    visit(it->second, next->second, coupling);
    current = std::move(following);
    current_check = std::move(following_check);
    have_current = true;
  }
}

std::vector<std::size_t> sector_index(const std::vector<BasisMode>& modes, Parity p) {
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].parity == p) index.push_back(i);
  return index;
}

int quadrature_order_for(const Basis& basis, const AssemblyOptions& opt) {
  if (opt.quadrature_order > 0) return opt.quadrature_order;
  int n_top = 1;
  double k_top = 1.0;
  for (const auto& m : basis.modes) {
    n_top = std::max(n_top, m.n);
    k_top = std::max(k_top, m.k);
  }
  return annulus::default_quadrature_order(basis.geometry, n_top, k_top);
}

}  // namespace

GalerkinSystem assemble(double h, const Basis& basis, const AssemblyOptions& opt) {
  if (!(h > 0.0)) throw PreconditionError("assemble: h must be positive");
  if (basis.modes.empty()) throw PreconditionError("assemble: empty basis");

  GalerkinSystem sys;
  sys.h = h;
  sys.geometry = basis.geometry;
  sys.modes = basis.modes;
  sys.quadrature_order = quadrature_order_for(basis, opt);
  const RuleNodes nodes = make_nodes(basis.geometry, sys.quadrature_order, opt.verify_quadrature);

  for (Parity p : {Parity::even, Parity::odd}) {
    ParityBlock& blk = sys.blocks[p == Parity::even ? 0 : 1];
    blk.parity = p;
    blk.mode_index = sector_index(sys.modes, p);
    const Eigen::Index n = blk.size();
    blk.lambda.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) blk.lambda[i] = sys.modes[blk.mode_index[i]].lambda;
    if (std::find(opt.sectors.begin(), opt.sectors.end(), p) == opt.sectors.end()) {
      blk.assembled = false;
      continue;
    }
    blk.B = MatrixXr::Zero(n, n);
    for_each_block(sys.modes, blk.mode_index, p, nodes,
                   [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
                       const MatrixXr& coupling) {
                     for (std::size_t a = 0; a < rows.size(); ++a)
                       for (std::size_t b = 0; b < cols.size(); ++b) {
                         const auto ia = static_cast<Eigen::Index>(rows[a]);
                         const auto ib = static_cast<Eigen::Index>(cols[b]);
                         blk.B(ia, ib) = coupling(static_cast<Eigen::Index>(a),
                                                  static_cast<Eigen::Index>(b));
                         blk.B(ib, ia) = blk.B(ia, ib);
                       }
                   });
  }
  return sys;
}

SparseSector assemble_sparse(double h, const Basis& basis, Parity p, const AssemblyOptions& opt) {
  if (!(h > 0.0)) throw PreconditionError("assemble_sparse: h must be positive");
  SparseSector out;
  out.parity = p;
  out.mode_index = sector_index(basis.modes, p);
  if (out.mode_index.empty()) throw PreconditionError("assemble_sparse: empty sector");
  const RuleNodes nodes =
      make_nodes(basis.geometry, quadrature_order_for(basis, opt), opt.verify_quadrature);
  std::vector<Eigen::Triplet<Complex>> trip;
  const auto n = static_cast<Eigen::Index>(out.mode_index.size());
  for (Eigen::Index i = 0; i < n; ++i)
    trip.emplace_back(i, i, h * h * basis.modes[out.mode_index[i]].lambda);
  for_each_block(basis.modes, out.mode_index, p, nodes,
                 [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
                     const MatrixXr& coupling) {
                   for (std::size_t a = 0; a < rows.size(); ++a)
                     for (std::size_t b = 0; b < cols.size(); ++b) {
                       const Complex v(0.0, coupling(static_cast<Eigen::Index>(a),
                                                     static_cast<Eigen::Index>(b)));
                       const auto ia = static_cast<Eigen::Index>(rows[a]);
                       const auto ib = static_cast<Eigen::Index>(cols[b]);
                       trip.emplace_back(ia, ib, v);
                       trip.emplace_back(ib, ia, v);
                     }
                 });
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  return out;
}

}  // namespace galerkin

}  // namespace btspec
