#include "btspec/annulus_basis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace btspec {

BasisTruncation BasisTruncation::scaled(double factor) const {
  BasisTruncation out = *this;
  out.m_max = static_cast<int>(std::ceil(m_max * factor));
  out.n_max = static_cast<int>(std::ceil(n_max * factor));
  if (has_k_cut()) out.k_max = k_max * factor;
  return out;
}

std::size_t Basis::count(Parity p) const {
  return static_cast<std::size_t>(
      std::count_if(modes.begin(), modes.end(), [p](const BasisMode& b) { return b.parity == p; }));
}

namespace annulus {

namespace {

struct CrossValue {
  double f;
  double df;
  double scale;
};

// F_m(k), dF/dk and the magnitude of the two products; C'' = -C'/x - (1 - m^2/x^2) C.
CrossValue cross_product_full(const AnnulusGeometry& g, int m, double k) {
  const double R = g.r_outer;
  const auto a = specfun::bessel_jy(m, k);
  const auto b = specfun::bessel_jy(m, k * R);
  const double mm = static_cast<double>(m) * m;
  const double ja2 = -a.dj / k - (1.0 - mm / (k * k)) * a.j;
  const double ya2 = -a.dy / k - (1.0 - mm / (k * k)) * a.y;
  const double f = a.dj * b.y - a.dy * b.j;
  const double df = ja2 * b.y + R * a.dj * b.dy - ya2 * b.j - R * a.dy * b.dj;
  return {f, df, std::abs(a.dj * b.y) + std::abs(a.dy * b.j)};
}

double cross_product_value(const AnnulusGeometry& g, int m, double k) {
  const auto a = specfun::bessel_jy(m, k);
  const auto [jb, yb] = specfun::bessel_j_y(m, k * g.r_outer);
  return a.dj * yb - a.dy * jb;
}

// Safeguarded Newton inside a sign-change bracket.
double refine_root(const AnnulusGeometry& g, int m, double lo, double hi, double flo) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const CrossValue v = cross_product_full(g, m, x);
    if (v.f == 0.0 || std::abs(v.f) < 1e-13 * v.scale) return x;
    if ((v.f < 0) == (flo < 0)) {
      lo = x;
      flo = v.f;
    } else {
      hi = x;
    }
    double next = x - v.f / v.df;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (hi - lo < 4e-16 * hi) return 0.5 * (lo + hi);
    x = next;
  }
  throw RootScanError("radial_roots: refinement did not converge for m=" + std::to_string(m), lo,
                      hi);
}

struct ScanResult {
  std::vector<double> brackets_lo;
  std::vector<double> brackets_hi;
  std::vector<double> values_lo;
};

ScanResult scan(const AnnulusGeometry& g, int m, double start, double step, int n_max,
                double k_limit) {
  ScanResult out;
  double a = start;
  double fa = cross_product_value(g, m, a);
  while (static_cast<int>(out.brackets_lo.size()) < n_max && a < k_limit) {
    const double b = a + step;
    const double fb = cross_product_value(g, m, b);
    if ((fa < 0) != (fb < 0)) {
      out.brackets_lo.push_back(a);
      out.brackets_hi.push_back(b);
      out.values_lo.push_back(fa);
    }
    a = b;
    fa = fb;
  }
  return out;
}

// Roots satisfy k > m / R (Rayleigh quotient bound), so the scan starts just
// below that, moving up if Y_m still overflows there.
double scan_start(const AnnulusGeometry& g, int m) {
  double start = std::max(1e-3, 0.95 * m / g.r_outer);
  for (int tries = 0; tries < 200; ++tries) {
    try {
      (void)cross_product_value(g, m, start);
      return start;
    } catch (const RangeError&) {
      start = start * 1.02 + 1e-3;
    }
  }
  throw RangeError("radial_roots: Bessel functions overflow for m=" + std::to_string(m));
}

}  // namespace

double cross_product(const AnnulusGeometry& g, int m, double k) {
  return cross_product_value(g, m, k);
}

std::vector<double> radial_roots(const AnnulusGeometry& g, int m, int n_max, double k_max) {
  if (n_max < 1) throw PreconditionError("radial_roots: n_max must be >= 1");
  if (m < 0 || m >= specfun::kMaxBesselOrder)
    throw PreconditionError("radial_roots: order out of range");
  const double step = pi / (8.0 * g.width());
  const double start = scan_start(g, m);
  const ScanResult coarse = scan(g, m, start, step, n_max, k_max);

  std::vector<double> roots;
  roots.reserve(coarse.brackets_lo.size());
  for (std::size_t i = 0; i < coarse.brackets_lo.size(); ++i) {
    const double k = refine_root(g, m, coarse.brackets_lo[i], coarse.brackets_hi[i],
                                 coarse.values_lo[i]);
    if (k <= k_max) roots.push_back(k);
  }
  if (roots.empty()) return roots;

  // Missed-root detection: a scan at half the step must see the same number of
  // sign changes below the last root.
  const double top = coarse.brackets_hi[roots.size() - 1];
  const ScanResult fine = scan(g, m, start, 0.5 * step, std::numeric_limits<int>::max(), top);
  std::size_t fine_count = 0;
  for (double lo : fine.brackets_lo)
    if (lo < top) ++fine_count;
  if (fine_count != roots.size()) {
    double bad_lo = start, bad_hi = top;
    for (std::size_t i = 0; i < std::min(fine_count, roots.size()); ++i) {
      if (!(fine.brackets_lo[i] <= roots[i] && roots[i] <= fine.brackets_hi[i])) {
        bad_lo = i == 0 ? start : roots[i - 1];
        bad_hi = roots[i];
        break;
      }
    }
    throw RootScanError("radial_roots: sign-change scan missed roots for m=" + std::to_string(m),
                        bad_lo, bad_hi);
  }
  return roots;
}

double radial_function(int m, double k, double r) {
  const auto a = specfun::bessel_jy(m, k);
  const auto [j, y] = specfun::bessel_j_y(m, k * r);
  return j * a.dy - y * a.dj;
}

double radial_derivative(int m, double k, double r) {
  const auto a = specfun::bessel_jy(m, k);
  const auto b = specfun::bessel_jy(m, k * r);
  return k * (b.dj * a.dy - b.dy * a.dj);
}

int default_quadrature_order(const AnnulusGeometry& g, int n_max, double k_top) {
  const int oscillations = static_cast<int>(std::ceil(k_top * g.width() / pi));
  return std::max(64, 4 * std::max(n_max, oscillations));
}

VectorXr sample_radial(const BasisMode& mode, const VectorXr& r) {
  const auto a = specfun::bessel_jy(mode.m, mode.k);
  VectorXr out(r.size());
  for (Eigen::Index q = 0; q < r.size(); ++q) {
    const auto [j, y] = specfun::bessel_j_y(mode.m, mode.k * r[q]);
    out[q] = mode.norm_const * (j * a.dy - y * a.dj);
  }
  return out;
}

}  // namespace annulus

namespace {

double angular_norm(int m) { return m == 0 ? 2.0 * pi : pi; }

struct RadialFamily {
  std::vector<double> k;
  std::vector<double> norm;
};

RadialFamily radial_family(const AnnulusGeometry& g, int m, const BasisTruncation& t) {
  RadialFamily fam;
  fam.k = annulus::radial_roots(g, m, t.n_max, t.k_max);
  const double k_top = fam.k.empty() ? 1.0 : fam.k.back();
  const auto rule = specfun::gauss_legendre(
      annulus::default_quadrature_order(g, static_cast<int>(fam.k.size()), k_top));
  const auto [r, w] = rule.mapped(g.r_inner, g.r_outer);
  fam.norm.reserve(fam.k.size());
  for (double k : fam.k) {
    BasisMode probe{m, Parity::even, 1, k, k * k, 1.0};
    const VectorXr f = annulus::sample_radial(probe, r);
    const double mass = (f.array().square() * r.array() * w.array()).sum();
    fam.norm.push_back(1.0 / std::sqrt(mass * angular_norm(m)));
  }
  return fam;
}

}  // namespace

Basis build_basis(const AnnulusGeometry& g, const BasisTruncation& t) {
  if (t.m_max < 0 || t.n_max < 1) throw PreconditionError("build_basis: invalid truncation");
  std::vector<RadialFamily> families(static_cast<std::size_t>(t.m_max) + 1);

  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(t.m_max + 1)));
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int m = static_cast<int>(w); m <= t.m_max; m += static_cast<int>(workers))
            families[m] = radial_family(g, m, t);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Basis basis{g, t, {}};
  for (Parity p : {Parity::even, Parity::odd}) {
    for (int m = (p == Parity::even ? 0 : 1); m <= t.m_max; ++m) {
      const auto& fam = families[m];
      for (std::size_t n = 0; n < fam.k.size(); ++n)
        basis.modes.push_back(
            {m, p, static_cast<int>(n) + 1, fam.k[n], fam.k[n] * fam.k[n], fam.norm[n]});
    }
  }
  return basis;
}

double evaluate_mode(const AnnulusGeometry& g, const BasisMode& mode, double r, double theta) {
  if (!(r >= g.r_inner && r <= g.r_outer))
    throw DomainError("evaluate_mode: r outside the annulus");
  const double ang = mode.parity == Parity::even ? std::cos(mode.m * theta)
                                                 : std::sin(mode.m * theta);
  return mode.norm_const * annulus::radial_function(mode.m, mode.k, r) * ang;
}

double mode_inner_product(const AnnulusGeometry& g, const BasisMode& a, const BasisMode& b,
                          int quadrature_order) {
  if (a.m != b.m || a.parity != b.parity) return 0.0;
  const auto rule = specfun::gauss_legendre(quadrature_order);
  const auto [r, w] = rule.mapped(g.r_inner, g.r_outer);
  const VectorXr fa = annulus::sample_radial(a, r);
  const VectorXr fb = annulus::sample_radial(b, r);
  return angular_norm(a.m) * (fa.array() * fb.array() * r.array() * w.array()).sum();
}

namespace basis_cache {

using nlohmann::json;

std::string serialize(const Basis& basis) {
  json modes = json::array();
  for (const auto& m : basis.modes)
    modes.push_back({{"m", m.m},
                     {"parity", to_string(m.parity)},
                     {"n", m.n},
                     {"k", m.k},
                     {"lambda", m.lambda},
                     {"norm_const", m.norm_const}});
  json doc = {{"schema", kSchema},
              {"r_outer", basis.geometry.r_outer},
              {"m_max", basis.truncation.m_max},
              {"n_max", basis.truncation.n_max},
              {"modes", std::move(modes)}};
  doc["k_max"] = basis.truncation.has_k_cut() ? json(basis.truncation.k_max) : json(nullptr);
  return doc.dump(1);
}

Basis deserialize(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("schema", "") != kSchema)
    throw PreconditionError("basis cache: unexpected schema tag");
  BasisTruncation t{doc.at("m_max").get<int>(), doc.at("n_max").get<int>()};
  if (doc.contains("k_max") && !doc["k_max"].is_null()) t.k_max = doc["k_max"].get<double>();
  Basis basis{AnnulusGeometry(doc.at("r_outer").get<double>()), t, {}};
  for (const auto& m : doc.at("modes")) {
    const std::string parity = m.at("parity").get<std::string>();
    if (parity != "even" && parity != "odd")
      throw PreconditionError("basis cache: bad parity tag '" + parity + "'");
    basis.modes.push_back({m.at("m").get<int>(), parity == "even" ? Parity::even : Parity::odd,
                           m.at("n").get<int>(), m.at("k").get<double>(),
                           m.at("lambda").get<double>(), m.at("norm_const").get<double>()});
  }
  return basis;
}

std::filesystem::path file_for(const std::filesystem::path& dir, double r_outer,
                               const BasisTruncation& t) {
  std::ostringstream name;
  name.imbue(std::locale::classic());
  name.precision(17);
  name << "basis_R" << r_outer << "_m" << t.m_max << "_n" << t.n_max;
  if (t.has_k_cut()) name << "_k" << t.k_max;
  name << ".json";
  return dir / name.str();
}

Basis load_or_build(const std::filesystem::path& dir, const AnnulusGeometry& g,
                    const BasisTruncation& t) {
  if (dir.empty()) return build_basis(g, t);
  const auto path = file_for(dir, g.r_outer, t);
  if (std::ifstream in{path}) {
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      Basis cached = deserialize(buf.str());
      if (cached.geometry.r_outer == g.r_outer && cached.truncation.m_max == t.m_max &&
          cached.truncation.n_max == t.n_max &&
          (cached.truncation.has_k_cut() == t.has_k_cut()) &&
          (!t.has_k_cut() || cached.truncation.k_max == t.k_max))
        return cached;
    } catch (const std::exception&) {
      // fall through and rebuild a corrupt or stale entry
    }
  }
  Basis basis = build_basis(g, t);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out{tmp};
    out << serialize(basis);
  }
  std::filesystem::rename(tmp, path, ec);
  return basis;
}

}  // namespace basis_cache

}  // namespace btspec
