// End-to-end acceptance run. Prints one PASS/FAIL line per criterion followed
// by the measured quantities. Exit status is 0 once every criterion has been
// evaluated, whatever the verdicts; --strict makes any FAIL exit 1.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "btspec/asymptotics.hpp"
#include "btspec/model1d.hpp"
#include "btspec/protocol.hpp"
#include "btspec/specfun.hpp"
#include "oracles.hpp"

using namespace btspec;

namespace {

constexpr double kH = 0.008;
constexpr double kRadii[] = {1.5, 2.0, 3.0};

// Reference values at h = 0.008, four decimals; rows lambda_1..lambda_9, columns R.
constexpr double kTable[5][3][2] = {
    {{0.0250, 1.0318}, {0.0250, 1.0317}, {0.0251, 1.0315}},
    {{0.0409, 1.0160}, {0.0409, 1.0160}, {0.0410, 1.0158}},
    {{0.0501, 1.4157}, {0.0497, 1.9162}, {0.0498, 2.9161}},
    {{0.0567, 1.0003}, {0.0567, 1.0003}, {0.0560, 1.0000}},
    {{0.0635, 1.4026}, {0.0612, 1.9048}, {0.0593, 2.9065}},
};

struct GrayRow {
  asymptotics::Boundary boundary;
  int k;
  const char* text[3];
};

const GrayRow kGray[] = {
    {asymptotics::Boundary::inner_neumann, 1, {"0.0251+1.0317i", "0.0251+1.0317i", "0.0251+1.0317i"}},
    {asymptotics::Boundary::inner_neumann, 3, {"0.0411+1.0157i", "0.0411+1.0157i", "0.0411+1.0157i"}},
    {asymptotics::Boundary::outer_dirichlet, 1, {"0.0500+1.4157i", "0.0496+1.9162i", "0.0491+2.9167i"}},
    {asymptotics::Boundary::inner_neumann, 5, {"0.0571+0.9997i", "0.0571+0.9997i", "0.0571+0.9997i"}},
    {asymptotics::Boundary::outer_dirichlet, 3, {"0.0631+1.4027i", "0.0609+1.9049i", "0.0583+2.9075i"}},
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string cplx(Complex z, int digits = 6) {
  return fmt("%.*f%+.*fi", digits, z.real(), digits, z.imag());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> lines;
  void note(const std::string& s) { lines.push_back(s); }
  void require(bool ok, const std::string& s) {
    pass = pass && ok;
    lines.push_back((ok ? "  ok   " : "  FAIL ") + s);
  }
};

struct Context {
  std::filesystem::path cache;
  std::map<double, protocol::AnnulusSpectrum> h008;  // keyed by R, cos sector, with vectors
  std::map<double, double> h008_seconds;

  const protocol::AnnulusSpectrum& table_run(double R) {
    auto it = h008.find(R);
    if (it != h008.end()) return it->second;
    protocol::Options opt;
    opt.sectors = {Parity::even};
    opt.want_vectors = true;
    opt.cache_dir = cache;
    const auto t0 = std::chrono::steady_clock::now();
    auto s = protocol::compute_spectrum(kH, AnnulusGeometry(R), opt);
    h008_seconds[R] = seconds_since(t0);
    return h008.emplace(R, std::move(s)).first->second;
  }
};

Verdict table_reproduction(Context& ctx) {
  Verdict v;
  for (int c = 0; c < 3; ++c) {
    const double R = kRadii[c];
    const auto& s = ctx.table_run(R);
    const auto ev = protocol::odd_index_eigenvalues(s, 5);
    v.note(fmt("  R=%.1f: %.0f s, base k<=%.1f, raised k<=%.1f", R, ctx.h008_seconds[R],
               s.record.base.k_max, s.record.raised.k_max));
    for (int i = 0; i < 5; ++i) {
      const double dre = std::abs(ev[i].real() - kTable[i][c][0]);
      const double dim = std::abs(ev[i].imag() - kTable[i][c][1]);
      v.require(dre <= 2e-4 && dim <= 2e-4,
                fmt("R=%.1f lambda_%d = %s vs %.4f%+.4fi (|dRe| %.1e, |dIm| %.1e)", R, 2 * i + 1,
                    cplx(ev[i]).c_str(), kTable[i][c][0], kTable[i][c][1], dre, dim));
    }
    v.require(ctx.h008_seconds[R] <= 600.0, fmt("R=%.1f runtime %.0f s <= 600 s", R, ctx.h008_seconds[R]));
  }
  return v;
}

Verdict gray_rows(Context&) {
  Verdict v;
  for (const auto& row : kGray)
    for (int c = 0; c < 3; ++c) {
      const Complex z = asymptotics::lambda_app(row.boundary, 1, row.k, kH, kRadii[c]);
      const std::string got = fmt("%.4f%+.4fi", z.real(), z.imag());
      v.require(got == row.text[c], fmt("%s(1,%d) R=%.1f: %s vs %s", asymptotics::to_string(row.boundary),
                                        row.k, kRadii[c], got.c_str(), row.text[c]));
      if (row.boundary == asymptotics::Boundary::inner_neumann)
        v.require(z == asymptotics::lambda_app(row.boundary, 1, row.k, kH, kRadii[0]),
                  fmt("N(1,%d) at R=%.1f identical to R=1.5", row.k, kRadii[c]));
    }
  return v;
}

Verdict conjugation_trace(Context& ctx) {
  Verdict v;
  struct Case {
    double h, R, k_max;
  };
  for (const Case& c : {Case{0.03, 1.5, 40}, Case{0.02, 2.0, 40}, Case{0.008, 1.5, 50}, Case{0.008, 3.0, 35},
                        Case{0.05, 3.0, 30}}) {
    BasisTruncation t = protocol::default_truncation(c.h, c.R);
    t.k_max = c.k_max;
    t.m_max = static_cast<int>(std::ceil(c.k_max * c.R));
    const Basis basis = basis_cache::load_or_build(ctx.cache, AnnulusGeometry(c.R), t);
    const GalerkinSystem sys = galerkin::assemble(c.h, basis);
    const auto even = eig_dense(sys.sector_operator(Parity::even));
    const auto odd = eig_dense(sys.sector_operator(Parity::odd));
    Spectrum all;
    Complex sum = 0;
    for (const auto* s : {&even, &odd})
      for (Complex z : s->eigenvalues) {
        all.eigenvalues.push_back(z);
        sum += z;
      }
    const auto pairing = match_conjugates(all, 1e-6);
    double sum_k2 = 0;
    for (const auto& m : basis.modes) sum_k2 += m.lambda;
    const Complex trace = sys.trace();
    const double rel = std::abs(sum - trace) / std::abs(trace);
    v.require(pairing.unpaired.empty(), fmt("h=%.3f R=%.1f n=%zu: %zu unpaired under conjugation", c.h, c.R,
                                            basis.size(), pairing.unpaired.size()));
    v.require(rel < 1e-8 && std::abs(trace.real() - c.h * c.h * sum_k2) <= 1e-12 * trace.real() &&
                  trace.imag() == 0.0,
              fmt("h=%.3f R=%.1f: |sum lambda - h^2 sum k^2| / trace = %.1e", c.h, c.R, rel));
  }
  return v;
}

Verdict airy_model(Context&) {
  Verdict v;
  const Complex rot = std::polar(1.0, pi / 3);
  for (auto bc : {model1d::BoundaryCondition::dirichlet, model1d::BoundaryCondition::neumann}) {
    model1d::HalfLineAiryProblem p;
    p.bc = bc;
    const auto r = model1d::halfline_airy_spectrum(p);
    v.require(r.convergence.converged(), fmt("%s: L and N converged", model1d::to_string(bc)));
    for (int n = 1; n <= 3; ++n) {
      const double zero = bc == model1d::BoundaryCondition::dirichlet ? specfun::airy_zero(n)
                                                                       : specfun::airy_prime_zero(n);
      const double err = std::abs(r.eigenvalues.at(n - 1) - rot * zero);
      v.require(err < 1e-6, fmt("%s lambda_%d = %s, error %.1e", model1d::to_string(bc), n,
                                cplx(r.eigenvalues[n - 1], 9).c_str(), err));
    }
    for (double j : {0.5, 2.0, 4.0}) {
      p.j = j;
      const auto rj = model1d::halfline_airy_spectrum(p);
      v.require(rj.scaling_defect < 1e-6 && rj.convergence.converged(),
                fmt("%s j=%.1f dilation defect %.1e", model1d::to_string(bc), j, rj.scaling_defect));
    }
  }
  return v;
}

Verdict oscillator(Context&) {
  Verdict v;
  for (double a : {1.0, 4.0}) {
    const auto r = model1d::rotated_oscillator_spectrum(a);
    for (int n = 1; n <= 4; ++n) {
      const double err = std::abs(r.eigenvalues.at(n - 1) - std::polar(std::sqrt(a) * (2 * n - 1), pi / 4));
      v.require(err < 1e-4, fmt("a=%.0f lambda_%d error %.1e", a, n, err));
    }
  }
  return v;
}

Verdict left_margin(Context& ctx) {
  Verdict v;
  const double hs[] = {0.032, 0.016, 0.008, 0.004};
  const double limit = model1d::left_margin(model1d::BoundaryCondition::neumann, 1.0);
  std::vector<double> re;
  for (double h : hs) {
    Complex l1;
    if (h == kH) {
      l1 = ctx.table_run(2.0).spectrum.eigenvalues.front();
    } else {
      protocol::Options opt;
      opt.cache_dir = ctx.cache;
      // both sectors where cheap; below that the leftmost value is known to sit in the cos sector
      if (h < kH) opt.sectors = {Parity::even};
      const auto s = protocol::compute_spectrum(h, AnnulusGeometry(2.0), opt);
      l1 = s.spectrum.eigenvalues.front();
      if (opt.sectors.size() == 2)
        v.note(fmt("  h=%.3f leftmost eigenvalue lies in the %s sector", h, to_string(s.spectrum.sector.front())));
    }
    re.push_back(l1.real());
    const Complex app = asymptotics::lambda_app(asymptotics::Boundary::inner_neumann, 1, 1, h, 2.0);
    v.note(fmt("  h=%.3f lambda_1 = %s, Re/h^(2/3) = %.4f (%.1f%% above %.4f); formula gives %.4f", h,
               cplx(l1).c_str(), l1.real() / std::cbrt(h * h),
               100 * (l1.real() / std::cbrt(h * h) / limit - 1), limit, app.real() / std::cbrt(h * h)));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < re.size(); ++i) {
    const double x = std::log(hs[i]), y = std::log(re[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double n = static_cast<double>(re.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  v.require(slope >= 0.63 && slope <= 0.70, fmt("log-log slope %.4f in [0.63, 0.70]", slope));
  bool monotone = true;
  for (std::size_t i = 1; i < re.size(); ++i)
    monotone = monotone && re[i] / std::cbrt(hs[i] * hs[i]) < re[i - 1] / std::cbrt(hs[i - 1] * hs[i - 1]);
  v.require(monotone, "Re lambda_1 / h^(2/3) decreases as h decreases");
  const double last = re.back() / std::cbrt(hs[3] * hs[3]);
  v.require(std::abs(last / limit - 1) <= 0.15,
            fmt("at h=0.004 ratio %.4f within 15%% of %.4f (%.1f%%)", last, limit, 100 * (last / limit - 1)));
  return v;
}

Verdict resolvent(Context& ctx) {
  Verdict v;
  const double lambda = model1d::left_margin(model1d::BoundaryCondition::neumann, 1.0);
  std::vector<double> maxima;
  for (double h : {0.02, 0.01, 0.008}) {
    const double h23 = std::cbrt(h * h);
    const ComplexGrid grid{-lambda * h23, 0.5 * lambda * h23, 0.8, 1.2, 5, 9};
    const BasisTruncation t = protocol::default_truncation(h, 2.0);
    const Basis basis = basis_cache::load_or_build(ctx.cache, AnnulusGeometry(2.0), t);
    double worst = 0;
    for (Parity p : {Parity::even, Parity::odd}) {
      const auto sector = galerkin::assemble_sparse(h, basis, p);
      const auto g = smin_grid(sector.matrix, grid);
      for (double s : g.smin) worst = std::max(worst, h23 / s);
    }
    maxima.push_back(worst);
    v.note(fmt("  h=%.3f: max h^(2/3)/smin = %.4f over %zu nodes", h, worst, grid.size()));
  }
  const double spread = *std::max_element(maxima.begin(), maxima.end()) /
                        *std::min_element(maxima.begin(), maxima.end());
  v.require(spread < 3.0, fmt("max/min across h = %.3f < 3", spread));
  return v;
}

Verdict localization(Context& ctx) {
  Verdict v;
  struct Found {
    asymptotics::Boundary boundary;
    int n, k;
    Complex value;
  };
  std::map<double, std::vector<Found>> by_r;
  std::map<double, std::size_t> tau_changes;
  for (double R : kRadii) {
    const auto& s = ctx.table_run(R);
    const auto cands = asymptotics::candidates(kH, R, 3, 8);
    const auto m = asymptotics::match_spectrum(s.spectrum, kH, cands);
    const auto half = asymptotics::match_spectrum(s.spectrum, kH, cands, 0.5 * m.tau);
    const auto loc = asymptotics::localize(s.spectrum, s.raised_basis, kH);
    std::size_t inner = 0, outer = 0;
    for (const auto& match : m.matches) {
      const auto& c = cands[match.candidate_index];
      const auto& l = loc[match.eigen_index];
      const Complex z = s.spectrum.eigenvalues[match.eigen_index];
      if (c.boundary == asymptotics::Boundary::inner_neumann) {
        ++inner;
        v.require(l.label == asymptotics::Label::inner && l.inner_mass > 0.8,
                  fmt("R=%.1f %s ~ N(%d,%d)%s: %s, inner mass %.3f", R, cplx(z).c_str(), c.n, c.k,
                      c.conjugate ? "*" : "", asymptotics::to_string(l.label), l.inner_mass));
      } else {
        ++outer;
        v.require(l.label == asymptotics::Label::outer,
                  fmt("R=%.1f %s ~ D(%d,%d)%s: %s, outer mass %.3f", R, cplx(z).c_str(), c.n, c.k,
                      c.conjugate ? "*" : "", asymptotics::to_string(l.label), l.outer_mass));
      }
      if (!c.conjugate) by_r[R].push_back({c.boundary, c.n, c.k, z});
    }
    v.require(inner > 0 && outer > 0, fmt("R=%.1f: %zu inner and %zu outer matches, %zu unmatched", R, inner,
                                          outer, m.unmatched_eigenvalues.size()));
    std::size_t changed = 0;
    for (std::size_t i = 0; i < s.spectrum.size(); ++i)
      if (m.candidate_for(i) != half.candidate_for(i)) ++changed;
    v.note(fmt("  R=%.1f: halving tau changes %zu of %zu assignments", R, changed, m.matches.size()));
  }
  for (const auto& a : by_r[1.5])
    for (const auto& b : by_r[3.0]) {
      if (a.boundary != b.boundary || a.n != b.n || a.k != b.k) continue;
      if (a.boundary == asymptotics::Boundary::inner_neumann) {
        const double d = std::abs(a.value - b.value);
        v.require(d < 1e-3, fmt("N(%d,%d) moves %.1e between R=1.5 and R=3", a.n, a.k, d));
      } else {
        const double d = b.value.imag() - a.value.imag();
        v.require(std::abs(d - 1.5) <= 2e-2, fmt("D(%d,%d) Im shift %.4f vs 1.5", a.n, a.k, d));
      }
    }
  return v;
}

Verdict kernel_oracles(Context&) {
  Verdict v;
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> size(1, 8);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    MatrixXc a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    const auto roots = oracle::polynomial_roots(oracle::characteristic_polynomial(a));
    worst = std::max(worst, oracle::max_matching_distance(eig_dense(a).eigenvalues, roots) /
                                std::max(1.0, a.norm()));
  }
  v.require(worst < 1e-7, fmt("1000 random matrices: worst scaled root distance %.1e", worst));

  double quad = 0, wsum = 0;
  for (int order : {1, 2, 5, 16, 64, 256}) {
    const auto r = specfun::gauss_legendre(order);
    wsum = std::max(wsum, std::abs(r.weights.sum() - 2.0));
    for (int deg = 0; deg <= std::min(2 * order - 1, 128); ++deg) {
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      const double q = r.integrate([deg](double x) { return std::pow(x, deg); }, -1, 1);
      quad = std::max(quad, std::abs(q - exact) / std::max(exact, 1.0));
    }
  }
  v.require(wsum < 1e-13 && quad < 1e-12,
            fmt("Gauss-Legendre: weight-sum defect %.1e, monomial defect %.1e", wsum, quad));

  std::uniform_int_distribution<int> order(0, 200);
  std::uniform_real_distribution<double> arg(0.05, 300.0);
  double wr = 0;
  for (int tested = 0; tested < 1000;) {
    const int m = order(rng);
    const double x = arg(rng);
    specfun::BesselJY b;
    try {
      b = specfun::bessel_jy(m, x);
    } catch (const RangeError&) {
      continue;
    }
    const double expected = 2.0 / (pi * x);
    const double scale = std::max({expected, std::abs(b.j * b.dy), std::abs(b.dj * b.y)});
    wr = std::max(wr, std::abs(b.j * b.dy - b.dj * b.y - expected) / scale);
    ++tested;
  }
  v.require(wr < 1e-11, fmt("Bessel Wronskian at 1000 samples: worst relative defect %.1e", wr));

  const auto z = specfun::airy_zeros(20);
  double ai = 0, dai = 0;
  bool interlaced = true;
  for (int n = 0; n < 20; ++n) {
    ai = std::max(ai, std::abs(specfun::airy_ai(z.a[n]).ai));
    dai = std::max(dai, std::abs(specfun::airy_ai(z.a_prime[n]).dai));
    interlaced = interlaced && z.a_prime[n] > z.a[n] && (n == 19 || z.a[n] > z.a_prime[n + 1]);
  }
  v.require(ai < 1e-10 && dai < 1e-10 && interlaced,
            fmt("Airy zeros: |Ai(a_n)| <= %.1e, |Ai'(a'_n)| <= %.1e, interlacing %s", ai, dai,
                interlaced ? "holds" : "broken"));
  double ode = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = -12.0 + 0.2 * i + 0.013, d = 1e-4;
    const double second = (specfun::airy_ai(x + d).dai - specfun::airy_ai(x - d).dai) / (2 * d);
    ode = std::max(ode, std::abs(second - x * specfun::airy_ai(x).ai));
  }
  v.require(ode < 1e-6, fmt("Ai'' = x Ai by finite differences: worst defect %.1e", ode));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance run"};
  Context ctx;
  std::string cache = ".btspec-cache";
  std::set<int> only;
  bool strict = false;
  std::string report_path;
  app.add_option("--cache-dir", cache, "basis cache directory");
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_flag("--strict", strict, "exit 1 if any criterion fails");
  app.add_option("--report", report_path, "also write the report to this file");
  CLI11_PARSE(app, argc, argv);
  ctx.cache = cache;

  const std::vector<std::pair<const char*, std::function<Verdict(Context&)>>> criteria = {
      {"table reproduction at h=0.008", table_reproduction},
      {"asymptotic formula rows", gray_rows},
      {"conjugation closure and trace", conjugation_trace},
      {"complex Airy model", airy_model},
      {"rotated oscillator", oscillator},
      {"semiclassical left margin", left_margin},
      {"resolvent bound", resolvent},
      {"localization classification", localization},
      {"kernel oracles", kernel_oracles},
  };
  std::FILE* report = report_path.empty() ? nullptr : std::fopen(report_path.c_str(), "w");
  auto emit = [report](const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (report) {
      std::fprintf(report, "%s\n", line.c_str());
      std::fflush(report);
    }
  };
  int failed = 0, evaluated = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v.pass = false;
      v.note(std::string("  error: ") + e.what());
    }
    ++evaluated;
    failed += !v.pass;
    emit(fmt("%s criterion %d: %s (%.0f s)", v.pass ? "PASS" : "FAIL", id, criteria[i].first,
             seconds_since(t0)));
    for (const auto& l : v.lines) emit(l);
  }
  emit(fmt("%d of %d criteria passed", evaluated - failed, evaluated));
  if (report) std::fclose(report);
  return strict && failed ? 1 : 0;
}
