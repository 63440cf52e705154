#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "btspec/asymptotics.hpp"
#include "btspec/model1d.hpp"
#include "btspec/protocol.hpp"
#include "btspec/specfun.hpp"

namespace btspec::cli {

using json = nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace

std::string format_shortest(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  std::string s(buf, res.ptr);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_complex(double re, double im, int digits) {
  std::string imag = format_fixed(im, digits);
  if (imag.front() != '-') imag.insert(0, "+");
  return format_fixed(re, digits) + imag + "i";
}

namespace {

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json truncation_json(const BasisTruncation& t) {
  return {{"m_max", t.m_max},
          {"n_max", t.n_max},
          {"k_max", t.has_k_cut() ? json(t.k_max) : json(nullptr)}};
}

// ---------------------------------------------------------------------------
// configuration

struct Global {
  std::string config_path;
  std::string cache_dir;
  std::string out;
  std::string format = "json";
  json file;  // parsed --config contents
};

// Flags beat the config file, which beats the built-in default. The file may
// hold top-level keys and a section per command; the section wins.
template <typename T>
void resolve(const CLI::App& app, const Global& g, const std::string& command,
             const std::string& key, T& value) {
  const std::string flag = "--" + key;
  if (app.get_option(flag)->count() > 0) return;
  const std::string json_key = [&] {
    std::string k = key;
    for (auto& c : k)
      if (c == '-') c = '_';
    return k;
  }();
  auto take = [&](const json& obj) {
    if (obj.is_object() && obj.contains(json_key)) {
      try {
        value = obj.at(json_key).get<T>();
      } catch (const json::exception& e) {
        throw UsageError("config key '" + json_key + "': " + e.what());
      }
      return true;
    }
    return false;
  };
  if (g.file.is_object() && g.file.contains(command) && take(g.file.at(command))) return;
  take(g.file);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

std::filesystem::path cache_dir(const Global& g) {
  if (!g.cache_dir.empty()) return g.cache_dir;
  if (const char* env = std::getenv("BTSPEC_CACHE"); env && *env) return env;
  return ".btspec-cache";
}

Parity parse_parity(const std::string& s) {
  if (s == "even" || s == "cos") return Parity::even;
  if (s == "odd" || s == "sin") return Parity::odd;
  throw UsageError("unknown sector '" + s + "' (expected even or odd)");
}

struct SpectrumParams {
  double h = 0.008;
  double r_outer = 2.0;
  int m_max = 0, n_max = 0;
  double k_max = 0.0;
  double growth = 1.25;
  double tolerance = 1e-5;
  double window = 0.0;
  int dense_limit = 4500;
  std::vector<std::string> sectors{"even", "odd"};

  void add(CLI::App& app) {
    app.add_option("--h", h, "semiclassical parameter");
    app.add_option("--r-outer", r_outer, "outer radius R > 1");
    app.add_option("--m-max", m_max, "base angular cap (0: from h)");
    app.add_option("--n-max", n_max, "base radial cap (0: from h)");
    app.add_option("--k-max", k_max, "base energy cut (0: from h)");
    app.add_option("--growth", growth, "truncation growth factor of the convergence check");
    app.add_option("--tolerance", tolerance, "eigenvalue movement accepted as converged");
    app.add_option("--window", window, "largest real part examined (0: from h)");
    app.add_option("--dense-limit", dense_limit, "largest sector solved densely");
    app.add_option("--sectors", sectors, "parity sectors: even, odd");
  }

  void resolve_all(const CLI::App& app, const Global& g, const std::string& cmd) {
    resolve(app, g, cmd, "h", h);
    resolve(app, g, cmd, "r-outer", r_outer);
    resolve(app, g, cmd, "m-max", m_max);
    resolve(app, g, cmd, "n-max", n_max);
    resolve(app, g, cmd, "k-max", k_max);
    resolve(app, g, cmd, "growth", growth);
    resolve(app, g, cmd, "tolerance", tolerance);
    resolve(app, g, cmd, "window", window);
    resolve(app, g, cmd, "dense-limit", dense_limit);
    resolve(app, g, cmd, "sectors", sectors);
  }

  void validate() const {
    require(h > 0.0 && std::isfinite(h), "h must be positive");
    require(r_outer > 1.0 && std::isfinite(r_outer), "r-outer must exceed 1");
    require(m_max >= 0 && n_max >= 0 && k_max >= 0.0, "truncation parameters must be >= 0");
    require(growth > 1.0, "growth must exceed 1");
    require(tolerance > 0.0, "tolerance must be positive");
    require(window >= 0.0, "window must be >= 0");
    require(dense_limit >= 16, "dense-limit must be >= 16");
    require(!sectors.empty(), "at least one sector is required");
    for (const auto& s : sectors) parse_parity(s);
  }

  BasisTruncation truncation(double r) const {
    BasisTruncation t = protocol::default_truncation(h, r);
    if (k_max > 0.0) t.k_max = k_max;
    if (m_max > 0) t.m_max = m_max;
    if (n_max > 0) t.n_max = n_max;
    return t;
  }

  protocol::Options options(const Global& g, double r) const {
    protocol::Options o;
    o.sectors.clear();
    for (const auto& s : sectors) o.sectors.push_back(parse_parity(s));
    o.base = truncation(r);
    o.growth = growth;
    o.tolerance = tolerance;
    o.re_window = window;
    o.dense_limit = dense_limit;
    o.cache_dir = cache_dir(g);
    return o;
  }

  json to_json() const {
    return {{"h", h},         {"r_outer", r_outer},     {"m_max", m_max},
            {"n_max", n_max}, {"k_max", k_max},         {"growth", growth},
            {"tolerance", tolerance}, {"window", window}, {"dense_limit", dense_limit},
            {"sectors", sectors}};
  }
};

json record_json(const protocol::Record& r) {
  json sectors = json::array();
  for (const auto& s : r.sectors)
    sectors.push_back({{"parity", to_string(s.parity)},
                       {"survey_k_max", s.survey_k_max},
                       {"window", s.window},
                       {"survey_size", s.survey_size},
                       {"base_size", s.base_size},
                       {"raised_size", s.raised_size},
                       {"candidates", s.candidates},
                       {"converged", s.converged},
                       {"duplicates", s.duplicates}});
  return {{"base", truncation_json(r.base)},
          {"raised", truncation_json(r.raised)},
          {"growth", r.growth},
          {"tolerance", r.tolerance},
          {"re_window", r.re_window},
          {"dense_limit", r.dense_limit},
          {"sectors", sectors}};
}

// ---------------------------------------------------------------------------
// output

struct Output {
  json result;          // for --format json
  std::string csv;      // for --format csv; empty if unsupported
};

json envelope(const std::string& command, const Global& g, json config, json result) {
  config["format"] = g.format;
  config["cache_dir"] = cache_dir(g).string();
  return {{"schema", kSchema}, {"command", command}, {"config", config}, {"result", result}};
}

void emit(const Global& g, const std::string& text, std::ostream& out) {
  if (g.out.empty() || g.out == "-") {
    out << text;
    return;
  }
  const std::filesystem::path path(g.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string tmp = g.out + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw UsageError("cannot write " + g.out);
    f << text;
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// commands

Output cmd_spectrum(const SpectrumParams& p, const Global& g) {
  protocol::Options opt = p.options(g, p.r_outer);
  opt.want_vectors = true;
  const AnnulusGeometry geom(p.r_outer);
  const auto s = protocol::compute_spectrum(p.h, geom, opt);
  const auto cands = asymptotics::candidates(p.h, p.r_outer, 3, 8);
  const auto matches = asymptotics::match_spectrum(s.spectrum, p.h, cands);
  const auto loc = asymptotics::localize(s.spectrum, s.raised_basis, p.h);

  // odd-index labels for the cos sector
  std::vector<int> table_index(s.spectrum.size(), 0);
  int next = 1;
  for (std::size_t i = 0; i < s.spectrum.size(); ++i)
    if (s.spectrum.sector[i] == Parity::even && s.spectrum.eigenvalues[i].imag() > 0.0) {
      table_index[i] = next;
      next += 2;
    }

  json eig = json::array();
  std::ostringstream csv;
  csv << "index,re,im,sector,table_index,residual,movement,label,inner_mass,outer_mass,branch\n";
  for (std::size_t i = 0; i < s.spectrum.size(); ++i) {
    const Complex z = s.spectrum.eigenvalues[i];
    json e = {{"re", z.real()},
              {"im", z.imag()},
              {"sector", to_string(s.spectrum.sector[i])},
              {"residual", s.spectrum.residuals[i]},
              {"movement", s.movement[i]},
              {"base", complex_json(s.base_value[i])},
              {"label", asymptotics::to_string(loc[i].label)},
              {"inner_mass", loc[i].inner_mass},
              {"outer_mass", loc[i].outer_mass},
              {"table_index", table_index[i] > 0 ? json(table_index[i]) : json(nullptr)}};
    std::string branch;
    if (const auto c = matches.candidate_for(i)) {
      const auto& a = cands[*c];
      branch = std::string(asymptotics::to_string(a.boundary)) + "(" + std::to_string(a.n) + "," +
               std::to_string(a.k) + ")" + (a.conjugate ? "*" : "");
      e["branch"] = {{"boundary", asymptotics::to_string(a.boundary)},
                     {"n", a.n},
                     {"k", a.k},
                     {"conjugate", a.conjugate},
                     {"approx", complex_json(a.value)},
                     {"distance", std::abs(z - a.value)}};
    } else {
      e["branch"] = nullptr;
    }
    eig.push_back(e);
    csv << i << ',' << format_shortest(z.real()) << ',' << format_shortest(z.imag()) << ','
        << to_string(s.spectrum.sector[i]) << ','
        << (table_index[i] > 0 ? std::to_string(table_index[i]) : "") << ','
        << format_shortest(s.spectrum.residuals[i]) << ',' << format_shortest(s.movement[i]) << ','
        << asymptotics::to_string(loc[i].label) << ',' << format_shortest(loc[i].inner_mass) << ','
        << format_shortest(loc[i].outer_mass) << ',' << branch << '\n';
  }
  json realized = json::array();
  for (const auto& r : matches.realized) {
    const auto& a = cands[r.candidate_index];
    realized.push_back({{"boundary", asymptotics::to_string(a.boundary)},
                        {"n", a.n},
                        {"k", a.k},
                        {"conjugate", a.conjugate},
                        {"value", complex_json(a.value)},
                        {"realized_even", r.even},
                        {"realized_odd", r.odd}});
  }
  json result = {{"eigenvalues", eig},
                 {"protocol", record_json(s.record)},
                 {"matching", {{"tau", matches.tau},
                               {"unmatched_eigenvalues", matches.unmatched_eigenvalues.size()},
                               {"branches", realized}}}};
  return {envelope("spectrum", g, p.to_json(), result), csv.str()};
}

struct TableRow {
  const char* label;
  bool computed;  // else asymptotic
  int index;      // odd index for computed rows
  asymptotics::Boundary boundary;
  int n, k;
};

constexpr TableRow kTableRows[] = {
    {"lambda_1", true, 1, asymptotics::Boundary::inner_neumann, 0, 0},
    {"lambda_app_N(1,1)", false, 0, asymptotics::Boundary::inner_neumann, 1, 1},
    {"lambda_3", true, 3, asymptotics::Boundary::inner_neumann, 0, 0},
    {"lambda_app_N(1,3)", false, 0, asymptotics::Boundary::inner_neumann, 1, 3},
    {"lambda_5", true, 5, asymptotics::Boundary::inner_neumann, 0, 0},
    {"lambda_app_D(1,1)", false, 0, asymptotics::Boundary::outer_dirichlet, 1, 1},
    {"lambda_7", true, 7, asymptotics::Boundary::inner_neumann, 0, 0},
    {"lambda_app_N(1,5)", false, 0, asymptotics::Boundary::inner_neumann, 1, 5},
    {"lambda_9", true, 9, asymptotics::Boundary::inner_neumann, 0, 0},
    {"lambda_app_D(1,3)", false, 0, asymptotics::Boundary::outer_dirichlet, 1, 3},
};

Output cmd_table1(SpectrumParams p, const std::vector<double>& radii, const Global& g) {
  std::vector<std::vector<Complex>> columns;
  json per_r = json::array();
  for (double r : radii) {
    const auto s = protocol::compute_spectrum(p.h, AnnulusGeometry(r), p.options(g, r));
    const auto computed = protocol::odd_index_eigenvalues(s, 5);
    std::vector<Complex> col;
    json cells = json::object();
    for (const auto& row : kTableRows) {
      const Complex v = row.computed ? computed[static_cast<std::size_t>(row.index / 2)]
                                     : asymptotics::lambda_app(row.boundary, row.n, row.k, p.h, r);
      col.push_back(v);
      cells[row.label] = complex_json(v);
    }
    columns.push_back(col);
    per_r.push_back({{"r_outer", r}, {"values", cells}, {"protocol", record_json(s.record)}});
  }
  std::ostringstream csv;
  csv << "quantity";
  for (double r : radii) csv << ",R=" << format_shortest(r);
  csv << '\n';
  for (std::size_t i = 0; i < std::size(kTableRows); ++i) {
    csv << kTableRows[i].label;
    for (const auto& col : columns) csv << ',' << format_complex(col[i].real(), col[i].imag(), 4);
    csv << '\n';
  }
  json config = p.to_json();
  config.erase("r_outer");
  config["radii"] = radii;
  return {envelope("table1", g, config, {{"columns", per_r}}), csv.str()};
}

struct MarginPoint {
  double h;
  Complex lambda1;
};

// Least-squares slope of log y against log x.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Output cmd_margin_scan(SpectrumParams p, const std::vector<double>& hs, const Global& g) {
  for (std::size_t i = 1; i < hs.size(); ++i)
    require(hs[i] < hs[i - 1], "h-list must be strictly decreasing");
  for (double h : hs) require(h > 0.0, "h-list entries must be positive");
  const double model = model1d::left_margin(model1d::BoundaryCondition::neumann, 1.0);
  std::vector<double> re;
  json rows = json::array();
  std::ostringstream csv;
  csv << "h,re_lambda_1,re_lambda_1_over_h23,model_constant\n";
  for (double h : hs) {
    SpectrumParams q = p;
    q.h = h;
    const auto s = protocol::compute_spectrum(h, AnnulusGeometry(p.r_outer), q.options(g, p.r_outer));
    if (s.spectrum.size() == 0) throw NumericError("margin-scan: no converged eigenvalue at h=" + format_shortest(h));
    const Complex l1 = s.spectrum.eigenvalues.front();
    const double scaled = l1.real() / std::cbrt(h * h);
    re.push_back(l1.real());
    rows.push_back({{"h", h},
                    {"lambda_1", complex_json(l1)},
                    {"sector", to_string(s.spectrum.sector.front())},
                    {"re_lambda_1_over_h23", scaled},
                    {"protocol", record_json(s.record)}});
    csv << format_shortest(h) << ',' << format_shortest(l1.real()) << ',' << format_shortest(scaled)
        << ',' << format_shortest(model) << '\n';
  }
  const auto slope = loglog_slope(hs, re);
  csv << "slope," << (slope ? format_shortest(*slope) : "") << ",,\n";
  json config = p.to_json();
  config.erase("h");
  config["h_list"] = hs;
  json result = {{"points", rows},
                 {"model_constant", model},
                 {"slope", slope ? json(*slope) : json(nullptr)}};
  return {envelope("margin-scan", g, config, result), csv.str()};
}

struct ResolventParams {
  double epsilon = 0.5;
  double re_min = NAN, re_max = NAN, im_min = 0.8, im_max = 1.2;
  int n_re = 7, n_im = 9;
};

Output cmd_resolvent(const SpectrumParams& p, ResolventParams rp, const Global& g) {
  require(rp.epsilon < 1.0, "epsilon must be < 1: the region Re z <= (1 - epsilon) Lambda h^{2/3} is empty");
  require(rp.epsilon > 0.0, "epsilon must be positive");
  require(rp.n_re >= 1 && rp.n_im >= 1, "grid counts must be >= 1");
  const double h23 = std::cbrt(p.h * p.h);
  const double lambda = model1d::left_margin(model1d::BoundaryCondition::neumann, 1.0);
  const double edge = (1.0 - rp.epsilon) * lambda * h23;
  if (std::isnan(rp.re_min)) rp.re_min = -lambda * h23;
  if (std::isnan(rp.re_max)) rp.re_max = edge;
  require(rp.re_min <= rp.re_max && rp.im_min <= rp.im_max, "grid bounds are inverted");
  require(rp.re_min <= edge, "no grid node lies in the region Re z <= (1 - epsilon) Lambda h^{2/3}");
  const ComplexGrid grid{rp.re_min, rp.re_max, rp.im_min, rp.im_max, rp.n_re, rp.n_im};

  const AnnulusGeometry geom(p.r_outer);
  const BasisTruncation t = p.truncation(p.r_outer);
  const Basis basis = basis_cache::load_or_build(cache_dir(g), geom, t);
  std::vector<double> smin(grid.size(), std::numeric_limits<double>::infinity());
  std::vector<Complex> z;
  for (const auto& s : p.sectors) {
    const auto sector = galerkin::assemble_sparse(p.h, basis, parse_parity(s));
    const auto r = smin_grid(sector.matrix, grid);
    z = r.z;
    for (std::size_t i = 0; i < smin.size(); ++i) smin[i] = std::min(smin[i], r.smin[i]);
  }
  std::ostringstream csv;
  csv << "re,im,smin,h23_over_smin\n";
  json nodes = json::array();
  double worst = 0.0;
  std::size_t in_region = 0;
  for (std::size_t i = 0; i < smin.size(); ++i) {
    const double scaled = smin[i] > 0.0 ? h23 / smin[i] : std::numeric_limits<double>::infinity();
    if (z[i].real() <= edge + 1e-15) {
      ++in_region;
      worst = std::max(worst, scaled);
    }
    nodes.push_back({{"re", z[i].real()}, {"im", z[i].imag()}, {"smin", smin[i]}, {"h23_over_smin", scaled}});
    csv << format_shortest(z[i].real()) << ',' << format_shortest(z[i].imag()) << ','
        << format_shortest(smin[i]) << ',' << format_shortest(scaled) << '\n';
  }
  require(in_region > 0, "no grid node lies in the region Re z <= (1 - epsilon) Lambda h^{2/3}");
  csv << "max_in_region,," << ',' << format_shortest(worst) << '\n';
  json config = p.to_json();
  config["epsilon"] = rp.epsilon;
  config["grid"] = {{"re_min", rp.re_min}, {"re_max", rp.re_max}, {"im_min", rp.im_min},
                    {"im_max", rp.im_max}, {"n_re", rp.n_re},     {"n_im", rp.n_im}};
  json result = {{"nodes", nodes},
                 {"region_re_max", edge},
                 {"nodes_in_region", in_region},
                 {"max_h23_over_smin", worst},
                 {"truncation", truncation_json(t)}};
  return {envelope("resolvent", g, config, result), csv.str()};
}

json convergence_json(const model1d::ConvergenceRecord& c) {
  return {{"L", c.L},
          {"N", c.N},
          {"L_converged", c.L_converged},
          {"N_converged", c.N_converged},
          {"L_movement", c.L_movement},
          {"N_movement", c.N_movement}};
}

std::string eigen_csv(const std::vector<Complex>& ev) {
  std::ostringstream csv;
  csv << "index,re,im\n";
  for (std::size_t i = 0; i < ev.size(); ++i)
    csv << i + 1 << ',' << format_shortest(ev[i].real()) << ',' << format_shortest(ev[i].imag()) << '\n';
  return csv.str();
}

Output cmd_airy(const std::string& bc, double j, double L, int N, int n_report, const Global& g) {
  require(bc == "D" || bc == "N", "bc must be D or N");
  require(j > 0.0, "j must be positive");
  require(L >= 0.0, "L must be >= 0");
  require(N == 0 || N >= 16, "N must be 0 or >= 16");
  require(n_report >= 1 && n_report <= 20, "n-report must be in [1, 20]");
  model1d::HalfLineAiryProblem prob;
  prob.bc = bc == "D" ? model1d::BoundaryCondition::dirichlet : model1d::BoundaryCondition::neumann;
  prob.j = j;
  prob.L = L;
  prob.N = N;
  prob.n_report = n_report;
  const auto r = model1d::halfline_airy_spectrum(prob);
  json ev = json::array();
  for (Complex z : r.eigenvalues) ev.push_back(complex_json(z));
  json result = {{"eigenvalues", ev},
                 {"lambda_sharp", r.lambda_sharp},
                 {"scaling_defect", r.scaling_defect},
                 {"left_margin", model1d::left_margin(prob.bc, j)},
                 {"convergence", convergence_json(r.convergence)}};
  json config = {{"bc", bc}, {"j", j}, {"L", L}, {"N", N}, {"n_report", n_report}};
  return {envelope("airy", g, config, result), eigen_csv(r.eigenvalues)};
}

Output cmd_oscillator(double a, double L, int N, int n_report, const Global& g) {
  require(a > 0.0, "a must be positive");
  require(L >= 0.0, "L must be >= 0");
  require(N == 0 || N >= 16, "N must be 0 or >= 16");
  require(n_report >= 1, "n-report must be >= 1");
  const auto r = model1d::rotated_oscillator_spectrum(a, L, N, n_report);
  json ev = json::array();
  for (Complex z : r.eigenvalues) ev.push_back(complex_json(z));
  json result = {{"eigenvalues", ev}, {"convergence", convergence_json(r.convergence)}};
  json config = {{"a", a}, {"L", L}, {"N", N}, {"n_report", n_report}};
  return {envelope("oscillator", g, config, result), eigen_csv(r.eigenvalues)};
}

Output cmd_basis(const SpectrumParams& p, const Global& g) {
  const AnnulusGeometry geom(p.r_outer);
  const BasisTruncation base = p.truncation(p.r_outer);
  json built = json::array();
  std::ostringstream csv;
  csv << "level,m_max,n_max,k_max,modes,file\n";
  for (const auto& [level, t] : {std::pair{"base", base}, std::pair{"raised", base.scaled(p.growth)}}) {
    const Basis b = basis_cache::load_or_build(cache_dir(g), geom, t);
    const auto file = basis_cache::file_for(cache_dir(g), p.r_outer, t).string();
    built.push_back({{"level", level}, {"truncation", truncation_json(t)}, {"modes", b.size()}, {"file", file}});
    csv << level << ',' << t.m_max << ',' << t.n_max << ',' << format_shortest(t.k_max) << ','
        << b.size() << ',' << file << '\n';
  }
  return {envelope("basis", g, p.to_json(), {{"bases", built}}), csv.str()};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectra of -h^2 Laplacian + i x_1 on an annulus and its model operators", "btspec"};
  app.set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config_path, "JSON file with default parameters");
  app.add_option("--cache-dir", g.cache_dir, "basis cache directory (env BTSPEC_CACHE)");
  app.add_option("--out", g.out, "output file (default: stdout)");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  SpectrumParams sp_spectrum, sp_table, sp_margin, sp_resolvent, sp_basis;
  auto* spectrum = app.add_subcommand("spectrum", "converged eigenvalues with branch labels");
  sp_spectrum.add(*spectrum);

  auto* table1 = app.add_subcommand("table1", "tabulate odd-indexed eigenvalues against approximations");
  sp_table.sectors = {"even"};
  sp_table.add(*table1);
  std::vector<double> radii{1.5, 2.0, 3.0};
  table1->add_option("--radii", radii, "outer radii");

  auto* margin = app.add_subcommand("margin-scan", "leftmost real part against h");
  sp_margin.add(*margin);
  std::vector<double> h_list{0.032, 0.016, 0.008, 0.004};
  margin->add_option("--h-list", h_list, "decreasing list of h");

  auto* resolvent = app.add_subcommand("resolvent", "smallest singular values of A - z on a grid");
  sp_resolvent.add(*resolvent);
  ResolventParams rp;
  resolvent->add_option("--epsilon", rp.epsilon, "region Re z <= (1 - epsilon) Lambda h^{2/3}");
  resolvent->add_option("--re-min", rp.re_min);
  resolvent->add_option("--re-max", rp.re_max);
  resolvent->add_option("--im-min", rp.im_min);
  resolvent->add_option("--im-max", rp.im_max);
  resolvent->add_option("--n-re", rp.n_re);
  resolvent->add_option("--n-im", rp.n_im);

  auto* airy = app.add_subcommand("airy", "complex Airy operator on the half-line");
  std::string bc = "D";
  double j = 1.0, airy_L = 0.0;
  int airy_N = 0, airy_n = 3;
  airy->add_option("--bc", bc, "D or N");
  airy->add_option("--j", j, "slope");
  airy->add_option("--L", airy_L, "domain length (0: automatic)");
  airy->add_option("--N", airy_N, "coarsest mesh (0: automatic)");
  airy->add_option("--n-report", airy_n, "eigenvalues reported");

  auto* osc = app.add_subcommand("oscillator", "rotated harmonic oscillator");
  double a = 1.0, osc_L = 0.0;
  int osc_N = 0, osc_n = 4;
  osc->add_option("--a", a, "coefficient of i x^2");
  osc->add_option("--L", osc_L, "half-width (0: automatic)");
  osc->add_option("--N", osc_N, "coarsest mesh (0: automatic)");
  osc->add_option("--n-report", osc_n, "eigenvalues reported");

  auto* basis = app.add_subcommand("basis", "prebuild the base and raised bases into the cache");
  sp_basis.add(*basis);

  std::vector<std::string> argv_store{"btspec"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kSuccess;
    } catch (const CLI::ParseError& e) {
      err << "usage error: " << e.what() << '\n';
      return kUsageError;
    }

    if (!g.config_path.empty()) {
      std::ifstream f(g.config_path);
      if (!f) throw UsageError("cannot read config file " + g.config_path);
      try {
        f >> g.file;
      } catch (const json::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
      }
    }
    resolve(app, g, "", "cache-dir", g.cache_dir);
    resolve(app, g, "", "format", g.format);
    require(g.format == "json" || g.format == "csv", "format must be json or csv");

    Output o;
    if (spectrum->parsed()) {
      sp_spectrum.resolve_all(*spectrum, g, "spectrum");
      sp_spectrum.validate();
      o = cmd_spectrum(sp_spectrum, g);
    } else if (table1->parsed()) {
      sp_table.resolve_all(*table1, g, "table1");
      resolve(*table1, g, "table1", "radii", radii);
      sp_table.validate();
      require(!radii.empty(), "radii must not be empty");
      for (double r : radii) require(r > 1.0, "radii must exceed 1");
      o = cmd_table1(sp_table, radii, g);
    } else if (margin->parsed()) {
      sp_margin.resolve_all(*margin, g, "margin-scan");
      resolve(*margin, g, "margin-scan", "h-list", h_list);
      sp_margin.validate();
      require(!h_list.empty(), "h-list must not be empty");
      o = cmd_margin_scan(sp_margin, h_list, g);
    } else if (resolvent->parsed()) {
      sp_resolvent.resolve_all(*resolvent, g, "resolvent");
      resolve(*resolvent, g, "resolvent", "epsilon", rp.epsilon);
      resolve(*resolvent, g, "resolvent", "re-min", rp.re_min);
      resolve(*resolvent, g, "resolvent", "re-max", rp.re_max);
      resolve(*resolvent, g, "resolvent", "im-min", rp.im_min);
      resolve(*resolvent, g, "resolvent", "im-max", rp.im_max);
      resolve(*resolvent, g, "resolvent", "n-re", rp.n_re);
      resolve(*resolvent, g, "resolvent", "n-im", rp.n_im);
      sp_resolvent.validate();
      o = cmd_resolvent(sp_resolvent, rp, g);
    } else if (airy->parsed()) {
      resolve(*airy, g, "airy", "bc", bc);
      resolve(*airy, g, "airy", "j", j);
      resolve(*airy, g, "airy", "L", airy_L);
      resolve(*airy, g, "airy", "N", airy_N);
      resolve(*airy, g, "airy", "n-report", airy_n);
      o = cmd_airy(bc, j, airy_L, airy_N, airy_n, g);
    } else if (osc->parsed()) {
      resolve(*osc, g, "oscillator", "a", a);
      resolve(*osc, g, "oscillator", "L", osc_L);
      resolve(*osc, g, "oscillator", "N", osc_N);
      resolve(*osc, g, "oscillator", "n-report", osc_n);
      o = cmd_oscillator(a, osc_L, osc_N, osc_n, g);
    } else if (basis->parsed()) {
      sp_basis.resolve_all(*basis, g, "basis");
      sp_basis.validate();
      o = cmd_basis(sp_basis, g);
    }
    emit(g, g.format == "csv" ? o.csv : o.result.dump(2) + "\n", out);
    return kSuccess;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const PreconditionError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace btspec::cli
