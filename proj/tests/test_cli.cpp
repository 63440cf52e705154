#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace btspec::cli;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

const std::filesystem::path kGolden = BTSPEC_GOLDEN_DIR;

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("number formatting") {
  CHECK(format_fixed(-0.00001, 4) == "0.0000");
  CHECK(format_fixed(0.02505, 4) == "0.0250");  // binary value lies below the midpoint
  CHECK(format_fixed(-1.25, 1) == "-1.2");
  CHECK(format_complex(0.0250081, 1.0317531, 4) == "0.0250+1.0318i");
  CHECK(format_complex(0.1, -2.0, 2) == "0.10-2.00i");
  CHECK(format_complex(0.1, -0.00001, 2) == "0.10+0.00i");
  CHECK(format_shortest(0.1) == "0.1");
  CHECK(format_shortest(1e-300) == "1e-300");
}

TEST_CASE("exit codes") {
  CHECK(run_cli({}).code == kUsageError);
  CHECK(run_cli({"nonsense"}).code == kUsageError);
  CHECK(run_cli({"--help"}).code == kSuccess);
  CHECK(run_cli({"spectrum", "--h", "-0.1"}).code == kUsageError);
  CHECK(run_cli({"spectrum", "--r-outer", "1"}).code == kUsageError);
  CHECK(run_cli({"spectrum", "--h", "abc"}).code == kUsageError);
  CHECK(run_cli({"spectrum", "--sectors", "up"}).code == kUsageError);
  CHECK(run_cli({"--format", "xml", "airy"}).code == kUsageError);
  CHECK(run_cli({"airy", "--bc", "R"}).code == kUsageError);
  CHECK(run_cli({"airy", "--n-report", "0"}).code == kUsageError);
  CHECK(run_cli({"oscillator", "--a", "0"}).code == kUsageError);
  CHECK(run_cli({"resolvent", "--epsilon", "1"}).code == kUsageError);
  CHECK(run_cli({"resolvent", "--epsilon", "0.5", "--re-min", "1", "--re-max", "2"}).code == kUsageError);
  CHECK(run_cli({"margin-scan", "--h-list", "0.01", "0.02"}).code == kUsageError);
  CHECK(run_cli({"--config", "/nonexistent/btspec.json", "airy"}).code == kUsageError);
  // a mesh too coarse to resolve any eigenvalue fails numerically, not as usage
  CHECK(run_cli({"airy", "--L", "0.5", "--N", "16"}).code == kNumericFailure);
}

TEST_CASE("airy output is deterministic and matches the golden file") {
  const auto a = run_cli({"--format", "csv", "airy", "--bc", "D"});
  const auto b = run_cli({"--format", "csv", "airy", "--bc", "D"});
  REQUIRE(a.code == kSuccess);
  CHECK(a.out == b.out);
  CHECK(a.out == slurp(kGolden / "airy_D.csv"));

  const auto j = run_cli({"airy", "--bc", "N", "--j", "8", "--n-report", "1"});
  REQUIRE(j.code == kSuccess);
  const json doc = json::parse(j.out);
  CHECK(doc["schema"] == kSchema);
  CHECK(doc["command"] == "airy");
  CHECK(doc["config"]["j"] == 8.0);
  CHECK(doc["config"]["format"] == "json");
  CHECK(doc["result"]["lambda_sharp"].get<double>() == doctest::Approx(4 * 0.509396).epsilon(1e-6));
  CHECK(doc["result"]["convergence"]["N_converged"] == true);
}

TEST_CASE("oscillator leading eigenvalue") {
  const auto r = run_cli({"oscillator"});
  REQUIRE(r.code == kSuccess);
  const json doc = json::parse(r.out);
  CHECK(doc["result"]["eigenvalues"][0]["re"].get<double>() == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(doc["result"]["eigenvalues"][0]["im"].get<double>() == doctest::Approx(0.70711).epsilon(1e-5));
}

TEST_CASE("config precedence and output files") {
  const auto dir = std::filesystem::temp_directory_path() / "btspec-cli-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"format": "json", "j": 2.0, "airy": {"bc": "N", "n_report": 2}})";
  }
  const auto cfg = (dir / "cfg.json").string();
  const auto from_file = run_cli({"--config", cfg, "airy"});
  REQUIRE(from_file.code == kSuccess);
  const json a = json::parse(from_file.out);
  CHECK(a["config"]["bc"] == "N");
  CHECK(a["config"]["j"] == 2.0);
  CHECK(a["result"]["eigenvalues"].size() == 2);

  const auto flagged = run_cli({"--config", cfg, "airy", "--j", "1", "--n-report", "1"});
  const json b = json::parse(flagged.out);
  CHECK(b["config"]["j"] == 1.0);
  CHECK(b["config"]["bc"] == "N");
  CHECK(b["result"]["eigenvalues"].size() == 1);

  const auto out = dir / "sub" / "osc.csv";
  const auto written = run_cli({"--format", "csv", "--out", out.string(), "oscillator", "--a", "4"});
  REQUIRE(written.code == kSuccess);
  CHECK(written.out.empty());
  const std::string text = slurp(out);
  CHECK(text.rfind("index,re,im\n1,", 0) == 0);

  {
    std::ofstream f(dir / "bad.json");
    f << R"({"j": "two"})";
  }
  CHECK(run_cli({"--config", (dir / "bad.json").string(), "airy"}).code == kUsageError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("spectrum and table at coarse h") {
  const auto dir = std::filesystem::temp_directory_path() / "btspec-cli-cache";
  const auto s = run_cli({"--cache-dir", dir.string(), "spectrum", "--h", "0.03", "--r-outer", "1.5"});
  REQUIRE(s.code == kSuccess);
  const json doc = json::parse(s.out);
  const auto& ev = doc["result"]["eigenvalues"];
  REQUIRE(ev.size() >= 4);
  CHECK(ev[1]["table_index"] == 1);
  CHECK(ev[1]["branch"]["boundary"] == "N");
  CHECK(ev[1]["label"] == "inner");
  CHECK(doc["config"]["cache_dir"] == dir.string());

  const auto t = run_cli({"--cache-dir", dir.string(), "--format", "csv", "table1", "--h", "0.02",
                          "--radii", "1.5", "2"});
  REQUIRE(t.code == kSuccess);
  std::istringstream lines(t.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "quantity,R=1.5,R=2");
  std::getline(lines, line);
  CHECK(line == "lambda_1,0.0496+1.0566i,0.0496+1.0566i");
  int rows = 1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 10);
  CHECK(t.out.find("-0.0000") == std::string::npos);

  const auto b = run_cli({"--cache-dir", dir.string(), "--format", "csv", "basis", "--h", "0.03"});
  CHECK(b.code == kSuccess);
  CHECK(b.out.rfind("level,m_max,n_max,k_max,modes,file\nbase,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("resolvent summary") {
  const auto r = run_cli({"resolvent", "--h", "0.03", "--r-outer", "1.5", "--n-re", "2", "--n-im", "2"});
  REQUIRE(r.code == kSuccess);
  const json doc = json::parse(r.out);
  CHECK(doc["result"]["nodes_in_region"] == 4);
  CHECK(doc["result"]["max_h23_over_smin"].get<double>() > 0);
  CHECK(doc["config"]["epsilon"] == 0.5);
}

}
