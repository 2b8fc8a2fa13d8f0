#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adiabat/cli.hpp"
#include "adiabat/model.hpp"
#include "adiabat/spin_example.hpp"

using namespace adiabat;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv = {"adiabat"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("adiabat_test_" + tag);
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("spectrum: spin defaults succeed with the zero mode present") {
  TempDir dir("spectrum");
  CHECK(run({"spectrum", "--builtin", "spin", "--gamma", "0.5", "--omega", "0.1",
             "--theta", "0.7853981634", "--out", dir.str().c_str()}) == 0);
  const std::string csv = slurp(dir.path / "eigenvalues.csv");
  CHECK(csv.rfind("index,re,im,degenerate", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(fs::exists(dir.path / "biorth_residuals.json"));
  CHECK(fs::exists(dir.path / "meta.json"));
  CHECK(slurp(dir.path / "meta.json").find("\"tool_version\"") != std::string::npos);
}

TEST_CASE("spectrum: gamma = 0 aborts with the degeneracy exit code") {
  TempDir dir("spectrum0");
  CHECK(run({"spectrum", "--builtin", "spin", "--gamma", "0", "--out",
             dir.str().c_str()}) == 2);
}

TEST_CASE("missing model file maps to the I/O exit code") {
  TempDir dir("iofail");
  CHECK(run({"spectrum", "--model", "/nonexistent/model.json", "--out",
             dir.str().c_str()}) == 1);
}

TEST_CASE("model files loaded through the CLI reproduce the builtin") {
  TempDir dir("modelfile");
  fs::create_directories(dir.path);
  const fs::path model_path = dir.path / "spin.json";
  {
    std::ofstream out(model_path);
    out << model_to_json(spin_model({0.5, 0.1, 0.7853981633974483}));
  }
  TempDir out_a("modelfile_a"), out_b("modelfile_b");
  CHECK(run({"spectrum", "--model", model_path.string().c_str(), "--out",
             out_a.str().c_str()}) == 0);
  CHECK(run({"spectrum", "--builtin", "spin", "--gamma", "0.5", "--omega", "0.1",
             "--theta", "0.7853981633974483", "--out", out_b.str().c_str()}) == 0);
  CHECK(slurp(out_a.path / "eigenvalues.csv") == slurp(out_b.path / "eigenvalues.csv"));
}

TEST_CASE("sweep: deterministic byte-identical reruns, zero omega column") {
  TempDir a("sweep_a"), b("sweep_b");
  const char* grid_g = "0.2:2:4";
  const char* grid_w = "0:0.8:5";
  CHECK(run({"sweep", "--grid-gamma", grid_g, "--grid-omega", grid_w, "--out",
             a.str().c_str()}) == 0);
  CHECK(run({"sweep", "--grid-gamma", grid_g, "--grid-omega", grid_w, "--out",
             b.str().c_str()}) == 0);
  const std::string csv_a = slurp(a.path / "gamma_surface.csv");
  CHECK(csv_a == slurp(b.path / "gamma_surface.csv"));
  CHECK(csv_a.rfind("gamma,omega,Gamma,arg_m,arg_n,excluded", 0) == 0);
  CHECK(std::count(csv_a.begin(), csv_a.end(), '\n') == 21);

  std::istringstream lines(csv_a);
  std::string line;
  std::getline(lines, line);  // header
  int zero_rows = 0;
  while (std::getline(lines, line)) {
    if (line.find(",0,0,") != std::string::npos) ++zero_rows;
  }
  CHECK(zero_rows == 4);  // one omega = 0 row per gamma
}

TEST_CASE("sweep: bad grid spec fails cleanly") {
  TempDir dir("sweep_bad");
  CHECK(run({"sweep", "--grid-gamma", "nonsense", "--out", dir.str().c_str()}) == 1);
}

TEST_CASE("compare: keystone pair agrees below threshold in the report") {
  TempDir dir("compare");
  CHECK(run({"compare", "--gamma", "0.6", "--omega", "0.4", "--out",
             dir.str().c_str()}) == 0);
  const std::string report = slurp(dir.path / "report.json");
  const auto pos = report.find("max_trace_distance");
  REQUIRE(pos != std::string::npos);
  const double value = std::stod(report.substr(report.find(':', pos) + 1));
  CHECK(value <= 1e-8);
  CHECK(fs::exists(dir.path / "trajectories.csv"));
}

TEST_CASE("selftest: quick run exits clean, fault injection trips it") {
  TempDir a("selftest_ok"), b("selftest_bad");
  CHECK(run({"selftest", "--quick", "--out", a.str().c_str()}) == 0);
  CHECK(run({"selftest", "--quick", "--inject-fault", "--out", b.str().c_str()}) == 1);
  CHECK(slurp(b.path / "selftest_report.json").find("\"passed\": false") !=
        std::string::npos);
}

TEST_CASE("rotated: report carries the consistency metric") {
  TempDir dir("rotated");
  CHECK(run({"rotated", "--gamma", "0.5", "--omega", "0.2", "--grid-points", "801",
             "--out", dir.str().c_str()}) == 0);
  const std::string report = slurp(dir.path / "report.json");
  CHECK(report.find("consistency_max_trace_distance") != std::string::npos);
  CHECK(fs::exists(dir.path / "gamma_pairs.csv"));
}

TEST_CASE("spin: worked-example outputs") {
  TempDir dir("spin");
  CHECK(run({"spin", "--grid-gamma", "0.3:2:4", "--grid-omega", "0:0.6:4", "--out",
             dir.str().c_str()}) == 0);
  const std::string check = slurp(dir.path / "eigen_check.json");
  CHECK(check.find("matrix_vs_generic_max_abs") != std::string::npos);
  CHECK(fs::exists(dir.path / "gamma_surface.csv"));
}
