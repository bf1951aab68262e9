#include "squeeze_lab/cli.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "squeeze_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = squeeze::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("squeeze_lab_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 64", "[cli]") {
  CHECK(run_cli({}).code == 64);
  CHECK(run_cli({"nonsense"}).code == 64);
  CHECK(run_cli({"linear", "--tol", "-1"}).code == 64);
  CHECK(run_cli({"linear", "--dim", "5"}).code == 64);
  CHECK(run_cli({"linear", "--k", "9"}).code == 64);
  CHECK(run_cli({"linear", "--format", "xml"}).code == 64);
  CHECK(run_cli({"linear", "--trials", "abc"}).code == 64);
  CHECK(run_cli({"linear", "--bogus-flag"}).code == 64);
  CHECK(run_cli({"squeeze", "--eps", "0.5"}).code == 64);
  CHECK(run_cli({"estimate", "--samples", "10"}).code == 64);
  CHECK(run_cli({"estimate", "--map", "torus"}).code == 64);
  CHECK(run_cli({"linear", "--config", "/nonexistent/file.conf"}).code == 64);
  const Run r = run_cli({"linear", "--tol", "-1"});
  CHECK(r.err.find("--tol") != std::string::npos);
}

TEST_CASE("help exits with 0", "[cli]") {
  const Run r = run_cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("wirtinger") != std::string::npos);
}

TEST_CASE("zero trials is a valid empty run", "[cli]") {
  const Run r = run_cli({"linear", "--trials", "0"});
  CHECK(r.code == 0);
  CHECK(r.out == "trial,seed,volume_ratio,pullback_residual,equality_flag\n");
}

TEST_CASE("linear and wirtinger pass on small runs", "[cli]") {
  CHECK(run_cli({"linear", "--trials", "50", "--dim", "4", "--k", "1"}).code == 0);
  CHECK(run_cli({"linear", "--trials", "20", "--unitary"}).code == 0);
  CHECK(run_cli({"wirtinger", "--trials", "50"}).code == 0);
}

TEST_CASE("violations exit with 2 and print witness seeds", "[cli]") {
  // a coarse grid cannot meet a 1e-9 relative tolerance
  const Run r = run_cli({"estimate", "--map", "identity", "--samples", "10000", "--cells", "8", "--tol", "1e-9"});
  CHECK(r.code == 2);
  CHECK(r.err.find("witnesses") != std::string::npos);
}

TEST_CASE("numerical failures exit with 70", "[cli]") {
  const Run r = run_cli({"linear", "--trials", "1", "--scale", "60"});
  CHECK(r.code == 70);
  CHECK(r.err.find("numerical failure") != std::string::npos);
}

TEST_CASE("CSV output uses 17 significant digits", "[cli]") {
  const Run r = run_cli({"linear", "--trials", "3"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  // trial, seed, ratio, ...
  const auto first = row.find(',');
  const auto second = row.find(',', first + 1);
  const auto third = row.find(',', second + 1);
  const std::string ratio = row.substr(second + 1, third - second - 1);
  CHECK(std::stod(ratio) > 1.0);
  CHECK(ratio.size() >= 17);
}

TEST_CASE("JSON output keeps a stable key order", "[cli]") {
  const Run r = run_cli({"linear", "--trials", "2", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto parsed = squeeze::report::Json::parse(r.out);
  REQUIRE(parsed.size() == 2);
  std::vector<std::string> keys;
  for (const auto& item : parsed[0].items()) keys.push_back(item.key());
  CHECK(keys == std::vector<std::string>{"trial", "seed", "volume_ratio", "pullback_residual", "equality_flag"});
}

TEST_CASE("output directory holds the table, artifacts and summary", "[cli]") {
  const fs::path dir = scratch_dir("rho");
  const Run r = run_cli({"rho", "--out", dir.string(), "--samples", "20000"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "rho.csv"));
  CHECK(fs::exists(dir / "rho_j2.csv"));
  CHECK(fs::exists(dir / "rho_j2.svg"));
  CHECK(fs::exists(dir / "rho_summary.json"));
  const auto summary = squeeze::report::Json::parse(slurp(dir / "rho_summary.json"));
  CHECK(summary["status"] == "pass");
  CHECK(summary["config"]["samples"] == 20000);
  CHECK(slurp(dir / "rho_j2.svg").find("<!-- generated") != std::string::npos);

  const Run quiet = run_cli({"rho", "--out", dir.string(), "--samples", "20000", "--no-timestamp"});
  REQUIRE(quiet.code == 0);
  CHECK(slurp(dir / "rho_j2.svg").find("<!-- generated") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("runs with the same seed are byte-identical", "[cli]") {
  const std::vector<std::vector<std::string>> commands = {
      {"linear", "--trials", "100"},
      {"wirtinger", "--trials", "100"},
      {"squeeze", "--trials", "2000", "--samples", "20000"},
      {"rho", "--samples", "20000"},
      {"frobenius", "--trials", "50", "--cells", "4"},
      {"estimate", "--map", "guth", "--samples", "20000"},
  };
  for (const auto& cmd : commands) {
    const fs::path a = scratch_dir(cmd[0] + "_a"), b = scratch_dir(cmd[0] + "_b");
    auto with_out = [&](const fs::path& dir) {
      auto args = cmd;
      args.insert(args.end(), {"--out", dir.string(), "--no-timestamp", "--seed", "123"});
      return run_cli(args);
    };
    const Run ra = with_out(a), rb = with_out(b);
    INFO(cmd[0]);
    CHECK(ra.code == 0);
    CHECK(ra.out == rb.out);
    for (const auto& entry : fs::directory_iterator(a)) {
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("config file values apply and flags override them", "[cli]") {
  const fs::path dir = scratch_dir("config");
  fs::create_directories(dir);
  {
    std::ofstream conf(dir / "run.conf");
    conf << "# comment\ntrials = 4\ndim=4\nk = 1\nformat = json\n";
  }
  const Run from_file = run_cli({"linear", "--config", (dir / "run.conf").string()});
  REQUIRE(from_file.code == 0);
  CHECK(squeeze::report::Json::parse(from_file.out).size() == 4);

  const Run overridden = run_cli({"linear", "--config", (dir / "run.conf").string(), "--trials", "2"});
  REQUIRE(overridden.code == 0);
  CHECK(squeeze::report::Json::parse(overridden.out).size() == 2);

  const Run before = run_cli({"linear", "--trials", "3", "--config", (dir / "run.conf").string()});
  REQUIRE(before.code == 0);
  CHECK(squeeze::report::Json::parse(before.out).size() == 3);

  {
    std::ofstream conf(dir / "bad.conf");
    conf << "trials\n";
  }
  CHECK(run_cli({"linear", "--config", (dir / "bad.conf").string()}).code == 64);
  fs::remove_all(dir);
}

TEST_CASE("thread count does not change results", "[cli]") {
  const auto run_with = [](const char* threads) {
    setenv("SQUEEZE_LAB_THREADS", threads, 1);
    const Run r = run_cli({"linear", "--trials", "64"});
    unsetenv("SQUEEZE_LAB_THREADS");
    return r.out;
  };
  CHECK(run_with("1") == run_with("4"));
  CHECK(squeeze::worker_count() >= 1);
}

TEST_CASE("wirtinger command examples", "[cli]") {
  CHECK(run_cli({"wirtinger", "--trials", "200", "--dim", "8", "--k", "2"}).code == 0);
  CHECK(run_cli({"wirtinger", "--trials", "0"}).code == 0);
  CHECK(run_cli({"wirtinger", "--dim", "4", "--k", "3"}).code == 64);
}

TEST_CASE("squeeze command examples", "[cli]") {
  CHECK(run_cli({"squeeze", "--trials", "5000", "--samples", "20000"}).code == 0);
  CHECK(run_cli({"squeeze", "--radius", "2", "--eps", "0.5", "--trials", "1000", "--samples", "0"}).code == 0);
  CHECK(run_cli({"squeeze", "--k", "3"}).code == 64);
  CHECK(run_cli({"squeeze", "--scale-radius", "0"}).code == 64);
}

TEST_CASE("rho command examples", "[cli]") {
  const Run r = run_cli({"rho", "--samples", "20000"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("r,j2_closed_form,j2_singular_values,abs_diff\n", 0) == 0);
  CHECK(run_cli({"rho", "--samples", "0", "--trials", "11"}).code == 0);
  CHECK(run_cli({"rho", "--trials", "1"}).code == 64);
}

TEST_CASE("frobenius command examples", "[cli]") {
  const fs::path dir = scratch_dir("frobenius");
  CHECK(run_cli({"frobenius", "--trials", "100", "--cells", "5", "--out", dir.string()}).code == 0);
  const std::string heat = slurp(dir / "frobenius_residual.csv");
  CHECK(heat.rfind("q1,p2,residual\n", 0) == 0);
  CHECK(std::count(heat.begin(), heat.end(), '\n') == 1 + 25);
  CHECK(run_cli({"frobenius", "--cells", "1"}).code == 64);
  CHECK(run_cli({"frobenius", "--tol", "0"}).code == 64);
  fs::remove_all(dir);
}

TEST_CASE("estimate command examples", "[cli]") {
  CHECK(run_cli({"estimate", "--map", "identity", "--samples", "20000"}).code == 0);
  CHECK(run_cli({"estimate", "--map", "linear", "--dim", "6", "--k", "2", "--samples", "20000", "--cells", "24"}).code ==
        0);
  CHECK(run_cli({"estimate", "--mode", "calibrate", "--trials", "2", "--samples", "20000"}).code == 0);
  CHECK(run_cli({"estimate", "--map", "rho", "--samples", "20000"}).code == 0);
  CHECK(run_cli({"estimate", "--mode", "sideways"}).code == 64);
  CHECK(run_cli({"estimate", "--map", "linear", "--k", "3"}).code == 64);
}
