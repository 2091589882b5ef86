#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rpde/config.hpp"
#include "rpde/semigroup.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

std::string cli() {
  const char* p = std::getenv("RPDE_CLI");
  REQUIRE_MESSAGE(p != nullptr, "RPDE_CLI must point at the rpde binary");
  return p;
}

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + cli() + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.output += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("rpde_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

using Ini = std::map<std::string, std::map<std::string, std::string>>;

Ini base() {
  return {
      {"noise", {{"kind", "fbm"}, {"hurst", "0.5"}, {"modes", "4"}, {"seed", "1"}, {"level", "6"}}},
      {"operator", {{"modes", "8"}}},
      {"kernel", {{"profile", "sin"}}},
      {"exponents", {{"alpha", "0.45"}, {"beta", "0.34"}}},
      {"solve", {{"xi", "1"}}},
      {"converge", {{"levels", "2, 3, 4, 5"}}},
      {"output", {{"dir", (scratch() / "from_config").string()}}},
  };
}

std::string write_ini(const Ini& ini, const std::string& name) {
  const fs::path p = scratch() / (name + ".ini");
  std::ofstream f(p);
  for (const auto& [sec, kv] : ini) {
    f << '[' << sec << "]\n";
    for (const auto& [k, v] : kv) f << k << " = " << v << '\n';
  }
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string out_dir(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("invalid configurations exit 2 and name the constraint") {
  struct Case {
    std::string section, key, value, needle;
  };
  const std::vector<Case> cases = {
      {"noise", "hurst", "0.3", "1/3 < H <= 1/2"},
      {"noise", "hurst", "0.6", "1/3 < H <= 1/2"},
      {"noise", "modes", "0", "1 <= m <= 8"},
      {"noise", "level", "1", "2 <= level <= 12"},
      {"noise", "level", "13", "2 <= level <= 12"},
      {"operator", "modes", "9", "1 <= M <= 8"},
      {"exponents", "beta", "0.3", "beta > 1/3"},
      {"exponents", "alpha", "0.55", "alpha <= 1/2"},
      {"exponents", "beta", "0.46", "beta < alpha"},
      {"solve", "lambda_star", "1.5", "0 < lambda_star < 1"},
      {"solve", "tolerance", "0", "tolerance > 0"},
      {"kernel", "nodes", "40", "P multiple of 16"},
  };
  int i = 0;
  for (const Case& c : cases) {
    Ini ini = base();
    ini[c.section][c.key] = c.value;
    const Run r = run("check --config " + write_ini(ini, "bad" + std::to_string(i++)));
    CAPTURE(c.key);
    CAPTURE(r.output);
    CHECK(r.code == 2);
    CHECK(r.output.find(c.needle) != std::string::npos);
  }

  Ini hurst = base();
  hurst["noise"]["hurst"] = "0.4";
  const Run ah = run("check --config " + write_ini(hurst, "alpha_h"));
  CHECK(ah.code == 2);
  CHECK(ah.output.find("alpha < H") != std::string::npos);

  Ini unknown = base();
  unknown["noise"]["bogus"] = "1";
  const Run u = run("check --config " + write_ini(unknown, "unknown"));
  CHECK(u.code == 2);
  CHECK(u.output.find("bogus") != std::string::npos);

  CHECK(run("check --config " + (scratch() / "missing.ini").string()).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("").code == 2);
}

TEST_CASE("check passes on the default configuration") {
  const std::string cfg = write_ini(base(), "default");
  const Run r = run("check --config " + cfg + " --out " + out_dir("check_a"));
  CAPTURE(r.output);
  CHECK(r.code == 0);
  int passes = 0;
  std::istringstream lines(r.output);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("pass ", 0) == 0) ++passes;
    CHECK(line.rfind("FAIL ", 0) != 0);
  }
  CHECK(passes >= 20);
  CHECK(fs::exists(fs::path(out_dir("check_a")) / "check.json"));

  // reruns are byte-identical
  CHECK(run("check --config " + cfg + " --out " + out_dir("check_b")).code == 0);
  CHECK(slurp(fs::path(out_dir("check_a")) / "check.json") == slurp(fs::path(out_dir("check_b")) / "check.json"));
}

TEST_CASE("solve is deterministic and the zero profile gives the flow") {
  const std::string cfg = write_ini(base(), "solve");
  REQUIRE(run("solve --config " + cfg + " --out " + out_dir("solve_a")).code == 0);
  REQUIRE(run("solve --config " + cfg + " --out " + out_dir("solve_b")).code == 0);
  for (const char* f : {"solve.json", "solution.csv"})
    CHECK(slurp(fs::path(out_dir("solve_a")) / f) == slurp(fs::path(out_dir("solve_b")) / f));

  Ini zero = base();
  zero["kernel"]["profile"] = "zero";
  const std::string zcfg = write_ini(zero, "zero");
  REQUIRE(run("solve --config " + zcfg + " --out " + out_dir("solve_zero")).code == 0);
  const rpde::RunConfig rc = rpde::load_config(zcfg);
  const rpde::SpectralOperator op = rc.spectral_operator();
  const Eigen::VectorXd xi = rc.initial_value();
  std::istringstream csv(slurp(fs::path(out_dir("solve_zero")) / "solution.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  double worst = 0.0;
  while (std::getline(csv, line)) {
    std::vector<double> v;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) v.push_back(std::stod(cell));
    REQUIRE(v.size() == std::size_t(2 + op.modes()));
    const Eigen::VectorXd flow = op.apply_S(v[1], xi);
    for (int j = 0; j < op.modes(); ++j) worst = std::max(worst, std::abs(v[2 + j] - flow(j)));
    ++rows;
  }
  CHECK(rows == 65);
  CHECK(worst <= 1e-12);
}

TEST_CASE("converge on sine noise is monotone") {
  Ini ini = base();
  ini["noise"]["kind"] = "sine";
  ini["noise"]["modes"] = "2";
  ini["noise"]["level"] = "8";
  ini["converge"]["levels"] = "3, 4, 5, 6, 7, 8";
  ini["converge"]["reference_level"] = "12";
  const Run r = run("converge --config " + write_ini(ini, "sine") + " --out " + out_dir("converge"));
  CAPTURE(r.output);
  CHECK(r.code == 0);
  CHECK(slurp(fs::path(out_dir("converge")) / "converge.json").find("\"monotone_error\": true") != std::string::npos);
}

TEST_CASE("remaining subcommands and exit codes") {
  const std::string cfg = write_ini(base(), "subs");
  CHECK(run("sample --config " + cfg + " --out " + out_dir("sample")).code == 0);
  CHECK(fs::exists(fs::path(out_dir("sample")) / "noise.csv"));
  CHECK(run("lift --config " + cfg + " --out " + out_dir("lift")).code == 0);
  CHECK(fs::exists(fs::path(out_dir("lift")) / "lift_second.csv"));
  CHECK(run("shift --config " + cfg + " --out " + out_dir("shift")).code == 0);
  CHECK(slurp(fs::path(out_dir("shift")) / "shift.json").find("\"status\": \"pass\"") != std::string::npos);

  // violent noise still converges on the shortest horizon, but with a factor
  // above lambda_star: a check failure
  Ini wild = base();
  wild["noise"]["lift_scale"] = "1000";
  const Run w = run("solve --config " + write_ini(wild, "wild") + " --out " + out_dir("wild"));
  CAPTURE(w.output);
  CHECK(w.code == 1);

  // a contraction bound no horizon meets halves down to four steps and aborts
  Ini strict = base();
  strict["solve"]["lambda_star"] = "0.001";
  const Run st = run("solve --config " + write_ini(strict, "strict") + " --out " + out_dir("strict"));
  CAPTURE(st.output);
  CHECK(st.code == 3);
  CHECK(st.output.find("numerical abort") != std::string::npos);
}

TEST_CASE("output directory precedence: --out over RPDE_OUT over the config") {
  const std::string cfg = write_ini(base(), "prec");
  fs::remove_all(scratch() / "from_config");
  CHECK(run("sample --config " + cfg).code == 0);
  CHECK(fs::exists(scratch() / "from_config" / "noise.csv"));

  CHECK(run("sample --config " + cfg, "RPDE_OUT=" + out_dir("from_env")).code == 0);
  CHECK(fs::exists(fs::path(out_dir("from_env")) / "noise.csv"));

  CHECK(run("sample --config " + cfg + " --out " + out_dir("from_flag"), "RPDE_OUT=" + out_dir("env_unused")).code == 0);
  CHECK(fs::exists(fs::path(out_dir("from_flag")) / "noise.csv"));
  CHECK_FALSE(fs::exists(fs::path(out_dir("env_unused"))));
}
