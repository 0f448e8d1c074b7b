#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "spde/cli.hpp"
#include "spde/moments.hpp"

using namespace spde;
using Json = nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "spde-moments");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// y of the row with the given series and x (exact match on the grid value).
double row(const std::vector<cli::FigureRow>& rows, const std::string& series, double x) {
  for (const auto& r : rows)
    if (r.series == series && std::abs(r.x - x) < 1e-12) return r.y;
  return NAN;
}

// Data lines of a CSV body, header comments dropped.
std::vector<std::string> data_lines(const std::string& body) {
  std::vector<std::string> out;
  std::istringstream in(body);
  for (std::string l; std::getline(in, l);)
    if (!l.empty() && l[0] != '#') out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("check-dalang verdicts exit 0") {
  auto r = invoke({"check-dalang"});
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["dalang"] == true);
  CHECK(j["params"]["dim"] == 1);
  CHECK(j["inequality"].get<std::string>().find("dim <") == 0);
  auto s = invoke({"check-dalang", "--dim", "2"});
  CHECK(s.code == 0);
  CHECK(Json::parse(s.out)["dalang"] == false);
}

TEST_CASE("constants JSON and CSV") {
  auto r = invoke({"constants", "--beta", "2"});
  REQUIRE(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["theta"].get<double>() == 1.0);
  CHECK(j["big_theta"].get<double>() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(j.contains("lyapunov_base"));
  auto c = invoke({"constants", "--format", "csv"});
  CHECK(c.code == 0);
  CHECK(c.out.find("# alpha = 2\n") != std::string::npos);
  CHECK(c.out.find("\nkey,value\ntheta,-0.5\n") != std::string::npos);
}

TEST_CASE("every run echoes the resolved parameters") {
  auto r = invoke({"second-moment", "--nu", "2", "--t", "0.5", "--u0", "1.5"});
  REQUIRE(r.code == 0);
  for (const char* k : {"# command = second-moment", "# alpha = 2", "# beta = 1", "# gamma = 0", "# lambda = 1",
                        "# nu = 2", "# dim = 1", "# u0 = 1.5", "# u1 = 0", "# t = 0.5"})
    CHECK(r.out.find(k) != std::string::npos);
}

TEST_CASE("second-moment CSV matches the library to 17 digits") {
  auto r = invoke({"second-moment", "--t", "0.3,1"});
  REQUIRE(r.code == 0);
  const auto lines = data_lines(r.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "t,value,method");
  CHECK(lines[1] == "0.29999999999999999," + format_number(second_moment(ModelParams{}, 0.3)) + ",closed_form");
  auto grid = invoke({"second-moment", "--t-max", "2", "--points", "5"});
  CHECK(data_lines(grid.out).size() == 6);
}

TEST_CASE("volterra agrees with second-moment") {
  auto v = invoke({"volterra", "--t-max", "1", "--points", "4", "--beta", "0.8", "--gamma", "0.2"});
  REQUIRE(v.code == 0);
  const auto lines = data_lines(v.out);
  REQUIRE(lines.size() == 5);
  ModelParams p;
  p.beta = 0.8;
  p.gamma = 0.2;
  double t = 0.0, val = 0.0;
  char method[32];
  REQUIRE(std::sscanf(lines.back().c_str(), "%lf,%lf,%31s", &t, &val, method) == 3);
  CHECK(t == 1.0);
  CHECK(std::abs(val / second_moment(p, 1.0) - 1.0) < 1e-4);
  CHECK(std::string(method) == "volterra");
}

TEST_CASE("lyapunov and pth-bound") {
  auto r = invoke({"lyapunov", "--nu", "2"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["lyapunov"].get<double>() == doctest::Approx(0.125).epsilon(1e-10));
  auto p = invoke({"pth-bound", "--p", "3", "--t", "1"});
  REQUIRE(p.code == 0);
  auto j = Json::parse(p.out);
  CHECK(j["t_p"].get<double>() == doctest::Approx(27.0));
  CHECK(j["p_exponent"].get<double>() == doctest::Approx(3.0));
  CHECK(j["she_exact_lyapunov"].get<double>() == doctest::Approx(1.0));
  CHECK(j["she_exact_lyapunov"].get<double>() <= j["lyapunov_upper"].get<double>());
}

TEST_CASE("chaos and diagrams commands") {
  auto c = invoke({"chaos", "--t", "1", "--samples", "20000"});
  REQUIRE(c.code == 0);
  CHECK(data_lines(c.out).size() >= 5);
  auto d = invoke({"diagrams", "--partition", "2,2"});
  REQUIRE(d.code == 0);
  CHECK(d.out.find("# count = 2") != std::string::npos);
  auto b = invoke({"diagrams", "--p", "6", "--m", "7"});
  REQUIRE(b.code == 0);
  CHECK(b.out.find("\n2 2 3 2 2 3,36,true\n") != std::string::npos);
}

TEST_CASE("exit codes and error JSON") {
  auto v = invoke({"constants", "--alpha", "-1"});
  CHECK(v.code == 2);
  CHECK(Json::parse(v.err)["exit_code"] == 2);
  auto d = invoke({"constants", "--dim", "2"});
  CHECK(d.code == 2);
  CHECK(Json::parse(d.err)["error"] == "DalangViolated");
  auto s = invoke({"simulate", "--dt", "0.01", "--paths", "10"});
  CHECK(s.code == 4);
  CHECK(Json::parse(s.err)["error"] == "StabilityViolated");
  auto c = invoke({"volterra", "--t-max", "2", "--points", "3", "--min-steps", "2", "--rel-tol", "1e-12", "--beta", "0.8",
                "--gamma", "0.2"});
  CHECK(c.code == 3);
  CHECK(Json::parse(c.err)["error"] == "StepTooCoarse");
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"constants", "--format", "xml"}).code == 2);
  CHECK(invoke({"constants", "--alpha", "two"}).code == 2);
}

TEST_CASE("u1 with beta <= 1 is accepted and flagged on stderr") {
  auto r = invoke({"lyapunov", "--u1", "2"});
  CHECK(r.code == 0);
  CHECK(Json::parse(r.err)["warning"] == "u1_ignored");
  CHECK(invoke({"lyapunov", "--u1", "2", "--beta", "2"}).err.empty());
}

TEST_CASE("config file supplies parameters and flags override it") {
  const auto path = std::filesystem::temp_directory_path() / "spde_cli_test.kv";
  {
    std::ofstream f(path);
    f << "# SWE\nbeta = 2\nnu = 2\n";
  }
  auto r = invoke({"lyapunov", "--config", path.string()});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["params"]["beta"].get<double>() == 2.0);
  auto o = invoke({"lyapunov", "--config", path.string(), "--nu", "1"});
  CHECK(Json::parse(o.out)["lyapunov"].get<double>() == doctest::Approx(std::pow(2.0, -0.25)));
  std::filesystem::remove(path);
  CHECK(invoke({"lyapunov", "--config", path.string()}).code == 2);
}

TEST_CASE("outputs are byte-stable; simulate with a fixed seed too") {
  CHECK(invoke({"second-moment", "--t-max", "3"}).out == invoke({"second-moment", "--t-max", "3"}).out);
  const std::vector<std::string> sim{"simulate", "--paths", "200", "--dx", "0.05", "--dt", "0.001", "--t", "0.1,0.2",
                                     "--t-max", "0.2", "--seed", "9"};
  auto a = invoke(sim);
  REQUIRE(a.code == 0);
  auto th = sim;
  th.insert(th.end(), {"--threads", "3"});
  auto b = invoke(th);
  CHECK(data_lines(a.out) == data_lines(b.out));
  CHECK(invoke(sim).out == a.out);
}

TEST_CASE("simulate --out writes the CSV and a JSON sidecar") {
  const auto path = std::filesystem::temp_directory_path() / "spde_cli_sim.csv";
  auto r = invoke({"simulate", "--family", "swe", "--beta", "2", "--nu", "2", "--paths", "100", "--t", "0.5", "--out",
                path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream side(path.string() + ".json");
  REQUIRE(side.good());
  Json j;
  side >> j;
  CHECK(j["n_paths"] == 100);
  CHECK(j.contains("stderr"));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("figure sfhe: alpha = 2 values and the SFHE/SFWE crossing") {
  ModelParams base;
  const auto rows = cli::figure_data("sfhe", base);
  CHECK(row(rows, "sfhe_lyapunov", 2.0) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(row(rows, "sfwe_lyapunov", 2.0) == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-9));
  CHECK(row(rows, "sfhe_big_theta", 2.0) == doctest::Approx(1.0 / std::sqrt(4 * std::numbers::pi)).epsilon(1e-9));
  const auto x = cli::curve_crossing(rows, "sfhe_lyapunov", "sfwe_lyapunov");
  REQUIRE(x.has_value());
  CHECK(x->x >= 1.33);
  CHECK(x->x <= 1.36);
  CHECK(x->y >= 1.13);
  CHECK(x->y <= 1.17);
  auto r = invoke({"figures", "--family", "sfhe", "--alpha-grid", "1.05:5:0.05"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find(cli::figure_csv(rows)) != std::string::npos);
}

TEST_CASE("figure sheswe and tfspde data") {
  ModelParams base;
  const auto she = cli::figure_data("sheswe", base);
  CHECK(std::abs(row(she, "big_theta", 1.0) - 0.2820947916914828) < 1e-6);
  CHECK(std::abs(row(she, "big_theta", 0.5) - 0.07159409592967741) < 1e-3);
  base.nu = 2.0;
  const auto tf = cli::figure_data("tfspde", base);
  CHECK(row(tf, "lyapunov", 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-8));
  CHECK(row(tf, "lyapunov", 1.0) == doctest::Approx(0.125).epsilon(1e-8));
  CHECK_THROWS(cli::figure_data("nope", base));
}

TEST_CASE("curve_crossing interpolates the first sign change") {
  const std::vector<cli::FigureRow> rows{{0, 0, "a"}, {1, 2, "a"}, {2, 4, "a"}, {0, 1, "b"}, {1, 1, "b"}, {2, 1, "b"}};
  const auto c = cli::curve_crossing(rows, "a", "b");
  REQUIRE(c.has_value());
  CHECK(c->x == doctest::Approx(0.5));
  CHECK(c->y == doctest::Approx(1.0));
  CHECK_FALSE(cli::curve_crossing(rows, "a", "missing").has_value());
}
