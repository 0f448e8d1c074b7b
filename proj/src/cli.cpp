#include "spde/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spde/diagrams.hpp"
#include "spde/errors.hpp"
#include "spde/moments.hpp"
#include "spde/simulate.hpp"

namespace spde::cli {
namespace {

using Json = nlohmann::ordered_json;

// Lookup with defaults; every resolved value is echoed into the header.
class Options {
 public:
  explicit Options(const std::map<std::string, std::string>& given) : given_(given) {}

  bool has(const std::string& k) const { return given_.count(k) > 0; }

  std::string str(const std::string& k, const std::string& def) {
    auto it = given_.find(k);
    const std::string v = it == given_.end() ? def : it->second;
    resolved_[k] = v;
    return v;
  }

  double num(const std::string& k, double def) { return parse_double(k, str(k, format_number(def))); }

  long long integer(const std::string& k, long long def) {
    const std::string v = str(k, std::to_string(def));
    std::size_t pos = 0;
    long long out = 0;
    try {
      out = std::stoll(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size() || v.empty()) throw DomainError("--" + k + " expects an integer, got '" + v + "'");
    return out;
  }

  std::vector<double> list(const std::string& k, const std::string& def) {
    std::vector<double> out;
    std::stringstream ss(str(k, def));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(k, item));
    if (out.empty()) throw DomainError("--" + k + " expects a comma separated list");
    return out;
  }

  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  static double parse_double(const std::string& k, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size() || v.empty() || !std::isfinite(out))
      throw DomainError("--" + k + " expects a number, got '" + v + "'");
    return out;
  }

  const std::map<std::string, std::string>& given_;
  std::map<std::string, std::string> resolved_;
};

struct Output {
  std::string body;
  std::string sidecar;  // simulate only; written next to --out
};

std::string header(const RunSpec& spec, const ModelParams& p, const Options& opts) {
  std::string h = "# command = " + spec.command + "\n";
  std::stringstream kv(to_kv(p));
  std::string line;
  while (std::getline(kv, line))
    if (!line.empty()) h += "# " + line + "\n";
  for (const auto& [k, v] : opts.resolved())
    if (k != "out" && k != "format") h += "# " + k + " = " + v + "\n";
  return h;
}

Json params_json(const ModelParams& p) {
  Json j;
  for (const auto& [k, v] : to_map(p)) j[k] = v;
  j["dim"] = p.dim;
  return j;
}

// Scalar outputs: JSON object, or "key,value" rows for --format csv.
std::string scalar_output(const Json& j, const std::string& format, const std::string& head) {
  if (format == "json") return j.dump(2) + "\n";
  std::string out = head + "key,value\n";
  for (const auto& [k, v] : j.items()) {
    if (k == "params" || k == "command") continue;
    if (v.is_number_float()) out += k + "," + format_number(v.get<double>()) + "\n";
    else if (v.is_string()) out += k + "," + v.get<std::string>() + "\n";
    else out += k + "," + v.dump() + "\n";
  }
  return out;
}

std::string curve_output(const MomentCurve& c, const std::string& format, const std::string& head) {
  if (format == "json") {
    Json j;
    j["method"] = to_string(c.method);
    j["params"] = params_json(c.params);
    j["t"] = c.t_grid;
    j["value"] = c.values;
    if (!c.stderr_values.empty()) j["stderr"] = c.stderr_values;
    return j.dump(2) + "\n";
  }
  return head + c.to_csv();
}

std::vector<double> time_grid(Options& o) {
  if (o.has("t")) return o.list("t", "");
  const double t_max = o.num("t-max", 2.0);
  const long long n = o.integer("points", 100);
  if (!(t_max > 0.0) || n < 1) throw DomainError("--t-max must be positive and --points >= 1");
  std::vector<double> g;
  for (long long i = 1; i <= n; ++i) g.push_back(t_max * static_cast<double>(i) / static_cast<double>(n));
  return g;
}

Partition parse_partition(const std::string& s) {
  Partition n;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty()) throw DomainError("--partition expects integers like 2,2");
    n.n.push_back(v);
  }
  return n;
}

void require_dalang(const ModelParams& p) {
  validate(p);
  if (!dalang_satisfied(p))
    throw DalangViolated("Dalang's condition fails: dim = " + std::to_string(p.dim) +
                         " but needs dim < " + format_number(dalang_bound(p)));
}

Output cmd_check_dalang(const RunSpec& s, Options& o, const std::string& fmt) {
  const ModelParams& p = s.params;
  validate_allow_zero_lambda(p);
  Json j;
  j["command"] = s.command;
  j["params"] = params_json(p);
  j["dalang"] = dalang_satisfied(p);
  j["inequality"] = p.beta < 2.0 ? "dim < 2 alpha + (alpha / beta) min(2 gamma - 1, 0)"
                                 : "dim < alpha min(2, 1 + gamma)";
  j["dim"] = p.dim;
  j["bound"] = dalang_bound(p);
  j["theta"] = theta(p);
  return {scalar_output(j, fmt, header(s, p, o)), {}};
}

Output cmd_constants(const RunSpec& s, Options& o, const std::string& fmt) {
  require_dalang(s.params);
  const DerivedConstants c = derived_constants(s.params);
  Json j;
  j["command"] = s.command;
  j["params"] = params_json(s.params);
  j["theta"] = c.theta;
  j["big_theta"] = c.big_theta;
  j["lyapunov_base"] = c.lyapunov_base;
  j["kernel_nonnegative"] =
      kernel_nonneg_known(s.params) == Nonnegativity::Nonnegative ? "known" : "unknown";
  return {scalar_output(j, fmt.empty() ? "json" : fmt, header(s, s.params, o)), {}};
}

Output cmd_second_moment(const RunSpec& s, Options& o, const std::string& fmt) {
  require_dalang(s.params);
  const std::vector<double> grid = time_grid(o);
  return {curve_output(second_moment_curve(s.params, grid), fmt, header(s, s.params, o)), {}};
}

Output cmd_volterra(const RunSpec& s, Options& o, const std::string& fmt) {
  require_dalang(s.params);
  VolterraOptions v;
  v.min_steps = static_cast<int>(o.integer("min-steps", v.min_steps));
  v.rel_tol = o.num("rel-tol", v.rel_tol);
  const std::vector<double> grid = time_grid(o);
  return {curve_output(volterra_second_moment(s.params, grid, v), fmt, header(s, s.params, o)), {}};
}

Output cmd_lyapunov(const RunSpec& s, Options& o, const std::string& fmt) {
  require_dalang(s.params);
  Json j;
  j["command"] = s.command;
  j["params"] = params_json(s.params);
  j["lyapunov"] = second_lyapunov(s.params);
  j["theta"] = theta(s.params);
  j["big_theta"] = big_theta(s.params);
  return {scalar_output(j, fmt.empty() ? "json" : fmt, header(s, s.params, o)), {}};
}

Output cmd_pth_bound(const RunSpec& s, Options& o, const std::string& fmt) {
  require_dalang(s.params);
  const double pp = o.num("p", 2.0);
  const double t = o.num("t", 1.0);
  if (!(pp >= 2.0)) throw DomainError("--p must be >= 2");
  const ModelParams& p = s.params;
  Json j;
  j["command"] = s.command;
  j["params"] = params_json(p);
  j["p"] = pp;
  j["t"] = t;
  j["t_p"] = t_p(p, t, pp);
  j["moment_bound"] = pth_moment_upper(p, t, pp);
  j["lyapunov_upper"] = pth_lyapunov_upper(p, pp);
  j["p_exponent"] = 1.0 + 1.0 / (theta(p) + 1.0);
  if (p.alpha == 2.0 && p.beta == 1.0 && p.gamma == 0.0 && p.dim == 1 && p.nu == 1.0)
    j["she_exact_lyapunov"] = she_exact_pth_lyapunov(p.lambda, pp);
  return {scalar_output(j, fmt.empty() ? "json" : fmt, header(s, p, o)), {}};
}

Output cmd_chaos(const RunSpec& s, Options& o, const std::string& fmt) {
  require_dalang(s.params);
  const double t = o.num("t", 1.0);
  const long long k_max = o.integer("k-max", 30);
  const long long samples = o.integer("samples", 0);
  const auto seed = static_cast<std::uint64_t>(o.integer("seed", 1));
  if (k_max < 0 || samples < 0) throw DomainError("--k-max and --samples must be >= 0");
  std::vector<double> term, partial;
  std::vector<McEstimate> mc;
  double sum = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    term.push_back(chaos_term(s.params, t, k));
    sum += term.back();
    partial.push_back(sum);
    if (samples > 0 && k >= 1 && k <= 4)
      mc.push_back(chaos_term_mc(s.params, t, k, static_cast<std::uint64_t>(samples), seed));
  }
  const double exact = second_moment(s.params, t);
  if (fmt == "json") {
    Json j;
    j["params"] = params_json(s.params);
    j["t"] = t;
    j["second_moment"] = exact;
    j["term"] = term;
    j["partial_sum"] = partial;
    if (!mc.empty()) {
      Json arr = Json::array();
      for (const auto& m : mc) arr.push_back({{"value", m.value}, {"stderr", m.stderr_value}});
      j["monte_carlo"] = arr;
    }
    return {j.dump(2) + "\n", {}};
  }
  std::string out = header(s, s.params, o) + "# second_moment = " + format_number(exact) + "\n";
  out += mc.empty() ? "k,term,partial_sum\n" : "k,term,partial_sum,mc,mc_stderr\n";
  for (std::size_t k = 0; k < term.size(); ++k) {
    out += std::to_string(k) + "," + format_number(term[k]) + "," + format_number(partial[k]);
    if (!mc.empty()) {
      if (k >= 1 && k <= mc.size())
        out += "," + format_number(mc[k - 1].value) + "," + format_number(mc[k - 1].stderr_value);
      else
        out += ",,";
    }
    out += "\n";
  }
  return {out, {}};
}

std::string partition_text(const Partition& n) {
  std::string s;
  for (std::size_t i = 0; i < n.n.size(); ++i) s += (i ? " " : "") + std::to_string(n.n[i]);
  return s;
}

Output cmd_diagrams(const RunSpec& s, Options& o, const std::string& fmt) {
  const std::string head = header(s, s.params, o);
  if (o.has("partition")) {
    const Partition n = parse_partition(o.str("partition", ""));
    const bool balanced = o.has("p") || o.has("m");
    std::vector<FeynmanDiagram> ds;
    if (balanced)
      ds = enumerate_balanced(n, static_cast<int>(o.integer("p", 0)), static_cast<int>(o.integer("m", 0)));
    else
      ds = enumerate_admissible(n);
    if (fmt == "json") {
      Json arr = Json::array();
      for (const auto& d : ds)
        arr.push_back({{"diagram", to_text(d)},
                       {"crossing_vanishes", crossing_vanishes(d)},
                       {"simplex_consistent", simplex_consistent(d)},
                       {"surrogate_weight", surrogate_weight(d)}});
      return {Json{{"count", ds.size()}, {"diagrams", arr}}.dump(2) + "\n", {}};
    }
    std::string out = head + "# count = " + std::to_string(ds.size()) + "\n";
    out += "diagram,crossing_vanishes,simplex_consistent,surrogate_weight\n";
    for (const auto& d : ds)
      out += "\"" + to_text(d) + "\"," + (crossing_vanishes(d) ? "true" : "false") + "," +
             (simplex_consistent(d) ? "true" : "false") + "," + std::to_string(surrogate_weight(d)) + "\n";
    return {out, {}};
  }
  const int p = static_cast<int>(o.integer("p", 2));
  const int m = static_cast<int>(o.integer("m", 2));
  const std::uint64_t lb = count_lower_bound(p, m);
  const std::vector<Partition> parts = balanced_partitions(p, m);
  if (fmt == "json") {
    Json arr = Json::array();
    for (const auto& n : parts) arr.push_back({{"partition", n.n}, {"count_balanced", count_balanced(n, p, m)}});
    return {Json{{"p", p}, {"m", m}, {"lower_bound", lb}, {"partitions", arr}}.dump(2) + "\n", {}};
  }
  std::string out = head + "# lower_bound = " + std::to_string(lb) + "\n" + "partition,count_balanced,meets_bound\n";
  for (const auto& n : parts) {
    const std::uint64_t c = count_balanced(n, p, m);
    out += partition_text(n) + "," + std::to_string(c) + "," + (c >= lb ? "true" : "false") + "\n";
  }
  return {out, {}};
}

Output cmd_simulate(const RunSpec& s, Options& o, const std::string& fmt) {
  ModelParams p = s.params;
  const std::string family = o.str("family", p.beta == 2.0 ? "swe" : "she");
  const bool swe = family == "swe";
  if (!swe && family != "she") throw DomainError("simulate --family must be she or swe");
  p.alpha = 2.0;
  p.beta = swe ? 2.0 : 1.0;
  p.gamma = 0.0;
  p.dim = 1;
  SimConfig cfg;
  const double kappa = std::sqrt(p.nu / 2.0);
  cfg.dt = o.num("dt", swe ? 0.005 : 1e-4);
  cfg.dx = o.num("dx", swe ? kappa * cfg.dt : 0.02);
  const std::vector<double> probes = o.list("t", swe ? "0.5" : "0.3");
  cfg.t_end = o.num("t-max", *std::max_element(probes.begin(), probes.end()));
  cfg.offset_probe = o.num("offset", swe ? 5.0 * cfg.dx : 0.1);
  const double swe_reach = std::fabs(cfg.offset_probe) + kappa * cfg.t_end + 6.0 * cfg.dx;
  cfg.domain_half_width = o.num("L", swe ? swe_reach : 1.2);
  cfg.n_paths = static_cast<std::uint64_t>(std::max(1LL, o.integer("paths", 1000)));
  cfg.seed = static_cast<std::uint64_t>(o.integer("seed", 1));
  cfg.threads = static_cast<unsigned>(std::max(0LL, o.integer("threads", 0)));
  const SimSummary sum = swe ? simulate_swe_summary(p, cfg, probes) : simulate_she_summary(p, cfg, probes);
  RunSpec echoed = s;
  echoed.params = p;
  Output out;
  out.sidecar = sidecar_json(sum, cfg);
  out.body = fmt == "json" ? out.sidecar : curve_output(sum.second, "csv", header(echoed, p, o));
  return out;
}

Output cmd_figures(const RunSpec& s, Options& o, const std::string& fmt) {
  const std::string family = o.str("family", "sheswe");
  const std::string grid = family == "sfhe" ? o.str("alpha-grid", "1.05:5:0.05") : "";
  const std::vector<FigureRow> rows = figure_data(family, s.params, grid.empty() ? "1.05:5:0.05" : grid);
  if (fmt == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) arr.push_back({{"x", r.x}, {"y", r.y}, {"series", r.series}});
    return {Json{{"family", family}, {"rows", arr}}.dump(2) + "\n", {}};
  }
  ModelParams echo;
  echo.nu = s.params.nu;
  echo.lambda = s.params.lambda;
  return {header(s, echo, o) + figure_csv(rows), {}};
}

std::string error_json(const std::string& kind, const std::string& msg, int code) {
  return Json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() + "\n";
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty()) throw DomainError("grid must look like lo:hi:step");
    parts.push_back(v);
  }
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) throw DomainError("grid must look like lo:hi:step");
  const auto n = static_cast<long long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  if (n > 100000) throw TooLarge("grid has more than 1e5 points");
  std::vector<double> g;
  for (long long i = 0; i <= n; ++i) g.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  return g;
}

}  // namespace

std::vector<FigureRow> figure_data(const std::string& family, const ModelParams& base, const std::string& alpha_grid) {
  ModelParams p;
  p.nu = base.nu;
  p.lambda = base.lambda;
  p.alpha = 2.0;
  p.gamma = 0.0;
  p.dim = 1;
  std::vector<FigureRow> theta_rows, big_rows, exp_rows, lyap_rows;
  if (family == "sheswe" || family == "tfspde") {
    const bool tf = family == "tfspde";
    for (int i = 1; i <= 200; ++i) {
      p.beta = i / 100.0;
      // gamma = ceil(beta) - beta; beta = 1 gets gamma = 0, the left branch.
      p.gamma = tf ? std::ceil(p.beta) - p.beta : 0.0;
      const double th = theta(p);
      theta_rows.push_back({p.beta, th, "theta"});
      big_rows.push_back({p.beta, big_theta_unchecked(p), "big_theta"});
      if (dalang_satisfied(p)) {
        exp_rows.push_back({p.beta, 1.0 + 1.0 / (1.0 + th), "p_exponent"});
        lyap_rows.push_back({p.beta, second_lyapunov(p), "lyapunov"});
      }
    }
    std::vector<FigureRow> out;
    if (tf) out.insert(out.end(), theta_rows.begin(), theta_rows.end());
    out.insert(out.end(), big_rows.begin(), big_rows.end());
    if (tf) out.insert(out.end(), exp_rows.begin(), exp_rows.end());
    out.insert(out.end(), lyap_rows.begin(), lyap_rows.end());
    return out;
  }
  if (family == "sfhe") {
    std::vector<FigureRow> out;
    for (double beta : {1.0, 2.0}) {
      const std::string tag = beta == 1.0 ? "sfhe_" : "sfwe_";
      std::vector<FigureRow> big, lyap;
      p.beta = beta;
      for (double a : parse_grid(alpha_grid)) {
        p.alpha = a;
        if (!(a > 0.0) || !spatially_integrable(p)) continue;
        big.push_back({a, big_theta_unchecked(p), tag + "big_theta"});
        if (dalang_satisfied(p)) lyap.push_back({a, second_lyapunov(p), tag + "lyapunov"});
      }
      out.insert(out.end(), big.begin(), big.end());
      out.insert(out.end(), lyap.begin(), lyap.end());
    }
    return out;
  }
  throw DomainError("unknown figure family '" + family + "' (sheswe, tfspde, sfhe)");
}

std::string figure_csv(const std::vector<FigureRow>& rows) {
  std::string out = "x,y,series\n";
  for (const auto& r : rows) out += format_number(r.x) + "," + format_number(r.y) + "," + r.series + "\n";
  return out;
}

std::optional<Crossing> curve_crossing(const std::vector<FigureRow>& rows, const std::string& series_a,
                                       const std::string& series_b) {
  std::map<double, double> a, b;
  for (const auto& r : rows) {
    if (r.series == series_a) a[r.x] = r.y;
    if (r.series == series_b) b[r.x] = r.y;
  }
  std::vector<std::array<double, 3>> d;  // x, ya, yb on shared abscissae
  for (const auto& [x, ya] : a)
    if (auto it = b.find(x); it != b.end()) d.push_back({x, ya, it->second});
  for (std::size_t i = 1; i < d.size(); ++i) {
    const double f0 = d[i - 1][1] - d[i - 1][2];
    const double f1 = d[i][1] - d[i][2];
    if (f0 == 0.0) return Crossing{d[i - 1][0], d[i - 1][1]};
    if ((f0 < 0.0) != (f1 < 0.0) || f1 == 0.0) {
      const double w = f0 / (f0 - f1);
      return Crossing{d[i - 1][0] + w * (d[i][0] - d[i - 1][0]), d[i - 1][1] + w * (d[i][1] - d[i - 1][1])};
    }
  }
  return std::nullopt;
}

std::optional<RunSpec> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Moment theory of fractional stochastic heat and wave equations", "spde-moments"};
  std::string command;
  app.add_option("command", command, "Subcommand")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kCommands), std::end(kCommands))));
  std::map<std::string, std::string> raw;
  const char* param_names[] = {"alpha", "beta", "gamma", "lambda", "nu", "dim", "u0", "u1"};
  const char* option_names[] = {"t",     "t-max", "points", "p",       "m",         "seed",      "paths",
                                "dx",    "dt",    "L",      "offset",  "threads",   "family",    "alpha-grid",
                                "partition", "k-max", "samples", "min-steps", "rel-tol", "out", "format", "config"};
  std::map<std::string, CLI::Option*> opts;
  for (const char* n : param_names) opts[n] = app.add_option(std::string("--") + n, raw[n]);
  for (const char* n : option_names) opts[n] = app.add_option(std::string("--") + n, raw[n]);
  opts["format"]->check(CLI::IsMember({"csv", "json"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw DomainError(e.what());
  }
  RunSpec spec;
  spec.command = command;
  if (opts["config"]->count() > 0) {
    std::ifstream in(raw["config"]);
    if (!in) throw DomainError("cannot read config file '" + raw["config"] + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    spec.params = from_kv(ss.str(), spec.params);
  }
  std::string overrides;
  for (const char* n : param_names)
    if (opts[n]->count() > 0) overrides += std::string(n) + "=" + raw[n] + "\n";
  spec.params = from_kv(overrides, spec.params);
  for (const char* n : option_names)
    if (opts[n]->count() > 0 && std::string(n) != "config") spec.options[n] = raw[n];
  return spec;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    Options o(spec.options);
    const std::string out_path = o.has("out") ? o.str("out", "") : "";
    const std::string fmt = o.has("format") ? o.str("format", "csv") : "";
    const std::string f = fmt.empty() ? "csv" : fmt;
    Output res;
    const std::string& c = spec.command;
    // Figures and diagrams never read u1; elsewhere J0 = u0 silently drops it.
    if (spec.params.beta <= 1.0 && spec.params.u1 != 0.0 && c != "figures" && c != "diagrams")
      err << Json{{"warning", "u1_ignored"}, {"message", "u1 has no effect when beta <= 1"}}.dump() << "\n";
    if (c == "check-dalang") res = cmd_check_dalang(spec, o, fmt.empty() ? "json" : fmt);
    else if (c == "constants") res = cmd_constants(spec, o, fmt);
    else if (c == "second-moment") res = cmd_second_moment(spec, o, f);
    else if (c == "volterra") res = cmd_volterra(spec, o, f);
    else if (c == "lyapunov") res = cmd_lyapunov(spec, o, fmt);
    else if (c == "pth-bound") res = cmd_pth_bound(spec, o, fmt);
    else if (c == "chaos") res = cmd_chaos(spec, o, f);
    else if (c == "diagrams") res = cmd_diagrams(spec, o, f);
    else if (c == "simulate") res = cmd_simulate(spec, o, f);
    else if (c == "figures") res = cmd_figures(spec, o, f);
    else throw DomainError("unknown command '" + c + "'");
    if (out_path.empty()) {
      out << res.body;
    } else {
      std::ofstream file(out_path, std::ios::binary);
      if (!file) throw DomainError("cannot write '" + out_path + "'");
      file << res.body;
      if (!res.sidecar.empty()) {
        std::ofstream side(out_path + ".json", std::ios::binary);
        if (!side) throw DomainError("cannot write '" + out_path + ".json'");
        side << res.sidecar;
      }
    }
    return 0;
  } catch (const Error& e) {
    const int code = static_cast<int>(e.code());
    err << error_json(e.kind(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    err << error_json("Error", e.what(), 2);
    return 2;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<RunSpec> spec;
  try {
    spec = parse_args(argc, argv, out);
  } catch (const Error& e) {
    const int code = static_cast<int>(e.code());
    err << error_json(e.kind(), e.what(), code);
    return code;
  }
  if (!spec) return 0;
  return run(*spec, out, err);
}

}  // namespace spde::cli
