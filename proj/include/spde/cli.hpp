#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spde/model.hpp"

namespace spde::cli {

inline constexpr const char* kCommands[] = {"check-dalang", "constants", "second-moment", "lyapunov", "pth-bound",
                                            "volterra",     "chaos",     "diagrams",      "simulate", "figures"};

struct RunSpec {
  std::string command;
  ModelParams params;
  // Resolved command options as text (t, t-max, p, seed, ...), echoed in headers.
  std::map<std::string, std::string> options;
};

// Parses argv (argv[0] is the program name). Throws DomainError on bad input.
// Returns nullopt after printing help to out.
std::optional<RunSpec> parse_args(int argc, const char* const* argv, std::ostream& out);

// Executes one command; errors become a JSON object on err and a nonzero code.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

// parse_args + run with the same error handling; the tool's whole main().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct FigureRow {
  double x = 0.0;
  double y = 0.0;
  std::string series;
};

// Datasets behind the three figure families, in output order:
//   sheswe: y = Theta and Lyapunov vs beta in (0, 2], alpha = 2, gamma = 0
//   tfspde: theta, Theta, 1 + 1/(1 + theta), Lyapunov vs beta, gamma = ceil(beta) - beta
//   sfhe:   Theta and Lyapunov vs alpha for beta = 1 (sfhe_*) and beta = 2 (sfwe_*)
// Only nu and lambda are read from base. alpha_grid is "lo:hi:step".
std::vector<FigureRow> figure_data(const std::string& family, const ModelParams& base,
                                   const std::string& alpha_grid = "1.05:5:0.05");

std::string figure_csv(const std::vector<FigureRow>& rows);

struct Crossing {
  double x = 0.0;
  double y = 0.0;
};

// First sign change of (a - b) across shared x values, linearly interpolated.
std::optional<Crossing> curve_crossing(const std::vector<FigureRow>& rows, const std::string& series_a,
                                       const std::string& series_b);

}  // namespace spde::cli
