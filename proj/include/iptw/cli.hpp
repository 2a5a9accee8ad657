#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iptw/powersim.hpp"

namespace iptw {

// Effective run parameters. JSON config and command-line flags populate
// the same fields; flags win. The effective config is echoed next to the
// outputs so any run can be reproduced from its echo.
struct RunConfig {
  // shared
  double alpha = 0.05;
  double power = 0.80;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::optional<std::string> out;

  // bootstrap / stability
  std::size_t B = 1000;
  std::size_t B_ucb = 1000;
  double gamma_ucb = 0.05;
  std::vector<std::string> functionals = {"Q0.5", "Q0.7", "Q0.9",
                                          "mean", "UCB-Q0.5", "UCB-mean"};

  // design command
  std::string pilot_path;
  std::string outcome;  // binary | count | continuous
  std::string estimand = "ate";
  bool dump_matrices = false;
  bool dump_bootstrap = false;

  // scenario-driven commands
  std::string scenario;
  bool constant_propensity = false;
  bool null_effect = false;
  std::optional<std::size_t> n;        // simulate: dataset size
  std::optional<std::size_t> n_pilot;  // validate: pilot size
  std::size_t R = 1000;
  std::size_t reps = 2000;
  bool isotonic = false;
  double target_power = 0.0;  // 0 = use `power`

  // benchmark command
  std::string kind;
  double rho = 0.5;
  std::optional<double> p0, p1, lambda0, lambda1, sigma2;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

std::vector<StabilityChoice> parse_choices(const std::vector<std::string>& labels,
                                           std::size_t b_ucb, double gamma_ucb);

void cmd_design(const RunConfig& cfg);
void cmd_benchmark(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_validate(const RunConfig& cfg);

// Runs a command with the merged config, mapping errors to exit codes:
// 0 success, 1 user/data error, 2 internal numeric failure.
int dispatch(const std::string& command, const nlohmann::json& merged);

}  // namespace iptw
