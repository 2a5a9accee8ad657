#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iptw/cli.hpp"

namespace {

using nlohmann::json;

// Flags land in `overrides` only when actually passed, so config-file
// values survive unless overridden on the command line.
struct OptionAdder {
  CLI::App* app;
  json* overrides;

  template <typename T>
  CLI::Option* add(const std::string& flag, const std::string& key,
                   const std::string& desc) {
    json* o = overrides;
    return app->add_option_function<T>(
        flag, [o, key](const T& v) { (*o)[key] = v; }, desc);
  }

  CLI::Option* add_flag(const std::string& flag, const std::string& key,
                        const std::string& desc) {
    json* o = overrides;
    return app->add_flag_callback(
        flag, [o, key]() { (*o)[key] = true; }, desc);
  }
};

void add_shared(OptionAdder& oa, std::string* config_path) {
  oa.app->add_option("--config", *config_path, "JSON config file");
  oa.add<double>("--alpha", "alpha", "two-sided significance level");
  oa.add<double>("--power", "power", "target power");
  oa.add<double>("--delta", "delta", "effect size on the link scale");
  oa.add<std::uint64_t>("--seed", "seed", "master RNG seed");
  oa.add<int>("--workers", "workers", "worker thread count");
  oa.add<std::string>("--out", "out", "output directory");
}

void add_bootstrap(OptionAdder& oa) {
  oa.add<std::size_t>("--B", "B", "first-level bootstrap resamples");
  oa.add<std::size_t>("--B-ucb", "B_ucb", "second-level bootstrap resamples");
  oa.add<double>("--gamma-ucb", "gamma_ucb", "UCB tail level");
  oa.add<std::vector<std::string>>(
      "--functionals", "functionals",
      "stability choices, e.g. Q0.5 Q0.7 Q0.9 mean UCB-Q0.5 UCB-mean");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prospective sample size design for IPTW marginal structural models"};
  app.require_subcommand(1);
  json overrides = json::object();
  std::string config_path;

  CLI::App* design = app.add_subcommand("design", "pilot CSV to stabilized sample sizes");
  {
    OptionAdder oa{design, &overrides};
    add_shared(oa, &config_path);
    add_bootstrap(oa);
    oa.add<std::string>("--pilot", "pilot", "pilot dataset CSV (y,t,x1..xp)");
    oa.add<std::string>("--outcome", "outcome", "binary|count|continuous");
    oa.add<std::string>("--estimand", "estimand", "ate|att");
    oa.add_flag("--dump-matrices", "dump_matrices", "write A/B/Sigma CSVs");
    oa.add_flag("--dump-bootstrap", "dump_bootstrap", "write V* draws CSV");
  }

  CLI::App* benchmark = app.add_subcommand("benchmark", "RCT-style variance and n");
  {
    OptionAdder oa{benchmark, &overrides};
    add_shared(oa, &config_path);
    oa.add<std::string>("--kind", "kind", "binary|count|continuous");
    oa.add<double>("--rho", "rho", "treated fraction");
    oa.add<double>("--p0", "p0", "control event probability (binary)");
    oa.add<double>("--p1", "p1", "treated event probability (binary)");
    oa.add<double>("--lambda0", "lambda0", "control rate (count)");
    oa.add<double>("--lambda1", "lambda1", "treated rate (count)");
    oa.add<double>("--sigma2", "sigma2", "outcome variance (continuous)");
  }

  CLI::App* simulate = app.add_subcommand("simulate", "generate a scenario dataset");
  {
    OptionAdder oa{simulate, &overrides};
    add_shared(oa, &config_path);
    oa.add<std::string>("--scenario", "scenario",
                        "binary_mcm|binary_sga|count_npe|continuous_nsclc");
    oa.add<std::size_t>("--n", "n", "dataset size");
    oa.add_flag("--constant-propensity", "constant_propensity",
                "treatment independent of covariates");
    oa.add_flag("--null-effect", "null_effect", "zero treatment effect");
  }

  CLI::App* validate = app.add_subcommand("validate", "full design validation pipeline");
  {
    OptionAdder oa{validate, &overrides};
    add_shared(oa, &config_path);
    add_bootstrap(oa);
    oa.add<std::string>("--scenario", "scenario",
                        "binary_mcm|binary_sga|count_npe|continuous_nsclc");
    oa.add<std::size_t>("--R", "R", "design replicates");
    oa.add<std::size_t>("--n-pilot", "n_pilot", "pilot size");
    oa.add<std::size_t>("--reps", "reps", "Monte Carlo replicates per grid point");
    oa.add<double>("--target-power", "target_power", "hit-rate power target");
    oa.add_flag("--constant-propensity", "constant_propensity",
                "treatment independent of covariates");
    oa.add_flag("--isotonic", "isotonic", "isotonic-smooth the power curve");
  }

  CLI11_PARSE(app, argc, argv);

  json merged = json::object();
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "error: cannot open config: " << config_path << "\n";
      return 1;
    }
    try {
      is >> merged;
    } catch (const json::exception& e) {
      std::cerr << "error: bad config JSON: " << e.what() << "\n";
      return 1;
    }
    if (!merged.is_object()) {
      std::cerr << "error: config must be a JSON object\n";
      return 1;
    }
  }
  merged.update(overrides);

  CLI::App* sub = nullptr;
  for (CLI::App* s : {design, benchmark, simulate, validate})
    if (s->parsed()) sub = s;
  if (!sub) {
    std::cerr << "error: no command\n";
    return 1;
  }
  return iptw::dispatch(sub->get_name(), merged);
}
