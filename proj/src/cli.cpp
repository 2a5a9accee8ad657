#include "iptw/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"
#include "iptw/sandwich.hpp"

namespace iptw {

namespace {

const std::vector<std::string> kConfigKeys = {
    "command",    "alpha",     "power",    "delta",     "seed",
    "workers",    "out",       "B",        "B_ucb",     "gamma_ucb",
    "functionals", "pilot",    "outcome",  "estimand",  "dump_matrices",
    "dump_bootstrap", "scenario", "constant_propensity", "null_effect",
    "n",          "n_pilot",   "R",        "reps",      "isotonic",
    "target_power", "kind",    "rho",      "p0",        "p1",
    "lambda0",    "lambda1",   "sigma2"};

void check_keys(const nlohmann::json& j) {
  for (const auto& item : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), item.key()) ==
        kConfigKeys.end())
      throw DataError("unknown config key: " + item.key());
  }
}

template <typename T>
void read_into(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

template <typename T>
void read_into(const nlohmann::json& j, const char* key, std::optional<T>& field) {
  if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
  const std::string dir = cfg.out.value_or("iptw_out");
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw DataError("write failed: " + path.string());
}

void echo_config(const std::filesystem::path& dir, const RunConfig& cfg,
                 const std::string& command) {
  nlohmann::json j = cfg.to_json();
  j["command"] = command;
  write_text(dir / "effective_config.json", j.dump(2) + "\n");
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << buf << (j + 1 < m.cols() ? "," : "");
    }
    os << "\n";
  }
}

Scenario scenario_from_config(const RunConfig& cfg) {
  if (cfg.scenario.empty()) throw DataError("missing scenario name");
  Scenario sc = Scenario::preset(cfg.scenario);
  if (cfg.constant_propensity) sc.set_mode(PropensityMode::constant);
  if (cfg.null_effect) sc.set_null_effect();
  sc.calibrate();
  return sc;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  check_keys(j);
  RunConfig cfg;
  try {
    read_into(j, "alpha", cfg.alpha);
    read_into(j, "power", cfg.power);
    read_into(j, "delta", cfg.delta);
    read_into(j, "seed", cfg.seed);
    read_into(j, "workers", cfg.workers);
    read_into(j, "out", cfg.out);
    read_into(j, "B", cfg.B);
    read_into(j, "B_ucb", cfg.B_ucb);
    read_into(j, "gamma_ucb", cfg.gamma_ucb);
    read_into(j, "functionals", cfg.functionals);
    read_into(j, "pilot", cfg.pilot_path);
    read_into(j, "outcome", cfg.outcome);
    read_into(j, "estimand", cfg.estimand);
    read_into(j, "dump_matrices", cfg.dump_matrices);
    read_into(j, "dump_bootstrap", cfg.dump_bootstrap);
    read_into(j, "scenario", cfg.scenario);
    read_into(j, "constant_propensity", cfg.constant_propensity);
    read_into(j, "null_effect", cfg.null_effect);
    read_into(j, "n", cfg.n);
    read_into(j, "n_pilot", cfg.n_pilot);
    read_into(j, "R", cfg.R);
    read_into(j, "reps", cfg.reps);
    read_into(j, "isotonic", cfg.isotonic);
    read_into(j, "target_power", cfg.target_power);
    read_into(j, "kind", cfg.kind);
    read_into(j, "rho", cfg.rho);
    read_into(j, "p0", cfg.p0);
    read_into(j, "p1", cfg.p1);
    read_into(j, "lambda0", cfg.lambda0);
    read_into(j, "lambda1", cfg.lambda1);
    read_into(j, "sigma2", cfg.sigma2);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (cfg.workers < 1) throw DataError("workers must be >= 1");
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["power"] = power;
  if (delta) j["delta"] = *delta;
  if (seed) j["seed"] = *seed;
  j["workers"] = workers;
  if (out) j["out"] = *out;
  j["B"] = B;
  j["B_ucb"] = B_ucb;
  j["gamma_ucb"] = gamma_ucb;
  j["functionals"] = functionals;
  if (!pilot_path.empty()) j["pilot"] = pilot_path;
  if (!outcome.empty()) j["outcome"] = outcome;
  j["estimand"] = estimand;
  j["dump_matrices"] = dump_matrices;
  j["dump_bootstrap"] = dump_bootstrap;
  if (!scenario.empty()) j["scenario"] = scenario;
  j["constant_propensity"] = constant_propensity;
  j["null_effect"] = null_effect;
  if (n) j["n"] = *n;
  if (n_pilot) j["n_pilot"] = *n_pilot;
  j["R"] = R;
  j["reps"] = reps;
  j["isotonic"] = isotonic;
  j["target_power"] = target_power;
  if (!kind.empty()) j["kind"] = kind;
  j["rho"] = rho;
  if (p0) j["p0"] = *p0;
  if (p1) j["p1"] = *p1;
  if (lambda0) j["lambda0"] = *lambda0;
  if (lambda1) j["lambda1"] = *lambda1;
  if (sigma2) j["sigma2"] = *sigma2;
  return j;
}

std::vector<StabilityChoice> parse_choices(const std::vector<std::string>& labels,
                                           std::size_t b_ucb, double gamma_ucb) {
  if (labels.empty()) throw DataError("functionals list must not be empty");
  std::vector<StabilityChoice> out;
  out.reserve(labels.size());
  for (const std::string& label : labels) {
    const bool is_ucb = label.rfind("UCB-", 0) == 0;
    const std::string body = is_ucb ? label.substr(4) : label;
    StabilityFunctional f = StabilityFunctional::mean();
    if (body == "mean") {
      // keep mean
    } else if (!body.empty() && body[0] == 'Q') {
      char* end = nullptr;
      const double q = std::strtod(body.c_str() + 1, &end);
      if (end == body.c_str() + 1 || *end != '\0' || !(q > 0.0 && q < 1.0))
        throw DataError("bad stability functional: " + label);
      f = StabilityFunctional::quantile(q);
    } else {
      throw DataError("bad stability functional: " + label);
    }
    if (is_ucb) {
      UCBSpec u;
      u.phi = f;
      u.B_ucb = b_ucb;
      u.gamma_ucb = gamma_ucb;
      out.push_back(StabilityChoice::ucb_of(u));
    } else {
      out.push_back(StabilityChoice::functional(f));
    }
  }
  return out;
}

void cmd_design(const RunConfig& cfg) {
  if (cfg.pilot_path.empty()) throw DataError("design requires --pilot CSV path");
  if (cfg.outcome.empty())
    throw DataError("design requires --outcome (binary|count|continuous)");
  if (!cfg.delta) throw DataError("design requires --delta");
  const OutcomeKind kind = outcome_kind_from_string(cfg.outcome);
  const Dataset pilot = load_csv(cfg.pilot_path, kind);
  const ArmDiagnostics diag = validate(pilot);
  if (!diag.flags.empty()) {
    std::string msg;
    for (const auto& f : diag.flags) msg += (msg.empty() ? "" : "; ") + f;
    throw DataError(msg);
  }

  const Estimand est = estimand_from_string(cfg.estimand);
  const Link link = Link::canonical_for(kind);
  const PSSpec spec = PSSpec::all_covariates(pilot.p());
  DesignInputs inp;
  inp.delta = *cfg.delta;
  inp.alpha = cfg.alpha;
  inp.power = cfg.power;
  inp.validate();
  const std::uint64_t seed = cfg.seed.value_or(1);

  const StackedFit fit = stacked_fit(pilot, spec, link, est);
  const BootstrapDistribution dist =
      bootstrap_lsvf(pilot, spec, link, est, cfg.B, seed, cfg.workers);
  const auto choices = parse_choices(cfg.functionals, cfg.B_ucb, cfg.gamma_ucb);

  nlohmann::json report;
  report["n_pilot"] = pilot.n();
  report["v_pilot"] = fit.lsvf;
  report["var_beta1"] = fit.var_beta1;
  report["beta1_hat"] = fit.msm.beta_hat[1];
  report["B_requested"] = dist.B_requested;
  report["B_succeeded"] = dist.values.size();
  report["failures"] = dist.failures;
  report["redraws"] = dist.redraws;
  report["diagnostics"] = {{"ps_converged", fit.ps.converged},
                           {"ps_iterations", fit.ps.iterations},
                           {"n_control", diag.n_control},
                           {"n_treated", diag.n_treated},
                           {"events_control", diag.events_control},
                           {"events_treated", diag.events_treated}};
  nlohmann::json rows = nlohmann::json::array();
  std::size_t ucb_index = 0;
  for (const auto& choice : choices) {
    double v;
    if (choice.kind == StabilityChoice::Kind::functional) {
      v = apply_functional(dist, choice.f);
    } else {
      Engine ueng = make_engine(seed, stream::ucb, ucb_index++);
      v = ucb(dist, choice.u, ueng);
    }
    const long n = required_n(v, inp);
    rows.push_back({{"label", choice.label()}, {"v_stable", v}, {"n_prop", n}});
    std::printf("%-10s V_stable=%.6g n_prop=%ld\n", choice.label().c_str(), v, n);
  }
  report["choices"] = rows;

  const auto dir = ensure_out_dir(cfg);
  write_text(dir / "design.json", report.dump(2) + "\n");
  echo_config(dir, cfg, "design");
  if (cfg.dump_bootstrap) {
    std::string csv = "v_star\n";
    char buf[64];
    for (double v : dist.values) {
      std::snprintf(buf, sizeof(buf), "%.17g\n", v);
      csv += buf;
    }
    write_text(dir / "bootstrap.csv", csv);
  }
  if (cfg.dump_matrices) {
    write_matrix_csv(dir / "A.csv", fit.A);
    write_matrix_csv(dir / "B.csv", fit.B);
    write_matrix_csv(dir / "Sigma.csv", fit.Sigma);
  }
  std::printf("V_pilot=%.6g (n_pilot=%lld); outputs in %s\n", fit.lsvf,
              static_cast<long long>(pilot.n()), dir.string().c_str());
}

void cmd_benchmark(const RunConfig& cfg) {
  if (cfg.kind.empty())
    throw DataError("benchmark requires --kind (binary|count|continuous)");
  RCTParams params;
  params.kind = outcome_kind_from_string(cfg.kind);
  params.rho = cfg.rho;
  params.delta = cfg.delta;
  if (cfg.p0) params.p0 = *cfg.p0;
  params.p1 = cfg.p1;
  if (cfg.lambda0) params.lambda0 = *cfg.lambda0;
  params.lambda1 = cfg.lambda1;
  if (cfg.sigma2) params.sigma2 = *cfg.sigma2;

  double delta;
  if (cfg.delta) {
    delta = *cfg.delta;
  } else if (params.kind == OutcomeKind::binary && cfg.p0 && cfg.p1) {
    delta = logit(*cfg.p1) - logit(*cfg.p0);
  } else if (params.kind == OutcomeKind::count && cfg.lambda0 && cfg.lambda1) {
    delta = std::log(*cfg.lambda1) - std::log(*cfg.lambda0);
  } else {
    throw DataError("benchmark requires --delta or both arm parameters");
  }

  const double v = rct_variance(params);
  DesignInputs inp;
  inp.delta = delta;
  inp.alpha = cfg.alpha;
  inp.power = cfg.power;
  const long n = required_n(v, inp);
  std::printf("V_rct=%.10g\nn_rct=%ld\n", v, n);

  if (cfg.out) {
    const auto dir = ensure_out_dir(cfg);
    nlohmann::json j = {{"V_rct", v}, {"n_rct", n}, {"delta", delta},
                        {"alpha", cfg.alpha}, {"power", cfg.power}};
    write_text(dir / "benchmark.json", j.dump(2) + "\n");
    echo_config(dir, cfg, "benchmark");
  }
}

void cmd_simulate(const RunConfig& cfg) {
  Scenario sc = scenario_from_config(cfg);
  const std::size_t n = cfg.n.value_or(sc.default_n_pilot());
  const std::uint64_t seed = cfg.seed.value_or(1);

  Engine eng = make_engine(seed, stream::simulate, 0);
  double eta0 = 0.0;
  const Dataset d = sc.generate(n, eng, &eta0);

  const auto dir = ensure_out_dir(cfg);
  write_csv(d, (dir / "dataset.csv").string());

  nlohmann::json side;
  side["scenario"] = sc.name();
  side["n"] = n;
  side["seed"] = seed;
  side["constant_propensity"] = cfg.constant_propensity;
  side["null_effect"] = cfg.null_effect;
  side["eta0"] = eta0;
  if (const auto* b = sc.binary()) {
    side["gamma0"] = b->gamma0;
    side["psi"] = b->psi;
    side["p0"] = b->p0;
    side["delta"] = b->delta;
  } else if (const auto* c = sc.count()) {
    side["lambda0"] = c->lambda0;
    side["delta"] = c->delta;
  } else {
    side["delta"] = sc.continuous()->delta;
  }
  write_text(dir / "calibration.json", side.dump(2) + "\n");
  echo_config(dir, cfg, "simulate");
  std::printf("wrote %s (n=%zu) and calibration.json\n",
              (dir / "dataset.csv").string().c_str(), n);
}

void cmd_validate(const RunConfig& cfg) {
  if (!cfg.seed) throw DataError("validate requires --seed for reproducibility");
  if (cfg.null_effect)
    throw DataError("validate requires a nonzero effect; null_effect is for simulate");
  Scenario sc = scenario_from_config(cfg);

  DesignInputs inp;
  inp.delta = cfg.delta.value_or(sc.delta());
  inp.alpha = cfg.alpha;
  inp.power = cfg.power;
  inp.validate();
  const double target = cfg.target_power > 0.0 ? cfg.target_power : cfg.power;
  const std::size_t n_pilot = cfg.n_pilot.value_or(sc.default_n_pilot());
  const auto choices = parse_choices(cfg.functionals, cfg.B_ucb, cfg.gamma_ucb);

  std::printf("design replicates: R=%zu n_pilot=%zu B=%zu\n", cfg.R, n_pilot,
              cfg.B);
  const auto reps = run_design_replicates(sc, cfg.R, n_pilot, cfg.B, choices, inp,
                                          *cfg.seed, cfg.workers);
  std::size_t failed = 0;
  for (const auto& r : reps)
    if (r.failed) ++failed;
  if (failed > 0) std::printf("  %zu replicate(s) dropped\n", failed);

  std::vector<long> pooled;
  std::vector<long> rct_sizes;
  for (const auto& r : reps) {
    if (r.failed) continue;
    pooled.insert(pooled.end(), r.n_prop.begin(), r.n_prop.end());
    rct_sizes.push_back(r.n_rct);
  }
  std::sort(rct_sizes.begin(), rct_sizes.end());
  const long n_rct = rct_sizes[nearest_rank(0.5, rct_sizes.size()) - 1];
  const auto grid_ns = build_grid(pooled, n_rct);

  PowerGrid grid;
  grid.points.reserve(grid_ns.size());
  for (long gn : grid_ns) {
    GridPoint pt = estimate_power(sc, gn, cfg.reps, inp, *cfg.seed, cfg.workers);
    std::printf("grid n=%ld power=%.4f exclusions=%zu%s\n", pt.n, pt.power,
                pt.exclusions, pt.flagged ? " [high exclusion rate]" : "");
    grid.points.push_back(pt);
  }

  const PowerGrid used = cfg.isotonic ? isotonic_smooth(grid) : grid;
  const ValidationReport report = summarize(sc.name(), reps, used, choices, target);

  const auto dir = ensure_out_dir(cfg);
  {
    std::ofstream os(dir / "report.csv", std::ios::binary);
    write_report_csv(os, report);
  }
  {
    std::ofstream os(dir / "grid.csv", std::ios::binary);
    write_grid_csv(os, grid);
  }
  if (cfg.isotonic) {
    std::ofstream os(dir / "grid_smoothed.csv", std::ios::binary);
    write_grid_csv(os, used);
  }
  {
    std::string csv = "replicate,v_pilot,n_rct,choice,v_stable,n_prop\n";
    char buf[160];
    for (const auto& r : reps) {
      if (r.failed) continue;
      for (std::size_t c = 0; c < choices.size(); ++c) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%ld,%s,%.10g,%ld\n", r.id,
                      r.v_pilot, r.n_rct, choices[c].label().c_str(),
                      r.v_stable[c], r.n_prop[c]);
        csv += buf;
      }
    }
    write_text(dir / "replicates.csv", csv);
  }
  echo_config(dir, cfg, "validate");

  for (const auto& row : report.rows)
    std::printf("%-14s n=%.1f (%ld) power=%.3f (%.3f, %.3f) hit=%.3f\n",
                row.stability_choice.c_str(), row.n_mean, row.n_median,
                row.power_mean, row.power_lo95, row.power_hi95, row.hit_rate);
  std::printf("outputs in %s\n", dir.string().c_str());
}

int dispatch(const std::string& command, const nlohmann::json& merged) {
  try {
    const RunConfig cfg = RunConfig::from_json(merged);
    if (command == "design")
      cmd_design(cfg);
    else if (command == "benchmark")
      cmd_benchmark(cfg);
    else if (command == "simulate")
      cmd_simulate(cfg);
    else if (command == "validate")
      cmd_validate(cfg);
    else
      throw DataError("unknown command: " + command);
    return 0;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace iptw
