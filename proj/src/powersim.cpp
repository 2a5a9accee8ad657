#include "iptw/powersim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"
#include "iptw/parallel.hpp"
#include "iptw/sandwich.hpp"

namespace iptw {

std::vector<StabilityChoice> StabilityChoice::default_choices() {
  std::vector<StabilityChoice> out;
  out.push_back(functional(StabilityFunctional::quantile(0.5)));
  out.push_back(functional(StabilityFunctional::quantile(0.7)));
  out.push_back(functional(StabilityFunctional::quantile(0.9)));
  out.push_back(functional(StabilityFunctional::mean()));
  UCBSpec med;
  med.phi = StabilityFunctional::quantile(0.5);
  out.push_back(ucb_of(med));
  UCBSpec mean;
  mean.phi = StabilityFunctional::mean();
  out.push_back(ucb_of(mean));
  return out;
}

std::string StabilityChoice::label() const {
  if (kind == Kind::functional) return f.label();
  return "UCB-" + u.phi.label();
}

std::vector<DesignReplicate> run_design_replicates(
    const Scenario& sc, std::size_t R, std::size_t n_pilot, std::size_t B,
    const std::vector<StabilityChoice>& choices, const DesignInputs& inp,
    std::uint64_t seed, int workers) {
  if (!sc.calibrated()) throw DataError("scenario not calibrated");
  if (R == 0) throw DataError("replicate count R must be positive");
  inp.validate();

  const PSSpec spec = sc.analysis_spec();
  const Link link = sc.link();
  std::vector<DesignReplicate> reps(R);

  parallel_for(R, workers, [&](std::size_t r) {
    DesignReplicate& rep = reps[r];
    rep.id = r;
    rep.pilot_seed = derive_seed(seed, stream::pilot, r);
    try {
      Engine eng = make_engine(rep.pilot_seed);
      const Dataset pilot = sc.generate(n_pilot, eng);
      const StackedFit fit = stacked_fit(pilot, spec, link, Estimand::ate);
      rep.v_pilot = fit.lsvf;

      const BootstrapDistribution dist =
          bootstrap_lsvf(pilot, spec, link, Estimand::ate, B, rep.pilot_seed, 1);

      rep.v_stable.reserve(choices.size());
      rep.n_prop.reserve(choices.size());
      std::size_t ucb_index = 0;
      for (const auto& choice : choices) {
        double v;
        if (choice.kind == StabilityChoice::Kind::functional) {
          v = apply_functional(dist, choice.f);
        } else {
          Engine ueng = make_engine(rep.pilot_seed, stream::ucb, ucb_index++);
          v = ucb(dist, choice.u, ueng);
        }
        rep.v_stable.push_back(v);
        rep.n_prop.push_back(required_n(v, inp));
      }
      rep.n_rct = required_n(sc.benchmark_variance(pilot), inp);
    } catch (const FitError& e) {
      rep.failed = true;
      rep.failure = e.what();
    } catch (const NumericError& e) {
      rep.failed = true;
      rep.failure = e.what();
    }
  });

  std::size_t failed = 0;
  for (const auto& rep : reps)
    if (rep.failed) ++failed;
  if (static_cast<double>(failed) > 0.05 * static_cast<double>(R)) {
    std::string first;
    for (const auto& rep : reps)
      if (rep.failed) {
        first = rep.failure;
        break;
      }
    throw FitError("design replication aborted: " + std::to_string(failed) +
                   " of " + std::to_string(R) + " pilots failed (" + first + ")");
  }
  return reps;
}

std::vector<long> build_grid(std::vector<long> pooled, long n_rct) {
  if (pooled.empty()) throw DataError("pooled sample sizes empty");
  std::sort(pooled.begin(), pooled.end());
  long double acc = 0.0L;
  for (long v : pooled) acc += v;
  const double mean = static_cast<double>(acc / static_cast<long double>(pooled.size()));

  std::vector<long> grid;
  grid.push_back(pooled.front());
  for (double q : {0.1, 0.25, 0.5}) grid.push_back(pooled[nearest_rank(q, pooled.size()) - 1]);
  grid.push_back(static_cast<long>(std::ceil(mean)));
  for (double q : {0.75, 0.9}) grid.push_back(pooled[nearest_rank(q, pooled.size()) - 1]);
  grid.push_back(pooled.back());
  grid.push_back(n_rct);

  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

GridPoint estimate_power(const Scenario& sc, long n, std::size_t reps,
                         const DesignInputs& inp, std::uint64_t seed,
                         int workers) {
  if (!sc.calibrated()) throw DataError("scenario not calibrated");
  if (n < 4) throw DataError("power simulation needs n >= 4");
  if (reps == 0) throw DataError("replicate count must be positive");
  inp.validate();

  const PSSpec spec = sc.analysis_spec();
  const Link link = sc.link();
  const double zcrit = normal_quantile(1.0 - inp.alpha / 2.0);
  const std::uint64_t point_seed =
      derive_seed(seed, stream::power_point, static_cast<std::uint64_t>(n));

  // 0 = no rejection, 1 = rejection, 2 = excluded.
  std::vector<unsigned char> outcome(reps, 0);
  parallel_for(reps, workers, [&](std::size_t j) {
    Engine eng = make_engine(point_seed, stream::power_rep, j);
    try {
      const Dataset d = sc.generate(static_cast<std::size_t>(n), eng);
      const StackedFit fit = stacked_fit(d, spec, link, Estimand::ate);
      if (!(fit.var_beta1 > 0.0)) {
        outcome[j] = 2;
        return;
      }
      const double wald =
          std::abs(fit.msm.beta_hat[1]) / std::sqrt(fit.var_beta1);
      outcome[j] = wald > zcrit ? 1 : 0;
    } catch (const FitError&) {
      outcome[j] = 2;
    } catch (const NumericError&) {
      outcome[j] = 2;
    }
  });

  GridPoint pt;
  pt.n = n;
  pt.reps = reps;
  for (unsigned char o : outcome) {
    if (o == 1) ++pt.rejections;
    if (o == 2) ++pt.exclusions;
  }
  if (pt.exclusions == reps)
    throw FitError("all power replicates non-estimable at n=" + std::to_string(n));
  pt.power = static_cast<double>(pt.rejections) /
             static_cast<double>(reps - pt.exclusions);
  pt.flagged = 10 * pt.exclusions > reps;
  return pt;
}

PowerGrid estimate_power_grid(const Scenario& sc, const std::vector<long>& grid,
                              std::size_t reps, const DesignInputs& inp,
                              std::uint64_t seed, int workers) {
  PowerGrid out;
  out.points.reserve(grid.size());
  for (long n : grid) out.points.push_back(estimate_power(sc, n, reps, inp, seed, workers));
  return out;
}

double interpolate_power(const PowerGrid& grid, double n) {
  if (grid.points.empty()) throw DataError("empty power grid");
  const auto& pts = grid.points;
  if (n <= pts.front().n) return pts.front().power;
  if (n >= pts.back().n) return pts.back().power;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (n <= pts[i].n) {
      const double x0 = static_cast<double>(pts[i - 1].n);
      const double x1 = static_cast<double>(pts[i].n);
      const double w = (n - x0) / (x1 - x0);
      return (1.0 - w) * pts[i - 1].power + w * pts[i].power;
    }
  }
  return pts.back().power;
}

PowerGrid isotonic_smooth(const PowerGrid& grid) {
  PowerGrid out = grid;
  const std::size_t m = out.points.size();
  if (m < 2) return out;
  // Pool adjacent violators on (power, weight = effective reps).
  std::vector<double> level, weight;
  std::vector<std::size_t> count;
  for (const auto& pt : out.points) {
    double lv = pt.power;
    double wt = static_cast<double>(pt.reps - pt.exclusions);
    std::size_t ct = 1;
    while (!level.empty() && level.back() > lv) {
      lv = (level.back() * weight.back() + lv * wt) / (weight.back() + wt);
      wt += weight.back();
      ct += count.back();
      level.pop_back();
      weight.pop_back();
      count.pop_back();
    }
    level.push_back(lv);
    weight.push_back(wt);
    count.push_back(ct);
  }
  std::size_t k = 0;
  for (std::size_t blk = 0; blk < level.size(); ++blk)
    for (std::size_t j = 0; j < count[blk]; ++j) out.points[k++].power = level[blk];
  return out;
}

double hit_rate(const std::vector<DesignReplicate>& reps, const PowerGrid& grid,
                std::size_t choice_index, double target) {
  std::size_t used = 0, hits = 0;
  for (const auto& rep : reps) {
    if (rep.failed) continue;
    if (choice_index >= rep.n_prop.size())
      throw DataError("stability choice index out of range");
    ++used;
    if (interpolate_power(grid, static_cast<double>(rep.n_prop[choice_index])) >=
        target)
      ++hits;
  }
  if (used == 0) throw DataError("no successful replicates");
  return static_cast<double>(hits) / static_cast<double>(used);
}

namespace {

struct SizeSummary {
  double mean = 0.0;
  long median = 0;
};

SizeSummary summarize_sizes(std::vector<long> values) {
  SizeSummary s;
  long double acc = 0.0L;
  for (long v : values) acc += v;
  s.mean = static_cast<double>(acc / static_cast<long double>(values.size()));
  std::sort(values.begin(), values.end());
  s.median = values[nearest_rank(0.5, values.size()) - 1];
  return s;
}

struct PowerSummary {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

PowerSummary summarize_powers(std::vector<double> values) {
  PowerSummary s;
  s.mean = mean_of(values);
  std::sort(values.begin(), values.end());
  s.lo = nearest_rank_quantile(values, 0.025);
  s.hi = nearest_rank_quantile(values, 0.975);
  return s;
}

}  // namespace

ValidationReport summarize(const std::string& scenario_name,
                           const std::vector<DesignReplicate>& reps,
                           const PowerGrid& grid,
                           const std::vector<StabilityChoice>& choices,
                           double target) {
  ValidationReport report;
  for (std::size_t c = 0; c < choices.size(); ++c) {
    std::vector<long> sizes;
    std::vector<double> powers;
    for (const auto& rep : reps) {
      if (rep.failed) continue;
      sizes.push_back(rep.n_prop[c]);
      powers.push_back(interpolate_power(grid, static_cast<double>(rep.n_prop[c])));
    }
    if (sizes.empty()) throw DataError("no successful replicates");
    const SizeSummary ss = summarize_sizes(sizes);
    const PowerSummary ps = summarize_powers(powers);
    ReportRow row;
    row.scenario = scenario_name;
    row.stability_choice = choices[c].label();
    row.n_mean = ss.mean;
    row.n_median = ss.median;
    row.power_mean = ps.mean;
    row.power_lo95 = ps.lo;
    row.power_hi95 = ps.hi;
    row.hit_rate = hit_rate(reps, grid, c, target);
    report.rows.push_back(row);
  }

  // Benchmark row.
  std::vector<long> sizes;
  std::vector<double> powers;
  std::size_t hits = 0;
  for (const auto& rep : reps) {
    if (rep.failed) continue;
    sizes.push_back(rep.n_rct);
    const double pw = interpolate_power(grid, static_cast<double>(rep.n_rct));
    powers.push_back(pw);
    if (pw >= target) ++hits;
  }
  if (sizes.empty()) throw DataError("no successful replicates");
  const SizeSummary ss = summarize_sizes(sizes);
  const PowerSummary ps = summarize_powers(powers);
  ReportRow row;
  row.scenario = scenario_name;
  row.stability_choice = "RCT benchmark";
  row.n_mean = ss.mean;
  row.n_median = ss.median;
  row.power_mean = ps.mean;
  row.power_lo95 = ps.lo;
  row.power_hi95 = ps.hi;
  row.hit_rate = static_cast<double>(hits) / static_cast<double>(sizes.size());
  report.rows.push_back(row);
  return report;
}

void write_report_csv(std::ostream& os, const ValidationReport& report) {
  os << "scenario,stability_choice,n_mean,n_median,power_mean,power_lo95,"
        "power_hi95,hit_rate\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.2f,%ld,%.4f,%.4f,%.4f,%.4f\n",
                  r.scenario.c_str(), r.stability_choice.c_str(), r.n_mean,
                  r.n_median, r.power_mean, r.power_lo95, r.power_hi95,
                  r.hit_rate);
    os << buf;
  }
}

void write_grid_csv(std::ostream& os, const PowerGrid& grid) {
  os << "n,power,reps,exclusions\n";
  char buf[128];
  for (const auto& pt : grid.points) {
    std::snprintf(buf, sizeof(buf), "%ld,%.6f,%zu,%zu\n", pt.n, pt.power,
                  pt.reps, pt.exclusions);
    os << buf;
  }
}

}  // namespace iptw
