#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "iptw/design.hpp"
#include "iptw/scenarios.hpp"
#include "iptw/stabilize.hpp"

namespace iptw {

// A design value selection rule: a plain stability functional applied to
// the bootstrap distribution, or a UCB wrapper around one.
struct StabilityChoice {
  enum class Kind { functional, ucb };

  static StabilityChoice functional(StabilityFunctional f) {
    return StabilityChoice{Kind::functional, f, UCBSpec{}};
  }
  static StabilityChoice ucb_of(UCBSpec u) {
    return StabilityChoice{Kind::ucb, StabilityFunctional::mean(), u};
  }
  // Q0.5, Q0.7, Q0.9, mean, UCB-Q0.5, UCB-mean.
  static std::vector<StabilityChoice> default_choices();

  std::string label() const;

  Kind kind = Kind::functional;
  StabilityFunctional f = StabilityFunctional::mean();
  UCBSpec u;
};

struct DesignReplicate {
  std::size_t id = 0;
  std::uint64_t pilot_seed = 0;
  double v_pilot = 0.0;
  std::vector<double> v_stable;  // per stability choice
  std::vector<long> n_prop;      // per stability choice
  long n_rct = 0;
  bool failed = false;
  std::string failure;
};

struct GridPoint {
  long n = 0;
  double power = 0.0;
  std::size_t reps = 0;
  std::size_t rejections = 0;
  std::size_t exclusions = 0;
  bool flagged = false;  // exclusion rate above 10%
};

struct PowerGrid {
  std::vector<GridPoint> points;  // strictly increasing in n
};

struct ReportRow {
  std::string scenario;
  std::string stability_choice;
  double n_mean = 0.0;
  long n_median = 0;
  double power_mean = 0.0;
  double power_lo95 = 0.0;
  double power_hi95 = 0.0;
  double hit_rate = 0.0;
};

struct ValidationReport {
  std::vector<ReportRow> rows;
};

// Generate R pilots, run the two-level bootstrap on each, apply every
// stability choice, and convert to sample sizes. Pilots whose bootstrap
// aborts are marked failed; more than 5% failed replicates propagates the
// abort. Replicate r derives every stream from (seed, r), independent of
// the worker count.
std::vector<DesignReplicate> run_design_replicates(
    const Scenario& sc, std::size_t R, std::size_t n_pilot, std::size_t B,
    const std::vector<StabilityChoice>& choices, const DesignInputs& inp,
    std::uint64_t seed, int workers = 1);

// Sparse grid: {min, Q0.1, Q0.25, Q0.5, mean (ceiling), Q0.75, Q0.9, max}
// of the pooled sizes plus the benchmark, deduplicated and sorted.
std::vector<long> build_grid(std::vector<long> pooled, long n_rct);

// Monte Carlo power of the stacked-sandwich Wald test at size n. Draws
// are keyed by (seed, n, replicate); non-estimable replicates are
// excluded from the denominator and counted.
GridPoint estimate_power(const Scenario& sc, long n, std::size_t reps,
                         const DesignInputs& inp, std::uint64_t seed,
                         int workers = 1);

PowerGrid estimate_power_grid(const Scenario& sc, const std::vector<long>& grid,
                              std::size_t reps, const DesignInputs& inp,
                              std::uint64_t seed, int workers = 1);

// Piecewise-linear in n, clamped to the endpoint values outside the grid.
double interpolate_power(const PowerGrid& grid, double n);

// Weighted pool-adjacent-violators smoothing of the power curve
// (weights = effective replicates per point).
PowerGrid isotonic_smooth(const PowerGrid& grid);

// Fraction of non-failed replicates whose interpolated power at
// n_prop[choice] meets the target.
double hit_rate(const std::vector<DesignReplicate>& reps, const PowerGrid& grid,
                std::size_t choice_index, double target);

// One row per stability choice (configured order) plus the benchmark row.
ValidationReport summarize(const std::string& scenario_name,
                           const std::vector<DesignReplicate>& reps,
                           const PowerGrid& grid,
                           const std::vector<StabilityChoice>& choices,
                           double target);

void write_report_csv(std::ostream& os, const ValidationReport& report);
void write_grid_csv(std::ostream& os, const PowerGrid& grid);

}  // namespace iptw
