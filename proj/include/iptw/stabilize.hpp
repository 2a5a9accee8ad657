#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "iptw/dataset.hpp"
#include "iptw/link.hpp"
#include "iptw/propensity.hpp"
#include "iptw/rng.hpp"

namespace iptw {

// First-level bootstrap draws of the large-sample variance factor.
struct BootstrapDistribution {
  std::vector<double> values;  // V*(b) for succeeded slots, in slot order
  std::size_t n_pilot = 0;
  std::size_t B_requested = 0;
  std::size_t failures = 0;  // slots abandoned after the redraw limit
  std::size_t redraws = 0;   // extra resamples drawn across all slots
};

struct StabilityFunctional {
  enum class Kind { quantile, mean };

  static StabilityFunctional quantile(double q);
  static StabilityFunctional mean() { return StabilityFunctional{Kind::mean, 0.0}; }

  std::string label() const;  // "Q0.5", "Q0.7", "mean", ...

  Kind kind = Kind::mean;
  double q = 0.0;
};

struct UCBSpec {
  StabilityFunctional phi = StabilityFunctional::quantile(0.5);
  std::size_t B_ucb = 1000;
  double gamma_ucb = 0.05;
};

// Resample the pilot B times, refit the full stacked pipeline on each
// resample, and record V*(b) = n_pilot * Var*(beta1_hat). Degenerate
// resamples are redrawn up to 10 times per slot; more than 5% unrecovered
// slots aborts. Slot b uses a substream keyed by (seed, b), so results do
// not depend on the worker count.
BootstrapDistribution bootstrap_lsvf(const Dataset& pilot, const PSSpec& spec,
                                     const Link& link, Estimand estimand,
                                     std::size_t B, std::uint64_t seed,
                                     int workers = 1);

// Reduce the bootstrap draws to a design variance. Quantiles use the
// nearest-rank convention: the ceil(q*m)-th order statistic.
double apply_functional(const BootstrapDistribution& dist,
                        const StabilityFunctional& f);

// Second-level bootstrap upper confidence bound: resample the scalar list
// B_ucb times, apply phi to each resample, and return the nearest-rank
// (1 - gamma_ucb) quantile of the phi* values. Optionally exposes the phi*
// list for inspection.
double ucb(const BootstrapDistribution& dist, const UCBSpec& spec, Engine& eng,
           std::vector<double>* phi_star_out = nullptr);

}  // namespace iptw
