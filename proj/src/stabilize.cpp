#include "iptw/stabilize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"
#include "iptw/parallel.hpp"
#include "iptw/sandwich.hpp"

namespace iptw {

StabilityFunctional StabilityFunctional::quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DataError("quantile level must lie in (0,1)");
  return StabilityFunctional{Kind::quantile, q};
}

std::string StabilityFunctional::label() const {
  if (kind == Kind::mean) return "mean";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Q%g", q);
  return buf;
}

namespace {

constexpr int kMaxAttempts = 10;

struct SlotResult {
  std::optional<double> value;
  std::size_t redraws = 0;
};

SlotResult run_slot(const Dataset& pilot, const PSSpec& spec, const Link& link,
                    Estimand estimand, std::uint64_t seed, std::size_t b) {
  SlotResult out;
  Engine eng = make_engine(seed, stream::bootstrap, b);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (attempt > 0) ++out.redraws;
    Dataset star = resample(pilot, eng);
    try {
      const StackedFit fit = stacked_fit(star, spec, link, estimand);
      if (!std::isfinite(fit.lsvf)) continue;
      out.value = fit.lsvf;
      return out;
    } catch (const FitError&) {
    } catch (const NumericError&) {
    }
  }
  return out;
}

}  // namespace

BootstrapDistribution bootstrap_lsvf(const Dataset& pilot, const PSSpec& spec,
                                     const Link& link, Estimand estimand,
                                     std::size_t B, std::uint64_t seed,
                                     int workers) {
  if (B == 0) throw DataError("bootstrap size B must be positive");
  std::vector<SlotResult> slots(B);
  parallel_for(B, workers, [&](std::size_t b) {
    slots[b] = run_slot(pilot, spec, link, estimand, seed, b);
  });

  BootstrapDistribution dist;
  dist.n_pilot = static_cast<std::size_t>(pilot.n());
  dist.B_requested = B;
  dist.values.reserve(B);
  for (const auto& s : slots) {
    dist.redraws += s.redraws;
    if (s.value)
      dist.values.push_back(*s.value);
    else
      ++dist.failures;
  }
  if (static_cast<double>(dist.failures) > 0.05 * static_cast<double>(B))
    throw FitError("bootstrap aborted: " + std::to_string(dist.failures) + " of " +
                   std::to_string(B) +
                   " resamples non-estimable after redraws; pilot too sparse");
  return dist;
}

double apply_functional(const BootstrapDistribution& dist,
                        const StabilityFunctional& f) {
  if (dist.values.empty()) throw DataError("empty bootstrap distribution");
  if (f.kind == StabilityFunctional::Kind::mean) return mean_of(dist.values);
  std::vector<double> sorted = dist.values;
  std::sort(sorted.begin(), sorted.end());
  return nearest_rank_quantile(sorted, f.q);
}

double ucb(const BootstrapDistribution& dist, const UCBSpec& spec, Engine& eng,
           std::vector<double>* phi_star_out) {
  if (dist.values.empty()) throw DataError("empty bootstrap distribution");
  if (spec.B_ucb == 0) throw DataError("B_ucb must be positive");
  if (!(spec.gamma_ucb > 0.0 && spec.gamma_ucb < 1.0))
    throw DataError("gamma_ucb must lie in (0,1)");

  const std::size_t m = dist.values.size();
  std::vector<double> star(m);
  std::vector<double> phi_star;
  phi_star.reserve(spec.B_ucb);
  for (std::size_t k = 0; k < spec.B_ucb; ++k) {
    for (std::size_t i = 0; i < m; ++i) star[i] = dist.values[draw_index(eng, m)];
    if (spec.phi.kind == StabilityFunctional::Kind::mean) {
      phi_star.push_back(mean_of(star));
    } else {
      std::sort(star.begin(), star.end());
      phi_star.push_back(nearest_rank_quantile(star, spec.phi.q));
    }
  }
  std::vector<double> sorted = phi_star;
  std::sort(sorted.begin(), sorted.end());
  if (phi_star_out) *phi_star_out = std::move(phi_star);
  return nearest_rank_quantile(sorted, 1.0 - spec.gamma_ucb);
}

}  // namespace iptw
