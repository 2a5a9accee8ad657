#pragma once

#include <optional>

#include "iptw/dataset.hpp"

namespace iptw {

// Detectable effect and error rates for the sample-size formula.
struct DesignInputs {
  double delta = 0.0;  // effect on the link scale, nonzero
  double alpha = 0.05;
  double power = 0.80;

  void validate() const;
  double z_sum() const;  // z_{1-alpha/2} + z_{power}
};

// Parameters for the RCT-style benchmark variances. Arm-1 parameters may
// be given directly or derived from delta; when both are supplied they
// must agree on the link scale to 1e-8.
struct RCTParams {
  OutcomeKind kind = OutcomeKind::binary;
  double rho = 0.5;  // treated fraction

  double p0 = 0.0;  // binary
  std::optional<double> p1;

  double lambda0 = 0.0;  // count
  std::optional<double> lambda1;

  double sigma2 = 0.0;  // continuous

  std::optional<double> delta;
};

// SE required so that a two-sided level-alpha Wald test of delta attains
// the target power: |delta| / (z_{1-alpha/2} + z_{power}).
double se_target(const DesignInputs& inp);

// n = ceil((z_{1-alpha/2} + z_{power})^2 * V / delta^2).
long required_n(double v, const DesignInputs& inp);

double rct_variance(const RCTParams& params);

}  // namespace iptw
