#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>

#include "iptw/dataset.hpp"
#include "iptw/design.hpp"
#include "iptw/link.hpp"
#include "iptw/propensity.hpp"
#include "iptw/rng.hpp"

namespace iptw {

enum class PropensityMode { confounded, constant };

// Case study presets. Coefficients are fixed design constants; the
// calibrated fields are filled by calibrate().

struct BinaryScenario {
  double eta1 = 0.8;
  double rho = 0.25;
  double beta_x = 0.5;
  double p0 = 0.03;
  double delta = std::log(2.0);
  // calibrated
  double gamma0 = 0.0;
  double psi = 0.0;
};

struct CountScenario {
  double eta1 = 0.5;
  double rho = 0.67;
  double beta_x = 0.3;
  double lambda0 = 0.008;
  double delta = std::log(0.5);
};

struct ContinuousScenario {
  double rho = 0.36;
  Eigen::Vector3d bern_p{0.23, 0.11, 0.54};
  Eigen::Vector4d ps_slope = 0.6 * Eigen::Vector4d{0.7, 0.8, 1.0, 0.5};
  double mean0 = 18000.0;
  Eigen::Vector4d mean_slope{1200.0, 3500.0, 4500.0, 2000.0};
  double delta = 1500.0;
  double scale0 = 3000.0;
  double scale_x = 0.15;
  double scale_b1 = 0.10;
  double scale_b2 = 0.15;
  int nu = 4;
};

// Empirical intercept calibration: solves
// (1/n) sum_i expit(eta0 + slope'x_i) = rho by bisection to 1e-10.
double calibrate_eta0(const Eigen::MatrixXd& x, const Eigen::VectorXd& slope,
                      double rho);

// Population calibration for the binary outcome model under X ~ N(0,1):
// gamma0 solves E[expit(gamma0 + beta_x X)] = p0 and psi solves
// logit E[expit(gamma0 + beta_x X + psi)] - logit(p0) = delta, both via
// 64-node Gauss-Hermite quadrature and bisection.
std::pair<double, double> calibrate_outcome_binary(double p0, double beta_x,
                                                   double delta);

class Scenario {
 public:
  // binary_mcm, binary_sga, count_npe, continuous_nsclc
  static Scenario preset(const std::string& name);

  const std::string& name() const { return name_; }
  OutcomeKind kind() const;
  Link link() const { return Link::canonical_for(kind()); }
  PropensityMode mode() const { return mode_; }
  void set_mode(PropensityMode m) { mode_ = m; }

  double delta() const;       // true link-scale effect
  void set_null_effect();     // zero the treatment effect
  double rho() const;         // target treatment prevalence
  std::size_t default_n_pilot() const { return n_pilot_; }
  std::size_t covariate_count() const;

  // PS model used at analysis time: all covariates, or intercept-only in
  // constant mode.
  PSSpec analysis_spec() const;

  void calibrate();
  bool calibrated() const { return calibrated_; }

  const BinaryScenario* binary() const { return std::get_if<BinaryScenario>(&model_); }
  const CountScenario* count() const { return std::get_if<CountScenario>(&model_); }
  const ContinuousScenario* continuous() const {
    return std::get_if<ContinuousScenario>(&model_);
  }
  BinaryScenario* binary() { return std::get_if<BinaryScenario>(&model_); }
  CountScenario* count() { return std::get_if<CountScenario>(&model_); }
  ContinuousScenario* continuous() { return std::get_if<ContinuousScenario>(&model_); }

  Dataset generate(std::size_t n, Engine& eng, double* eta0_out = nullptr) const;

  // One covariate draw with both potential outcomes; test oracle hook.
  std::pair<double, double> draw_potential_outcomes(Engine& eng) const;

  // RCT-style benchmark variance. Binary and count use the preset design
  // constants; continuous estimates sigma^2 from the pilot as the pooled
  // per-arm mean-centered sample variance (denominator n-2).
  double benchmark_variance(const Dataset& pilot) const;

 private:
  Scenario() = default;

  std::string name_;
  std::variant<BinaryScenario, CountScenario, ContinuousScenario> model_;
  PropensityMode mode_ = PropensityMode::confounded;
  std::size_t n_pilot_ = 0;
  bool calibrated_ = false;
};

// Pooled two-sample variance of y: arm-mean-centered, denominator n-2.
double pooled_outcome_variance(const Dataset& d);

}  // namespace iptw
