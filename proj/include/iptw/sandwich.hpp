#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "iptw/dataset.hpp"
#include "iptw/link.hpp"
#include "iptw/msm.hpp"
#include "iptw/propensity.hpp"

namespace iptw {

// Joint M-estimation result for theta = (eta, beta). A and B are the
// averaged Jacobian and outer-product matrices of the stacked estimating
// function, Sigma = A^{-1} B A^{-T} is the per-observation asymptotic
// covariance, and lsvf = n * var_beta1 is the large-sample variance factor
// for the treatment coefficient.
struct StackedFit {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Sigma;
  double var_beta1 = 0.0;
  double lsvf = 0.0;
  std::size_t n = 0;
  PSFit ps;
  MSMFit msm;
};

// Averaged Jacobian of the stacked scores in theta = (eta, beta). The
// upper-right p_eta x 2 block is structurally zero: the propensity score
// does not involve beta.
Eigen::MatrixXd assemble_A(const Dataset& d, const PSFit& ps, const MSMFit& msm,
                           const Link& link, Estimand estimand);

// Averaged outer product B = (1/n) sum_i U_i U_i' of the stacked scores.
Eigen::MatrixXd assemble_B(const Dataset& d, const PSFit& ps, const MSMFit& msm,
                           const Link& link, Estimand estimand);

// Full pipeline: propensity fit, weights, MSM fit, sandwich covariance.
StackedFit stacked_fit(const Dataset& d, const PSSpec& spec, const Link& link,
                       Estimand estimand);

}  // namespace iptw
