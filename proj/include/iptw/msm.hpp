#pragma once

#include <Eigen/Dense>

#include "iptw/dataset.hpp"
#include "iptw/link.hpp"

namespace iptw {

struct MSMFit {
  Eigen::Vector2d beta_hat = Eigen::Vector2d::Zero();
  double mu0 = 0.0;     // weighted control-arm mean, mean scale
  double mu1 = 0.0;     // weighted treated-arm mean, mean scale
  double sum_w0 = 0.0;  // total weight, control arm
  double sum_w1 = 0.0;  // total weight, treated arm

  double mu_at(double t) const { return t > 0.5 ? mu1 : mu0; }
};

// Solve sum_i D_i w_i {y_i - g^{-1}(b0 + b1 t_i)} = 0 for (b0, b1),
// D_i = (1, t_i)'. Throws NonEstimableError when an arm has zero total
// weight or a weighted arm mean sits outside the link domain.
MSMFit fit_msm(const Dataset& d, const Eigen::VectorXd& w, const Link& link);

// Per-subject scores U_i = D_i w_i {y_i - g^{-1}(b0 + b1 t_i)}, one row per
// subject. At the fit_msm solution the column sums vanish.
Eigen::MatrixXd score_beta(const Eigen::Vector2d& beta, const Dataset& d,
                           const Eigen::VectorXd& w, const Link& link);

}  // namespace iptw
