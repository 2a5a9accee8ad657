#pragma once

#include <Eigen/Dense>
#include <vector>

#include "iptw/dataset.hpp"

namespace iptw {

enum class Estimand { ate, att };

Estimand estimand_from_string(const std::string& s);

// Parametric logistic propensity model e(x; eta) = expit(eta' * design
// row). The design always carries an intercept; an empty covariate list
// gives the intercept-only model.
struct PSSpec {
  std::vector<Eigen::Index> covariate_columns;

  static PSSpec intercept_only() { return PSSpec{}; }
  static PSSpec all_covariates(const Dataset& d);
  static PSSpec all_covariates(Eigen::Index p);

  Eigen::Index dim() const {
    return 1 + static_cast<Eigen::Index>(covariate_columns.size());
  }
  // n x (1 + k) design, intercept column first.
  Eigen::MatrixXd design(const Dataset& d) const;
};

struct PSFit {
  Eigen::VectorXd eta_hat;
  Eigen::VectorXd fitted_e;   // strictly inside (0,1)
  bool converged = false;
  int iterations = 0;
  Eigen::MatrixXd design;     // per-subject PS design rows
};

// Newton (IRLS) solver with step-halving, started at eta = 0.
// Converged when the max-abs summed score falls below 1e-8 within 50
// iterations. Throws FitError on non-convergence, detected separation
// (||eta|| > 1e3), or fitted probabilities within 1e-12 of {0,1}.
PSFit fit_logistic(const Dataset& d, const PSSpec& spec);

// Score Jacobian block: -(1/n) sum_i e_i (1-e_i) X_i X_i'.
Eigen::MatrixXd jacobian_eta(const PSFit& fit);

// IPTW weights. ATE: t/e + (1-t)/(1-e); ATT: t + (1-t) e/(1-e).
// Errors if any weight exceeds 1e12.
Eigen::VectorXd weights(const PSFit& fit, const Dataset& d, Estimand estimand);

}  // namespace iptw
