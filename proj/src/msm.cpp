#include "iptw/msm.hpp"

#include <cmath>

#include "iptw/errors.hpp"

namespace iptw {

// Derivation of the closed form. The estimating equation is
//   sum_i D_i w_i {y_i - g^{-1}(b0 + b1 t_i)} = 0,  D_i = (1, t_i)'.
// With binary t the second coordinate is the treated-arm subsum
//   sum_{t_i=1} w_i {y_i - g^{-1}(b0 + b1)} = 0,
// and subtracting it from the first coordinate leaves
//   sum_{t_i=0} w_i {y_i - g^{-1}(b0)} = 0.
// Each equation pins the inverse-link value to a weighted arm mean:
//   g^{-1}(b0) = mu0_hat,  g^{-1}(b0 + b1) = mu1_hat,
// so b0 = g(mu0_hat) and b1 = g(mu1_hat) - g(mu0_hat). The saturated
// two-parameter model makes this exact; no iteration is involved.
MSMFit fit_msm(const Dataset& d, const Eigen::VectorXd& w, const Link& link) {
  const Eigen::Index n = d.n();
  if (w.size() != n) throw DataError("weight vector length does not match dataset");

  long double sw[2] = {0.0L, 0.0L};
  long double swy[2] = {0.0L, 0.0L};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = w[i];
    if (!(std::isfinite(wi) && wi >= 0.0))
      throw DataError("weights must be finite and nonnegative");
    const int arm = d.t()[i] > 0.5 ? 1 : 0;
    sw[arm] += wi;
    swy[arm] += static_cast<long double>(wi) * d.y()[i];
  }
  for (int arm = 0; arm < 2; ++arm) {
    if (!(sw[arm] > 0.0L))
      throw NonEstimableError("non-estimable replicate: arm " + std::to_string(arm) +
                              " has zero total weight");
  }

  MSMFit fit;
  fit.sum_w0 = static_cast<double>(sw[0]);
  fit.sum_w1 = static_cast<double>(sw[1]);
  fit.mu0 = static_cast<double>(swy[0] / sw[0]);
  fit.mu1 = static_cast<double>(swy[1] / sw[1]);

  if (!link.in_domain(fit.mu0) || !link.in_domain(fit.mu1))
    throw NonEstimableError("non-estimable replicate: weighted arm mean outside " +
                            link.name() + " domain");

  const double b0 = link.g(fit.mu0);
  const double b1 = link.g(fit.mu1) - b0;
  if (!std::isfinite(b0) || !std::isfinite(b1))
    throw NonEstimableError("non-estimable replicate: coefficient not finite");
  fit.beta_hat << b0, b1;
  return fit;
}

Eigen::MatrixXd score_beta(const Eigen::Vector2d& beta, const Dataset& d,
                           const Eigen::VectorXd& w, const Link& link) {
  const Eigen::Index n = d.n();
  if (w.size() != n) throw DataError("weight vector length does not match dataset");

  const double mu0 = link.g_inv(beta[0]);
  const double mu1 = link.g_inv(beta[0] + beta[1]);
  Eigen::MatrixXd u(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = d.t()[i];
    const double mui = ti > 0.5 ? mu1 : mu0;
    const double r = w[i] * (d.y()[i] - mui);
    u(i, 0) = r;
    u(i, 1) = r * ti;
  }
  return u;
}

}  // namespace iptw
