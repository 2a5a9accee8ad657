#include "iptw/sandwich.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

#include "iptw/errors.hpp"

namespace iptw {

namespace {

// d w_i / d eta' = c_i * X_i' (chain rule through e_i = expit(X_i' eta),
// de/deta = e(1-e) X).
double weight_eta_slope(double t, double e, Estimand estimand) {
  if (estimand == Estimand::ate)
    return t > 0.5 ? -(1.0 - e) / e : e / (1.0 - e);
  return t > 0.5 ? 0.0 : e / (1.0 - e);
}

}  // namespace

Eigen::MatrixXd assemble_A(const Dataset& d, const PSFit& ps, const MSMFit& msm,
                           const Link& link, Estimand estimand) {
  const Eigen::Index n = static_cast<Eigen::Index>(d.n());
  const Eigen::Index p = ps.design.cols();
  const Eigen::Index m = p + 2;
  const Eigen::VectorXd w = weights(ps, d, estimand);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  a.topLeftCorner(p, p) = jacobian_eta(ps);

  const double lp0 = msm.beta_hat[0];
  const double lp1 = msm.beta_hat[0] + msm.beta_hat[1];
  Eigen::Matrix2d a_bb = Eigen::Matrix2d::Zero();
  Eigen::MatrixXd a_be = Eigen::MatrixXd::Zero(2, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = d.t()[i];
    const double lpi = ti > 0.5 ? lp1 : lp0;
    const double mui = link.g_inv(lpi);
    const double dmui = link.dmu(lpi);
    Eigen::Vector2d di(1.0, ti);
    a_bb.noalias() -= (w[i] * dmui) * (di * di.transpose());
    const double ci = weight_eta_slope(ti, ps.fitted_e[i], estimand);
    a_be.noalias() += (ci * (d.y()[i] - mui)) * (di * ps.design.row(i));
  }
  a_bb /= static_cast<double>(n);
  a_be /= static_cast<double>(n);

  const double det = a_bb.determinant();
  const double scale = a_bb.norm();
  if (!(std::abs(det) > 1e-14 * scale * scale))
    throw NumericError("singular outcome Jacobian block");

  a.bottomRightCorner(2, 2) = a_bb;
  a.bottomLeftCorner(2, p) = a_be;
  return a;
}

Eigen::MatrixXd assemble_B(const Dataset& d, const PSFit& ps, const MSMFit& msm,
                           const Link& link, Estimand estimand) {
  const Eigen::Index n = static_cast<Eigen::Index>(d.n());
  const Eigen::Index p = ps.design.cols();
  const Eigen::Index m = p + 2;
  const Eigen::VectorXd w = weights(ps, d, estimand);

  const double mu0 = link.g_inv(msm.beta_hat[0]);
  const double mu1 = link.g_inv(msm.beta_hat[0] + msm.beta_hat[1]);
  Eigen::MatrixXd u(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = d.t()[i];
    u.row(i).head(p) = ps.design.row(i) * (ti - ps.fitted_e[i]);
    const double r = w[i] * (d.y()[i] - (ti > 0.5 ? mu1 : mu0));
    u(i, p) = r;
    u(i, p + 1) = r * ti;
  }
  Eigen::MatrixXd b = (u.transpose() * u) / static_cast<double>(n);
  b = 0.5 * (b + b.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of B failed");
  if (es.eigenvalues().minCoeff() < -1e-10 * b.norm())
    throw NumericError("B is not positive semidefinite");
  return b;
}

StackedFit stacked_fit(const Dataset& d, const PSSpec& spec, const Link& link,
                       Estimand estimand) {
  StackedFit out;
  out.n = d.n();
  out.ps = fit_logistic(d, spec);
  const Eigen::VectorXd w = weights(out.ps, d, estimand);
  out.msm = fit_msm(d, w, link);

  out.A = assemble_A(d, out.ps, out.msm, link, estimand);
  out.B = assemble_B(d, out.ps, out.msm, link, estimand);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(out.A);
  if (!(lu.rcond() > 1e-14)) throw NumericError("singular stacked Jacobian");
  const Eigen::MatrixXd ainv_b = lu.solve(out.B);
  Eigen::MatrixXd sigma = lu.solve(ainv_b.transpose()).transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  out.Sigma = sigma;

  const Eigen::Index m = out.A.rows();
  double var = sigma(m - 1, m - 1) / static_cast<double>(out.n);
  if (var < 0.0) {
    if (var > -1e-10 * (sigma.norm() / static_cast<double>(out.n) + 1e-300))
      var = 0.0;
    else
      throw NumericError("negative variance estimate");
  }
  out.var_beta1 = var;
  out.lsvf = static_cast<double>(out.n) * out.var_beta1;

  const Eigen::Index p = out.ps.eta_hat.size();
  out.theta_hat.resize(p + 2);
  out.theta_hat.head(p) = out.ps.eta_hat;
  out.theta_hat.tail(2) = out.msm.beta_hat;
  return out;
}

}  // namespace iptw
