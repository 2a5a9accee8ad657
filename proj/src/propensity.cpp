#include "iptw/propensity.hpp"

#include <cmath>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"

namespace iptw {

Estimand estimand_from_string(const std::string& s) {
  if (s == "ate" || s == "ATE") return Estimand::ate;
  if (s == "att" || s == "ATT") return Estimand::att;
  throw DataError("unknown estimand '" + s + "'");
}

PSSpec PSSpec::all_covariates(const Dataset& d) { return all_covariates(d.p()); }

PSSpec PSSpec::all_covariates(Eigen::Index p) {
  PSSpec spec;
  spec.covariate_columns.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) spec.covariate_columns.push_back(j);
  return spec;
}

Eigen::MatrixXd PSSpec::design(const Dataset& d) const {
  for (Eigen::Index j : covariate_columns) {
    if (j < 0 || j >= d.p()) {
      throw DataError("propensity covariate index out of range");
    }
  }
  Eigen::MatrixXd X(d.n(), dim());
  X.col(0).setOnes();
  for (std::size_t k = 0; k < covariate_columns.size(); ++k) {
    X.col(static_cast<Eigen::Index>(k) + 1) = d.x().col(covariate_columns[k]);
  }
  return X;
}

namespace {

// log L(eta) = sum_i t_i lp_i - log(1 + exp(lp_i)), evaluated stably.
double log_likelihood(const Eigen::VectorXd& t, const Eigen::VectorXd& lp) {
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double u = lp[i];
    const double softplus = std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
    acc += t[i] * u - softplus;
  }
  return static_cast<double>(acc);
}

}  // namespace

PSFit fit_logistic(const Dataset& d, const PSSpec& spec) {
  const Eigen::MatrixXd X = spec.design(d);
  const Eigen::VectorXd& t = d.t();
  const auto n = d.n();
  const auto k = X.cols();

  const double n_treated = t.sum();
  if (n_treated == 0.0 || n_treated == static_cast<double>(n)) {
    throw FitError("logistic fit: a treatment arm is empty");
  }

  constexpr double kScoreTol = 1e-8;   // on the summed score
  constexpr int kMaxIter = 50;
  constexpr double kSeparationNorm = 1e3;
  constexpr double kPositivityEps = 1e-12;

  Eigen::VectorXd eta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd lp = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd e(n);
  bool converged = false;
  int iter = 0;

  for (; iter < kMaxIter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) e[i] = expit(lp[i]);
    const Eigen::VectorXd score = X.transpose() * (t - e);  // summed score
    if (score.lpNorm<Eigen::Infinity>() <= kScoreTol) {
      converged = true;
      break;
    }
    const Eigen::VectorXd wts = e.array() * (1.0 - e.array());
    const Eigen::MatrixXd info =
        X.transpose() * wts.asDiagonal() * X;  // observed information
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) {
      throw FitError("logistic fit: singular information matrix");
    }
    const Eigen::VectorXd step = ldlt.solve(score);
    if (!step.allFinite()) {
      throw FitError("logistic fit: non-finite Newton step");
    }

    // Near an interior optimum the per-step likelihood gain drops below
    // the summation noise of log L, so the ascent check cannot resolve
    // it; small steps are taken raw and only large ones are line searched.
    const bool small_step = step.lpNorm<Eigen::Infinity>() <=
                            1e-2 * (1.0 + eta.lpNorm<Eigen::Infinity>());
    if (small_step) {
      eta += step;
      lp = X * eta;
    } else {
      const double ll0 = log_likelihood(t, lp);
      double s = 1.0;
      bool accepted = false;
      for (int h = 0; h < 40; ++h, s *= 0.5) {
        const Eigen::VectorXd cand = eta + s * step;
        const Eigen::VectorXd lp_cand = X * cand;
        if (log_likelihood(t, lp_cand) >= ll0) {
          eta = cand;
          lp = lp_cand;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        throw FitError("logistic fit: line search failed to improve");
      }
    }
    if (eta.norm() > kSeparationNorm) {
      throw FitError(
          "logistic fit: separation detected (parameter norm diverged)");
    }
  }
  if (!converged) {
    throw FitError("logistic fit: no convergence within 50 iterations");
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    e[i] = expit(lp[i]);
    if (e[i] <= kPositivityEps || e[i] >= 1.0 - kPositivityEps) {
      throw FitError(
          "logistic fit: fitted propensity at the boundary (positivity "
          "failure)");
    }
  }

  PSFit fit;
  fit.eta_hat = std::move(eta);
  fit.fitted_e = std::move(e);
  fit.converged = true;
  fit.iterations = iter;
  fit.design = X;
  return fit;
}

Eigen::MatrixXd jacobian_eta(const PSFit& fit) {
  if (!fit.converged) {
    throw FitError("jacobian_eta requires a converged fit");
  }
  const auto n = fit.design.rows();
  const Eigen::VectorXd wts =
      fit.fitted_e.array() * (1.0 - fit.fitted_e.array());
  Eigen::MatrixXd a =
      -(fit.design.transpose() * wts.asDiagonal() * fit.design) /
      static_cast<double>(n);
  return a;
}

Eigen::VectorXd weights(const PSFit& fit, const Dataset& d, Estimand estimand) {
  const auto n = d.n();
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = fit.fitted_e[i];
    const bool treated = d.t()[i] == 1.0;
    if (estimand == Estimand::ate) {
      w[i] = treated ? 1.0 / e : 1.0 / (1.0 - e);
    } else {
      w[i] = treated ? 1.0 : e / (1.0 - e);
    }
    if (w[i] > 1e12) {
      throw NumericError("weight overflow (propensity too extreme)");
    }
  }
  return w;
}

}  // namespace iptw
