#include "iptw/scenarios.hpp"

#include <cmath>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"

namespace iptw {

double calibrate_eta0(const Eigen::MatrixXd& x, const Eigen::VectorXd& slope,
                      double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DataError("rho must lie in (0,1)");
  if (x.cols() != slope.size())
    throw DataError("slope length does not match covariate count");
  const Eigen::VectorXd s = x * slope;
  const auto prevalence = [&](double eta0) {
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < s.size(); ++i) acc += expit(eta0 + s[i]);
    return static_cast<double>(acc / static_cast<long double>(s.size())) - rho;
  };
  double lo = -50.0, hi = 50.0;
  while (prevalence(lo) > 0.0) lo -= 50.0;
  while (prevalence(hi) < 0.0) hi += 50.0;
  return bisect(prevalence, lo, hi, 1e-10);
}

std::pair<double, double> calibrate_outcome_binary(double p0, double beta_x,
                                                   double delta) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw DataError("p0 must lie in (0,1)");
  const GaussHermite gh = gauss_hermite(64);

  const auto marginal = [&](double g0, double shift) {
    return gh.integrate([&](double z) { return expit(g0 + beta_x * z + shift); });
  };
  const double gamma0 =
      bisect([&](double g0) { return marginal(g0, 0.0) - p0; }, -60.0, 60.0, 1e-12);

  double psi = 0.0;
  if (delta != 0.0) {
    // Solve on the probability scale; the logit scale saturates in double
    // precision near the bracket ends.
    const double p1 = expit(logit(p0) + delta);
    psi = bisect([&](double s) { return marginal(gamma0, s) - p1; },
                 -60.0, 60.0, 1e-12);
  }
  return {gamma0, psi};
}

Scenario Scenario::preset(const std::string& name) {
  Scenario sc;
  sc.name_ = name;
  if (name == "binary_mcm") {
    BinaryScenario b;
    b.p0 = 0.03;
    sc.model_ = b;
    sc.n_pilot_ = 600;
  } else if (name == "binary_sga") {
    BinaryScenario b;
    b.p0 = 0.10;
    sc.model_ = b;
    sc.n_pilot_ = 600;
  } else if (name == "count_npe") {
    sc.model_ = CountScenario{};
    sc.n_pilot_ = 5000;
  } else if (name == "continuous_nsclc") {
    sc.model_ = ContinuousScenario{};
    sc.n_pilot_ = 350;
  } else {
    throw DataError("unknown scenario: " + name);
  }
  return sc;
}

OutcomeKind Scenario::kind() const {
  if (binary()) return OutcomeKind::binary;
  if (count()) return OutcomeKind::count;
  return OutcomeKind::continuous;
}

double Scenario::delta() const {
  if (const auto* b = binary()) return b->delta;
  if (const auto* c = count()) return c->delta;
  return continuous()->delta;
}

void Scenario::set_null_effect() {
  if (auto* b = binary()) {
    b->delta = 0.0;
    b->psi = 0.0;
  } else if (auto* c = count()) {
    c->delta = 0.0;
  } else {
    continuous()->delta = 0.0;
  }
}

double Scenario::rho() const {
  if (const auto* b = binary()) return b->rho;
  if (const auto* c = count()) return c->rho;
  return continuous()->rho;
}

std::size_t Scenario::covariate_count() const { return continuous() ? 4 : 1; }

PSSpec Scenario::analysis_spec() const {
  if (mode_ == PropensityMode::constant) return PSSpec::intercept_only();
  return PSSpec::all_covariates(static_cast<Eigen::Index>(covariate_count()));
}

void Scenario::calibrate() {
  if (auto* b = binary()) {
    const auto [g0, psi] = calibrate_outcome_binary(b->p0, b->beta_x, b->delta);
    b->gamma0 = g0;
    b->psi = psi;
  }
  // Count: conditional intercept is log(lambda0) by construction and the
  // log link is collapsible, so the marginal log-IRR is delta with no
  // numeric work. Continuous: all coefficients are direct constants.
  calibrated_ = true;
}

namespace {

Eigen::VectorXd ps_slope_of(const Scenario& sc) {
  if (const auto* b = sc.binary()) return Eigen::VectorXd::Constant(1, b->eta1);
  if (const auto* c = sc.count()) return Eigen::VectorXd::Constant(1, c->eta1);
  return sc.continuous()->ps_slope;
}

double draw_outcome(const Scenario& sc, const Eigen::RowVectorXd& x, double t,
                    Engine& eng) {
  if (const auto* b = sc.binary()) {
    const double p = expit(b->gamma0 + b->beta_x * x[0] + b->psi * t);
    return rbernoulli(eng, p) ? 1.0 : 0.0;
  }
  if (const auto* c = sc.count()) {
    const double rate =
        c->lambda0 * std::exp(c->beta_x * x[0] + c->delta * t);
    return static_cast<double>(rpoisson(eng, rate));
  }
  const auto* k = sc.continuous();
  const double mu = k->mean0 + k->mean_slope[0] * x[0] + k->mean_slope[1] * x[1] +
                    k->mean_slope[2] * x[2] + k->mean_slope[3] * x[3] +
                    k->delta * t;
  const double sigma = k->scale0 * std::exp(k->scale_x * std::abs(x[0]) +
                                            k->scale_b1 * x[1] +
                                            k->scale_b2 * x[2]);
  const double std_factor =
      std::sqrt((k->nu - 2.0) / static_cast<double>(k->nu));
  return mu + sigma * std_factor * rt(eng, k->nu);
}

}  // namespace

Dataset Scenario::generate(std::size_t n, Engine& eng, double* eta0_out) const {
  if (!calibrated_) throw DataError("scenario not calibrated");
  if (n == 0) throw DataError("dataset size must be positive");
  const auto ni = static_cast<Eigen::Index>(n);
  const auto p = static_cast<Eigen::Index>(covariate_count());

  Eigen::MatrixXd x(ni, p);
  if (const auto* k = continuous()) {
    for (Eigen::Index i = 0; i < ni; ++i) {
      x(i, 0) = rnorm(eng);
      for (int j = 0; j < 3; ++j)
        x(i, j + 1) = rbernoulli(eng, k->bern_p[j]) ? 1.0 : 0.0;
    }
  } else {
    for (Eigen::Index i = 0; i < ni; ++i) x(i, 0) = rnorm(eng);
  }

  double eta0;
  Eigen::VectorXd lin;
  if (mode_ == PropensityMode::constant) {
    eta0 = logit(rho());
    lin = Eigen::VectorXd::Constant(ni, 0.0);
  } else {
    const Eigen::VectorXd slope = ps_slope_of(*this);
    eta0 = calibrate_eta0(x, slope, rho());
    lin = x * slope;
  }
  if (eta0_out) *eta0_out = eta0;

  Eigen::VectorXd t(ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    t[i] = rbernoulli(eng, expit(eta0 + lin[i])) ? 1.0 : 0.0;

  Eigen::VectorXd y(ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    y[i] = draw_outcome(*this, x.row(i), t[i], eng);

  return Dataset(std::move(x), std::move(t), std::move(y), kind());
}

std::pair<double, double> Scenario::draw_potential_outcomes(Engine& eng) const {
  if (!calibrated_) throw DataError("scenario not calibrated");
  const auto p = static_cast<Eigen::Index>(covariate_count());
  Eigen::RowVectorXd x(p);
  if (const auto* k = continuous()) {
    x[0] = rnorm(eng);
    for (int j = 0; j < 3; ++j) x[j + 1] = rbernoulli(eng, k->bern_p[j]) ? 1.0 : 0.0;
  } else {
    x[0] = rnorm(eng);
  }
  const double y0 = draw_outcome(*this, x, 0.0, eng);
  const double y1 = draw_outcome(*this, x, 1.0, eng);
  return {y0, y1};
}

double pooled_outcome_variance(const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.n());
  long double sum[2] = {0.0L, 0.0L};
  long double cnt[2] = {0.0L, 0.0L};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int arm = d.t()[i] > 0.5 ? 1 : 0;
    sum[arm] += d.y()[i];
    cnt[arm] += 1.0L;
  }
  if (!(cnt[0] > 0.0L) || !(cnt[1] > 0.0L))
    throw DataError("pooled variance needs both arms");
  if (n < 3) throw DataError("pooled variance needs n >= 3");
  const long double mean0 = sum[0] / cnt[0];
  const long double mean1 = sum[1] / cnt[1];
  long double ss = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    const long double c = d.y()[i] - (d.t()[i] > 0.5 ? mean1 : mean0);
    ss += c * c;
  }
  return static_cast<double>(ss / static_cast<long double>(n - 2));
}

double Scenario::benchmark_variance(const Dataset& pilot) const {
  RCTParams params;
  params.rho = rho();
  if (const auto* b = binary()) {
    params.kind = OutcomeKind::binary;
    params.p0 = b->p0;
    params.delta = b->delta;
  } else if (const auto* c = count()) {
    params.kind = OutcomeKind::count;
    params.lambda0 = c->lambda0;
    params.delta = c->delta;
  } else {
    params.kind = OutcomeKind::continuous;
    params.sigma2 = pooled_outcome_variance(pilot);
  }
  return rct_variance(params);
}

}  // namespace iptw
