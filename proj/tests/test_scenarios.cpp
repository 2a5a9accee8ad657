#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"
#include "iptw/scenarios.hpp"

using namespace iptw;

namespace {

double mean_of_column(const Eigen::VectorXd& v) { return v.mean(); }

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

TEST_CASE("presets expose the case study constants") {
  auto mcm = Scenario::preset("binary_mcm");
  CHECK(mcm.kind() == OutcomeKind::binary);
  CHECK(mcm.binary()->p0 == 0.03);
  CHECK(mcm.binary()->delta == doctest::Approx(std::log(2.0)));
  CHECK(mcm.binary()->eta1 == 0.8);
  CHECK(mcm.rho() == 0.25);
  CHECK(mcm.default_n_pilot() == 600);
  CHECK(mcm.covariate_count() == 1);
  CHECK(mcm.link().kind() == LinkKind::logit);

  auto sga = Scenario::preset("binary_sga");
  CHECK(sga.binary()->p0 == 0.10);
  CHECK(sga.default_n_pilot() == 600);

  auto npe = Scenario::preset("count_npe");
  CHECK(npe.kind() == OutcomeKind::count);
  CHECK(npe.count()->lambda0 == 0.008);
  CHECK(npe.count()->delta == doctest::Approx(std::log(0.5)));
  CHECK(npe.rho() == 0.67);
  CHECK(npe.default_n_pilot() == 5000);

  auto nsclc = Scenario::preset("continuous_nsclc");
  CHECK(nsclc.kind() == OutcomeKind::continuous);
  CHECK(nsclc.rho() == 0.36);
  CHECK(nsclc.continuous()->delta == 1500.0);
  CHECK(nsclc.default_n_pilot() == 350);
  CHECK(nsclc.covariate_count() == 4);
  CHECK(nsclc.link().kind() == LinkKind::identity);

  CHECK_THROWS_WITH_AS(Scenario::preset("binary_xyz"),
                       doctest::Contains("unknown scenario"), DataError);
}

TEST_CASE("analysis spec follows the propensity mode") {
  auto sc = Scenario::preset("continuous_nsclc");
  CHECK(sc.analysis_spec().dim() == 5);
  sc.set_mode(PropensityMode::constant);
  CHECK(sc.analysis_spec().dim() == 1);
  CHECK(sc.mode() == PropensityMode::constant);
}

TEST_CASE("calibrate_eta0 solves the prevalence equation") {
  Engine eng = make_engine(3);
  Eigen::MatrixXd x(5000, 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = rnorm(eng);

  // Zero slope: prevalence is expit(eta0) for any covariates.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  CHECK(calibrate_eta0(x, zero, 0.25) == doctest::Approx(logit(0.25)).epsilon(1e-8));

  // The solved intercept reproduces the target empirical prevalence.
  const Eigen::VectorXd slope = Eigen::VectorXd::Constant(1, 0.8);
  const double eta0 = calibrate_eta0(x, slope, 0.25);
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < x.rows(); ++i) acc += expit(eta0 + 0.8 * x(i, 0));
  CHECK(static_cast<double>(acc) / 5000.0 == doctest::Approx(0.25).epsilon(1e-8));

  // Shifting every covariate by c shifts the intercept by -slope*c.
  const Eigen::MatrixXd xs = x.array() + 1.7;
  const double eta0s = calibrate_eta0(xs, slope, 0.25);
  CHECK(eta0s == doctest::Approx(eta0 - 0.8 * 1.7).epsilon(1e-7));

  CHECK_THROWS_AS(calibrate_eta0(x, zero, 0.0), DataError);
  CHECK_THROWS_AS(calibrate_eta0(x, Eigen::VectorXd::Zero(2), 0.5), DataError);
}

TEST_CASE("calibrate_outcome_binary reduces to closed forms at beta_x = 0") {
  const auto [g0, psi] = calibrate_outcome_binary(0.10, 0.0, std::log(2.0));
  CHECK(g0 == doctest::Approx(logit(0.10)).epsilon(1e-9));
  CHECK(psi == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  const auto [g0n, psin] = calibrate_outcome_binary(0.03, 0.5, 0.0);
  CHECK(psin == 0.0);  // exact: no solve is needed under the null
  CHECK(g0n < logit(0.03));  // Jensen: averaging expit pulls p up, g0 compensates
}

TEST_CASE("calibrated binary scenarios satisfy their defining equations") {
  const GaussHermite gh = gauss_hermite(64);
  for (const char* name : {"binary_mcm", "binary_sga"}) {
    auto sc = Scenario::preset(name);
    sc.calibrate();
    REQUIRE(sc.calibrated());
    const auto* b = sc.binary();
    const double m0 =
        gh.integrate([&](double z) { return expit(b->gamma0 + b->beta_x * z); });
    const double m1 = gh.integrate(
        [&](double z) { return expit(b->gamma0 + b->beta_x * z + b->psi); });
    CHECK(std::abs(m0 - b->p0) <= 1e-8);
    CHECK(std::abs(logit(m1) - logit(b->p0) - b->delta) <= 1e-8);
    // Non-collapsibility of the logit pushes psi above delta.
    CHECK(b->psi > b->delta);
  }
}

TEST_CASE("generate produces the documented marginals") {
  auto sc = Scenario::preset("binary_sga");
  sc.calibrate();
  Engine eng = make_engine(77, stream::simulate, 0);
  double eta0 = 0.0;
  const auto d = sc.generate(20000, eng, &eta0);
  CHECK(d.n() == 20000);
  CHECK(d.p() == 1);
  CHECK(d.kind() == OutcomeKind::binary);
  CHECK(std::isfinite(eta0));

  // Treated fraction near rho (3 binomial SEs).
  const double tf = mean_of_column(d.t());
  CHECK(tf == doctest::Approx(0.25).epsilon(3.0 * 0.0031 / 0.25));

  // x standard normal.
  CHECK(mean_of_column(d.x().col(0)) == doctest::Approx(0.0).scale(1.0).epsilon(0.025));

  // Confounding: treated units have larger x on average.
  double sx1 = 0.0, n1 = 0.0, sx0 = 0.0, n0 = 0.0;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    if (d.t()[i] > 0.5) {
      sx1 += d.x()(i, 0);
      n1 += 1.0;
    } else {
      sx0 += d.x()(i, 0);
      n0 += 1.0;
    }
  }
  CHECK(sx1 / n1 > sx0 / n0 + 0.3);
}

TEST_CASE("generation is deterministic in the engine seed") {
  auto sc = Scenario::preset("count_npe");
  sc.calibrate();
  Engine e1 = make_engine(5, stream::simulate, 0);
  Engine e2 = make_engine(5, stream::simulate, 0);
  const auto d1 = sc.generate(500, e1);
  const auto d2 = sc.generate(500, e2);
  CHECK((d1.x() - d2.x()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1.t() - d2.t()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1.y() - d2.y()).cwiseAbs().maxCoeff() == 0.0);

  Engine e3 = make_engine(6, stream::simulate, 0);
  const auto d3 = sc.generate(500, e3);
  CHECK((d1.x() - d3.x()).cwiseAbs().maxCoeff() > 0.0);

  CHECK_THROWS_AS(Scenario::preset("binary_mcm").generate(10, e1), DataError);
}

TEST_CASE("constant mode removes the treatment-covariate link") {
  auto sc = Scenario::preset("binary_sga");
  sc.set_mode(PropensityMode::constant);
  sc.calibrate();
  Engine eng = make_engine(11, stream::simulate, 0);
  double eta0 = 0.0;
  const auto d = sc.generate(30000, eng, &eta0);
  CHECK(eta0 == logit(0.25));
  CHECK(std::abs(correlation(d.t(), d.x().col(0))) <= 3.0 / std::sqrt(30000.0));
  CHECK(mean_of_column(d.t()) == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("potential outcomes reproduce the marginal binary contrast") {
  auto sc = Scenario::preset("binary_sga");
  sc.calibrate();
  Engine eng = make_engine(2718);
  const std::size_t n = 200000;
  long double s0 = 0.0L, s1 = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [y0, y1] = sc.draw_potential_outcomes(eng);
    s0 += y0;
    s1 += y1;
  }
  const double p0 = static_cast<double>(s0) / static_cast<double>(n);
  const double p1 = static_cast<double>(s1) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  const double se = std::sqrt(1.0 / (nn * p0 * (1.0 - p0)) +
                              1.0 / (nn * p1 * (1.0 - p1)));
  CHECK(std::abs(p0 - 0.10) <= 3.0 * std::sqrt(0.10 * 0.90 / nn));
  CHECK(std::abs(logit(p1) - logit(p0) - std::log(2.0)) <= 3.0 * se);
}

TEST_CASE("potential outcomes reproduce the count rate ratio") {
  auto sc = Scenario::preset("count_npe");
  sc.calibrate();
  Engine eng = make_engine(31415);
  const std::size_t n = 200000;
  long double s0 = 0.0L, s1 = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [y0, y1] = sc.draw_potential_outcomes(eng);
    s0 += y0;
    s1 += y1;
  }
  // E[Y(0)] = lambda0 exp(beta_x^2/2) under X ~ N(0,1).
  const double m0 = static_cast<double>(s0) / static_cast<double>(n);
  const double m1 = static_cast<double>(s1) / static_cast<double>(n);
  const double expect0 = 0.008 * std::exp(0.3 * 0.3 / 2.0);
  CHECK(m0 == doctest::Approx(expect0).epsilon(0.08));
  CHECK(m1 / m0 == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("potential outcomes reproduce the continuous noise scale") {
  auto sc = Scenario::preset("continuous_nsclc");
  sc.calibrate();
  Engine eng = make_engine(927);
  const std::size_t n = 200000;
  long double sd = 0.0L, sdd = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [y0, y1] = sc.draw_potential_outcomes(eng);
    const long double diff = y1 - y0;
    sd += diff;
    sdd += diff * diff;
  }
  const double nn = static_cast<double>(n);
  const double mean_diff = static_cast<double>(sd) / nn;
  const double var_diff =
      static_cast<double>(sdd) / nn - mean_diff * mean_diff;

  // Independent draws share x and the Bernoulli block, so the difference
  // is delta plus two independent scaled-t errors: var = 2 E[sigma^2].
  const double e_ax = 2.0 * std::exp(0.3 * 0.3 / 2.0) * normal_cdf(0.3);
  const double e_b1 = 0.77 + 0.23 * std::exp(0.2);
  const double e_b2 = 0.89 + 0.11 * std::exp(0.3);
  const double e_sigma2 = 3000.0 * 3000.0 * e_ax * e_b1 * e_b2;

  CHECK(mean_diff == doctest::Approx(1500.0).epsilon(0.02));
  CHECK(var_diff == doctest::Approx(2.0 * e_sigma2).epsilon(0.05));
}

TEST_CASE("null effect zeroes the treatment terms") {
  auto sc = Scenario::preset("binary_sga");
  sc.set_null_effect();
  sc.calibrate();
  CHECK(sc.binary()->delta == 0.0);
  CHECK(sc.binary()->psi == 0.0);
  CHECK(sc.delta() == 0.0);

  Engine eng = make_engine(15);
  long double s0 = 0.0L, s1 = 0.0L;
  for (int i = 0; i < 50000; ++i) {
    const auto [y0, y1] = sc.draw_potential_outcomes(eng);
    s0 += y0;
    s1 += y1;
  }
  CHECK(static_cast<double>(s1 - s0) / 50000.0 ==
        doctest::Approx(0.0).scale(1.0).epsilon(0.006));

  auto npe = Scenario::preset("count_npe");
  npe.set_null_effect();
  CHECK(npe.delta() == 0.0);
  auto nsclc = Scenario::preset("continuous_nsclc");
  nsclc.set_null_effect();
  CHECK(nsclc.delta() == 0.0);
}

TEST_CASE("pooled variance and the benchmark variance") {
  // Arm 0: {1,3} around 2 (ss 2); arm 1: {10,14} around 12 (ss 8).
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
  Eigen::VectorXd t(4), y(4);
  t << 0, 0, 1, 1;
  y << 1, 3, 10, 14;
  const Dataset d(std::move(x), std::move(t), std::move(y), OutcomeKind::continuous);
  CHECK(pooled_outcome_variance(d) == doctest::Approx(5.0));

  auto sc = Scenario::preset("continuous_nsclc");
  sc.calibrate();
  const double v = sc.benchmark_variance(d);
  CHECK(v == doctest::Approx(5.0 / 0.36 + 5.0 / 0.64).epsilon(1e-12));

  // Binary and count benchmarks ignore the pilot outcome values.
  auto sga = Scenario::preset("binary_sga");
  sga.calibrate();
  RCTParams params;
  params.kind = OutcomeKind::binary;
  params.rho = 0.25;
  params.p0 = 0.10;
  params.delta = std::log(2.0);
  CHECK(sga.benchmark_variance(d) == doctest::Approx(rct_variance(params)));
}
