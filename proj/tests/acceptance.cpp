// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Tolerances are pinned as constants next to each criterion.

#include <fcntl.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "iptw/cli.hpp"
#include "iptw/dataset.hpp"
#include "iptw/design.hpp"
#include "iptw/errors.hpp"
#include "iptw/msm.hpp"
#include "iptw/numeric.hpp"
#include "iptw/powersim.hpp"
#include "iptw/propensity.hpp"
#include "iptw/rng.hpp"
#include "iptw/sandwich.hpp"
#include "iptw/scenarios.hpp"
#include "iptw/stabilize.hpp"

using namespace iptw;
using nlohmann::json;

namespace {

constexpr double kLog2 = 0.6931471805599453;
constexpr int kWorkers = 8;

struct Result {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// Routes the CLI's progress printing away from the acceptance report.
class StdoutSilence {
 public:
  StdoutSilence() {
    std::fflush(stdout);
    saved_ = dup(1);
    const int devnull = open("/dev/null", O_WRONLY);
    dup2(devnull, 1);
    close(devnull);
  }
  ~StdoutSilence() {
    std::fflush(stdout);
    dup2(saved_, 1);
    close(saved_);
  }

 private:
  int saved_;
};

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "iptw_acceptance" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// ---- criterion 1: RCT benchmark exactness -------------------------------

Result criterion1() {
  const auto t0 = Clock::now();
  long n[3] = {0, 0, 0};
  {
    StdoutSilence quiet;
    const auto dir = fresh_dir("bench");
    const json cases[3] = {
        {{"kind", "binary"}, {"rho", 0.25}, {"p0", 0.03}, {"delta", kLog2}},
        {{"kind", "binary"}, {"rho", 0.25}, {"p0", 0.10}, {"delta", kLog2}},
        {{"kind", "count"},
         {"rho", 0.67},
         {"lambda0", 0.008},
         {"delta", std::log(0.5)}}};
    for (int k = 0; k < 3; ++k) {
      json j = cases[k];
      j["out"] = dir.string();
      if (dispatch("benchmark", j) != 0) return {false, "benchmark exited nonzero"};
      n[k] = json::parse(slurp(dir / "benchmark.json")).at("n_rct").get<long>();
    }
  }
  const double dt = seconds_since(t0);
  const bool exact = n[0] == 1940 && n[1] == 682 && n[2] == 12284;
  const bool fast = dt < 1.0;
  return {exact && fast,
          fmt("n=%ld/%ld/%ld want 1940/682/12284, %.2fs budget 1s", n[0], n[1],
              n[2], dt)};
}

// ---- criterion 2: sandwich SE vs bootstrap SE ---------------------------

Result criterion2() {
  constexpr double kTol = 0.10;  // relative SE disagreement
  constexpr std::uint64_t kSeed = 20260815;
  constexpr std::size_t kB = 500;
  const auto t0 = Clock::now();

  Scenario sc = Scenario::preset("binary_sga");
  sc.calibrate();
  Engine eng = make_engine(kSeed, stream::simulate, 0);
  const Dataset d = sc.generate(5000, eng);
  const PSSpec spec = sc.analysis_spec();
  const StackedFit fit = stacked_fit(d, spec, sc.link(), Estimand::ate);
  const double se_sand = std::sqrt(fit.var_beta1);

  std::vector<double> beta1;
  beta1.reserve(kB);
  for (std::size_t b = 0; b < kB; ++b) {
    Engine beng = make_engine(kSeed, stream::bootstrap, b);
    try {
      const Dataset db = resample(d, beng);
      beta1.push_back(stacked_fit(db, spec, sc.link(), Estimand::ate).msm.beta_hat[1]);
    } catch (const Error&) {
    }
  }
  if (beta1.size() < kB - 10)
    return {false, fmt("only %zu of %zu bootstrap fits succeeded", beta1.size(), kB)};
  long double mean = 0.0L, ss = 0.0L;
  for (double v : beta1) mean += v;
  mean /= static_cast<long double>(beta1.size());
  for (double v : beta1) ss += (v - mean) * (v - mean);
  const double se_boot =
      std::sqrt(static_cast<double>(ss / static_cast<long double>(beta1.size() - 1)));

  const double rel = std::abs(se_sand / se_boot - 1.0);
  const double dt = seconds_since(t0);
  return {rel <= kTol && dt < 120.0,
          fmt("sandwich %.4f vs bootstrap %.4f, rel %.3f tol %.2f, %.1fs", se_sand,
              se_boot, rel, kTol, dt)};
}

// ---- criteria 3 and 4: Jacobian vs finite differences, score residuals --

// Mean stacked score m(theta) written directly from the estimating
// functions, independent of the library's block assembly.
Eigen::VectorXd stacked_mean_score(const Eigen::VectorXd& theta, const Dataset& d,
                                   const PSSpec& spec, const Link& link,
                                   Estimand estimand) {
  const auto design = spec.design(d);
  const auto p = design.cols();
  const Eigen::VectorXd eta = theta.head(p);
  const double b0 = theta[p];
  const double b1 = theta[p + 1];

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(p + 2);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double e = expit(design.row(i).dot(eta));
    const double t = d.t()[i];
    const double w = estimand == Estimand::ate
                         ? (t > 0.5 ? 1.0 / e : 1.0 / (1.0 - e))
                         : (t > 0.5 ? 1.0 : e / (1.0 - e));
    const double mu = link.g_inv(b0 + b1 * t);
    acc.head(p) += design.row(i).transpose() * (t - e);
    const double r = w * (d.y()[i] - mu);
    acc[p] += r;
    acc[p + 1] += r * t;
  }
  return acc / static_cast<double>(d.n());
}

Eigen::MatrixXd fd_jacobian(const Eigen::VectorXd& theta, const Dataset& d,
                            const PSSpec& spec, const Link& link,
                            Estimand estimand) {
  const auto m = theta.size();
  Eigen::MatrixXd j(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double h = 1e-6 * (1.0 + std::abs(theta[k]));
    Eigen::VectorXd tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    j.col(k) = (stacked_mean_score(tp, d, spec, link, estimand) -
                stacked_mean_score(tm, d, spec, link, estimand)) /
               (2.0 * h);
  }
  return j;
}

Dataset fuzz_fixture(OutcomeKind kind, Engine& eng, std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(m, 2);
  Eigen::VectorXd t(m), y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i, 0) = rnorm(eng);
    x(i, 1) = rnorm(eng);
    t[i] = rbernoulli(eng, expit(0.25 + 0.55 * x(i, 0) - 0.45 * x(i, 1))) ? 1.0 : 0.0;
    const double lp = 0.1 + 0.3 * x(i, 0) - 0.2 * x(i, 1) + 0.5 * t[i];
    switch (kind) {
      case OutcomeKind::binary:
        y[i] = rbernoulli(eng, expit(lp)) ? 1.0 : 0.0;
        break;
      case OutcomeKind::count:
        y[i] = static_cast<double>(rpoisson(eng, std::exp(lp)));
        break;
      case OutcomeKind::continuous:
        y[i] = lp + rnorm(eng);
        break;
    }
  }
  return Dataset(std::move(x), std::move(t), std::move(y), kind);
}

struct FuzzOutcome {
  double worst_jac_rel = 0.0;
  double worst_summed_score = 0.0;
  bool zero_block = true;
  int fitted = 0;
};

Result criterion3(FuzzOutcome& out) {
  constexpr double kTolRel = 1e-5;
  constexpr int kFixtures = 20;
  const OutcomeKind kinds[3] = {OutcomeKind::binary, OutcomeKind::count,
                                OutcomeKind::continuous};

  for (int r = 0; r < kFixtures; ++r) {
    const OutcomeKind kind = kinds[r % 3];
    const Estimand estimand = r % 2 == 0 ? Estimand::ate : Estimand::att;
    const Link link = Link::canonical_for(kind);
    const std::size_t n = 220 + 10 * static_cast<std::size_t>(r);

    bool done = false;
    for (std::uint64_t attempt = 0; attempt < 10 && !done; ++attempt) {
      Engine eng = make_engine(1600, static_cast<std::uint64_t>(r), attempt);
      try {
        const Dataset d = fuzz_fixture(kind, eng, n);
        const PSSpec spec = PSSpec::all_covariates(d);
        const StackedFit fit = stacked_fit(d, spec, link, estimand);

        const Eigen::MatrixXd a_fd = fd_jacobian(fit.theta_hat, d, spec, link, estimand);
        const double scale = a_fd.cwiseAbs().maxCoeff();
        const double rel = (fit.A - a_fd).cwiseAbs().maxCoeff() / scale;
        out.worst_jac_rel = std::max(out.worst_jac_rel, rel);
        if (fit.A.topRightCorner(spec.dim(), 2).cwiseAbs().maxCoeff() != 0.0)
          out.zero_block = false;

        const double summed =
            static_cast<double>(d.n()) *
            stacked_mean_score(fit.theta_hat, d, spec, link, estimand)
                .lpNorm<Eigen::Infinity>();
        out.worst_summed_score = std::max(out.worst_summed_score, summed);
        ++out.fitted;
        done = true;
      } catch (const Error&) {
      }
    }
    if (!done) return {false, fmt("fixture %d never produced a fittable sample", r)};
  }
  return {out.worst_jac_rel <= kTolRel && out.zero_block,
          fmt("20 fixtures, worst rel err %.2e tol 1e-5, upper-right block %s",
              out.worst_jac_rel, out.zero_block ? "zero" : "NONZERO")};
}

Result criterion4(const FuzzOutcome& out) {
  constexpr double kTolScore = 1e-8;
  return {out.fitted == 20 && out.worst_summed_score <= kTolScore,
          fmt("%d fits, worst summed score %.2e tol 1e-8", out.fitted,
              out.worst_summed_score)};
}

// ---- criterion 5: calibration oracles -----------------------------------

Result criterion5() {
  constexpr std::size_t kN = 1000000;
  constexpr std::uint64_t kSeed = 5050;
  std::string detail;
  bool pass = true;

  // (a) binary marginal logit contrast, both presets.
  int idx = 0;
  for (const char* name : {"binary_mcm", "binary_sga"}) {
    Scenario sc = Scenario::preset(name);
    sc.calibrate();
    Engine eng = make_engine(kSeed, stream::simulate, static_cast<std::uint64_t>(idx++));
    long double s0 = 0.0L, s1 = 0.0L, s01 = 0.0L;
    for (std::size_t i = 0; i < kN; ++i) {
      const auto [y0, y1] = sc.draw_potential_outcomes(eng);
      s0 += y0;
      s1 += y1;
      s01 += y0 * y1;
    }
    const double m0 = static_cast<double>(s0) / kN;
    const double m1 = static_cast<double>(s1) / kN;
    const double c01 = static_cast<double>(s01) / kN - m0 * m1;
    const double d0 = 1.0 / (m0 * (1.0 - m0));
    const double d1 = 1.0 / (m1 * (1.0 - m1));
    const double se = std::sqrt((d1 + d0 - 2.0 * d1 * d0 * c01) / kN);
    const double contrast = logit(m1) - logit(m0);
    const double dev = std::abs(contrast - kLog2) / se;
    pass = pass && dev <= 3.0;
    detail += fmt("%s %.1fse ", name, dev);
  }

  // (b) count marginal IRR.
  {
    Scenario sc = Scenario::preset("count_npe");
    sc.calibrate();
    Engine eng = make_engine(kSeed, stream::simulate, 2);
    long double s0 = 0.0L, s1 = 0.0L, q0 = 0.0L, q1 = 0.0L, cr = 0.0L;
    for (std::size_t i = 0; i < kN; ++i) {
      const auto [y0, y1] = sc.draw_potential_outcomes(eng);
      s0 += y0;
      s1 += y1;
      q0 += y0 * y0;
      q1 += y1 * y1;
      cr += y0 * y1;
    }
    const double m0 = static_cast<double>(s0) / kN;
    const double m1 = static_cast<double>(s1) / kN;
    const double v0 = static_cast<double>(q0) / kN - m0 * m0;
    const double v1 = static_cast<double>(q1) / kN - m1 * m1;
    const double c01 = static_cast<double>(cr) / kN - m0 * m1;
    const double se_log =
        std::sqrt((v1 / (m1 * m1) + v0 / (m0 * m0) - 2.0 * c01 / (m0 * m1)) / kN);
    const double dev = std::abs(std::log(m1 / m0) - std::log(0.5)) / se_log;
    pass = pass && dev <= 3.0;
    detail += fmt("count IRR %.1fse ", dev);
  }

  // (c) standardized-t error variance.
  {
    Scenario sc = Scenario::preset("continuous_nsclc");
    sc.calibrate();
    const int nu = sc.continuous()->nu;
    const double std_factor = std::sqrt((nu - 2.0) / static_cast<double>(nu));
    Engine eng = make_engine(kSeed, stream::simulate, 3);
    long double s = 0.0L, q = 0.0L;
    for (std::size_t i = 0; i < kN; ++i) {
      const double e = std_factor * rt(eng, nu);
      s += e;
      q += e * e;
    }
    const double mean = static_cast<double>(s) / kN;
    const double var = static_cast<double>(q) / kN - mean * mean;
    pass = pass && std::abs(var - 1.0) <= 0.02;
    detail += fmt("t-var %.4f tol 2%%", var);
  }
  return {pass, detail};
}

// ---- criterion 6: type-I error under the null ----------------------------

Result criterion6() {
  constexpr std::size_t kReps = 2000;
  constexpr long kN = 2000;
  constexpr double kLo = 0.035, kHi = 0.065;
  DesignInputs inp;
  inp.delta = kLog2;  // rejection rate does not involve delta

  bool pass = true;
  std::string detail;
  for (const char* name :
       {"binary_mcm", "binary_sga", "count_npe", "continuous_nsclc"}) {
    Scenario sc = Scenario::preset(name);
    sc.set_null_effect();
    sc.calibrate();
    const GridPoint pt = estimate_power(sc, kN, kReps, inp, 606, kWorkers);
    pass = pass && pt.power >= kLo && pt.power <= kHi;
    detail += fmt("%s %.4f ", name, pt.power);
  }
  return {pass, detail + "band [0.035,0.065]"};
}

// ---- criterion 7: scaled case-study replication --------------------------

Result criterion7() {
  constexpr std::size_t kR = 50, kB = 200, kReps = 500, kNPilot = 600;
  constexpr std::uint64_t kSeed = 31415;
  constexpr double kPowerRef = 0.754, kPowerTol = 0.04;
  constexpr double kMeanRef = 771.0, kMeanTol = 0.15;
  constexpr double kTarget = 0.80;
  const auto t0 = Clock::now();

  Scenario sc = Scenario::preset("binary_sga");
  sc.calibrate();
  DesignInputs inp;
  inp.delta = sc.delta();
  const auto choices = StabilityChoice::default_choices();

  std::vector<DesignReplicate> reps;
  try {
    reps = run_design_replicates(sc, kR, kNPilot, kB, choices, inp, kSeed, kWorkers);
  } catch (const Error& e) {
    return {false, fmt("design replication failed: %s", e.what())};
  }

  std::vector<long> pooled, rct;
  bool ordered = true;
  long double mean_q50 = 0.0L;
  std::size_t ok = 0;
  for (const auto& r : reps) {
    if (r.failed) continue;
    ++ok;
    pooled.insert(pooled.end(), r.n_prop.begin(), r.n_prop.end());
    rct.push_back(r.n_rct);
    ordered = ordered && r.n_prop[0] <= r.n_prop[1] && r.n_prop[1] <= r.n_prop[2];
    mean_q50 += r.n_prop[0];
  }
  if (ok == 0) return {false, "all replicates failed"};
  mean_q50 /= static_cast<long double>(ok);
  std::sort(rct.begin(), rct.end());
  const long n_rct = rct[nearest_rank(0.5, rct.size()) - 1];

  PowerGrid grid;
  try {
    grid = estimate_power_grid(sc, build_grid(pooled, n_rct), kReps, inp, kSeed,
                               kWorkers);
  } catch (const Error& e) {
    return {false, fmt("power grid failed: %s", e.what())};
  }

  double p682 = -1.0;
  for (const auto& pt : grid.points)
    if (pt.n == 682) p682 = pt.power;
  if (p682 < 0.0) return {false, fmt("682 missing from grid (median benchmark %ld)", n_rct)};

  const PowerGrid smoothed = isotonic_smooth(grid);
  const double hr05 = hit_rate(reps, smoothed, 0, kTarget);
  const double hr07 = hit_rate(reps, smoothed, 1, kTarget);
  const double hr09 = hit_rate(reps, smoothed, 2, kTarget);

  const bool power_ok = std::abs(p682 - kPowerRef) <= kPowerTol;
  const bool hits_ok = hr05 < hr07 && hr07 < hr09;
  const double mean_rel = std::abs(static_cast<double>(mean_q50) / kMeanRef - 1.0);
  const bool mean_ok = mean_rel <= kMeanTol;
  const double dt = seconds_since(t0);

  return {power_ok && ordered && hits_ok && mean_ok && dt < 1800.0,
          fmt("power@682 %.3f ref 0.754 tol 0.04, ordering %s, hits %.2f<%.2f<%.2f, "
              "mean nQ0.5 %.0f ref 771 tol 15%%, %.0fs",
              p682, ordered ? "100%" : "VIOLATED", hr05, hr07, hr09,
              static_cast<double>(mean_q50), dt)};
}

// ---- criterion 8: constant-propensity sanity -----------------------------

Result criterion8() {
  constexpr std::size_t kR = 50, kB = 200, kNPilot = 350;
  constexpr std::uint64_t kSeed = 27182;

  const auto gap_of = [&](PropensityMode mode, double& nprop, double& nrct) {
    Scenario sc = Scenario::preset("continuous_nsclc");
    sc.set_mode(mode);
    sc.calibrate();
    DesignInputs inp;
    inp.delta = sc.delta();
    const auto choices = StabilityChoice::default_choices();
    const auto reps =
        run_design_replicates(sc, kR, kNPilot, kB, choices, inp, kSeed, kWorkers);
    long double sp = 0.0L, sr = 0.0L;
    std::size_t ok = 0;
    for (const auto& r : reps) {
      if (r.failed) continue;
      ++ok;
      sp += r.n_prop[0];
      sr += r.n_rct;
    }
    nprop = static_cast<double>(sp / static_cast<long double>(ok));
    nrct = static_cast<double>(sr / static_cast<long double>(ok));
    return std::abs(nprop - nrct);
  };

  try {
    double np_c, nr_c, np_0, nr_0;
    const double gap_conf = gap_of(PropensityMode::confounded, np_c, nr_c);
    const double gap_const = gap_of(PropensityMode::constant, np_0, nr_0);
    return {gap_const <= 0.5 * gap_conf,
            fmt("confounded nQ0.5 %.0f vs RCT %.0f gap %.0f, constant %.0f vs %.0f "
                "gap %.0f, need half",
                np_c, nr_c, gap_conf, np_0, nr_0, gap_const)};
  } catch (const Error& e) {
    return {false, fmt("replication failed: %s", e.what())};
  }
}

// ---- criterion 9: worker-count determinism -------------------------------

Result criterion9() {
  const json base = {{"scenario", "binary_sga"}, {"seed", 999}, {"R", 6},
                     {"B", 60},                  {"reps", 120}};
  const auto d1 = fresh_dir("val_w1");
  const auto d8 = fresh_dir("val_w8");
  {
    StdoutSilence quiet;
    json j1 = base;
    j1["workers"] = 1;
    j1["out"] = d1.string();
    if (dispatch("validate", j1) != 0) return {false, "validate (1 worker) exited nonzero"};
    json j8 = base;
    j8["workers"] = 8;
    j8["out"] = d8.string();
    if (dispatch("validate", j8) != 0) return {false, "validate (8 workers) exited nonzero"};
  }
  const bool report = slurp(d1 / "report.csv") == slurp(d8 / "report.csv");
  const bool grid = slurp(d1 / "grid.csv") == slurp(d8 / "grid.csv");
  return {report && grid, fmt("report.csv %s, grid.csv %s",
                              report ? "identical" : "DIFFERS",
                              grid ? "identical" : "DIFFERS")};
}

// ---- criterion 10: property fuzz suite -----------------------------------

Result criterion10() {
  constexpr int kConfigs = 200;
  constexpr double kTolScale = 1e-10;
  Engine eng = make_engine(8086);
  int checked = 0, skipped = 0;

  for (int i = 0; i < kConfigs; ++i) {
    const std::size_t n = 60 + draw_index(eng, 240);
    const double a = 1.2 * (u01(eng) - 0.5);
    const double b = 1.6 * (u01(eng) - 0.5);
    const double c0 = u01(eng) - 0.5;
    const double cx = u01(eng) - 0.5;
    const double ct = 1.4 * (u01(eng) - 0.5);
    const OutcomeKind kind =
        i % 3 == 0 ? OutcomeKind::binary
                   : (i % 3 == 1 ? OutcomeKind::count : OutcomeKind::continuous);

    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd x(m, 1);
    Eigen::VectorXd t(m), y(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      x(r, 0) = rnorm(eng);
      t[r] = rbernoulli(eng, expit(a + b * x(r, 0))) ? 1.0 : 0.0;
      const double lp = c0 + cx * x(r, 0) + ct * t[r];
      y[r] = kind == OutcomeKind::binary
                 ? (rbernoulli(eng, expit(lp)) ? 1.0 : 0.0)
                 : (kind == OutcomeKind::count
                        ? static_cast<double>(rpoisson(eng, std::exp(lp)))
                        : lp + rnorm(eng));
    }
    const Dataset d(std::move(x), std::move(t), std::move(y), kind);

    // Quantile monotonicity and ceiling bracketing run on every config.
    {
      BootstrapDistribution dist;
      const std::size_t nb = 1 + draw_index(eng, 60);
      for (std::size_t k = 0; k < nb; ++k)
        dist.values.push_back(std::exp(2.0 * (u01(eng) - 0.5)));
      dist.B_requested = nb;
      double qa = 0.02 + 0.96 * u01(eng), qb = 0.02 + 0.96 * u01(eng);
      if (qa > qb) std::swap(qa, qb);
      if (apply_functional(dist, StabilityFunctional::quantile(qa)) >
          apply_functional(dist, StabilityFunctional::quantile(qb)))
        return {false, fmt("config %d: quantile monotonicity violated", i)};

      DesignInputs inp;
      inp.delta = (0.05 + u01(eng)) * (u01(eng) < 0.5 ? -1.0 : 1.0);
      const double v = std::exp(6.0 * (u01(eng) - 0.5));
      const long nn = required_n(v, inp);
      const double z = inp.z_sum();
      const double ratio = z * z * v / (inp.delta * inp.delta);
      if (nn < 1 || static_cast<double>(nn) < ratio ||
          static_cast<double>(nn) - 1.0 >= ratio)
        return {false, fmt("config %d: required_n %ld does not bracket %.6f", i, nn, ratio)};
    }

    // Weight and invariance properties need a fittable sample.
    try {
      const PSFit ps = fit_logistic(d, PSSpec::all_covariates(d));
      const Eigen::VectorXd w = weights(ps, d, Estimand::ate);
      if (w.minCoeff() < 1.0)
        return {false, fmt("config %d: ATE weight %.6f below 1", i, w.minCoeff())};

      const Link link = Link::canonical_for(kind);
      const MSMFit m1 = fit_msm(d, w, link);
      const double c = std::exp(3.0 * (u01(eng) - 0.5));
      const MSMFit m2 = fit_msm(d, c * w, link);
      const double diff = (m1.beta_hat - m2.beta_hat).lpNorm<Eigen::Infinity>();
      const double scale = 1.0 + m1.beta_hat.lpNorm<Eigen::Infinity>();
      if (diff > kTolScale * scale)
        return {false, fmt("config %d: beta moved %.2e under weight rescale", i, diff)};
      ++checked;
    } catch (const Error&) {
      ++skipped;
    }
  }
  const bool enough = checked >= kConfigs * 9 / 10;
  return {enough, fmt("%d configs fit, %d skipped as degenerate", checked, skipped)};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int k, const Result& r) {
    std::printf("criterion %d: %s (%s)\n", k, r.pass ? "PASS" : "FAIL",
                r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  };

  report(1, criterion1());
  report(2, criterion2());
  FuzzOutcome fuzz;
  report(3, criterion3(fuzz));
  report(4, criterion4(fuzz));
  report(5, criterion5());
  report(6, criterion6());
  report(7, criterion7());
  report(8, criterion8());
  report(9, criterion9());
  report(10, criterion10());

  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
