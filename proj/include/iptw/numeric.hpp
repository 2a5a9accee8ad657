#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace iptw {

inline double expit(double u) {
  if (u >= 0.0) {
    return 1.0 / (1.0 + std::exp(-u));
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Inverse standard normal CDF (Wichura's rational approximation,
// absolute error below 1e-9 over (0,1)). Throws NumericError at the
// boundaries.
double normal_quantile(double p);

// Standard normal CDF via erfc.
double normal_cdf(double x);

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must bracket a
// sign change. Stops when the interval is shorter than tol.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, int max_iter = 200);

// Gauss-Hermite rule adapted to N(0,1) expectations:
// E[f(Z)] ~ sum_i weight[i] * f(node[i]).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  double integrate(const std::function<double(double)>& f) const;
};

// Rule of the given order via Golub-Welsch on the Hermite Jacobi matrix.
GaussHermite gauss_hermite(int n);

// Nearest-rank (inverse empirical CDF) quantile: the value at sorted
// index ceil(q*n), 1-based. Input must be sorted ascending.
double nearest_rank_quantile(const std::vector<double>& sorted, double q);

// 1-based nearest rank ceil(q*n), clamped to [1, n]. Guards the
// floating product against landing just above an integer.
std::size_t nearest_rank(double q, std::size_t n);

double mean_of(const std::vector<double>& values);

}  // namespace iptw
