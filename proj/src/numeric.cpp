#include "iptw/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "iptw/errors.hpp"

namespace iptw {

double normal_quantile(double p) {
  // Wichura (1988), algorithm AS 241, PPND16.
  if (!(p > 0.0 && p < 1.0)) {
    throw NumericError("normal_quantile: p must lie strictly in (0,1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) *
                 r +
             4.5921953931549871457e4) *
                r +
            1.3731693765509461125e4) *
               r +
           1.9715909503065514427e3) *
              r +
          1.3314166789178437745e2) *
             r +
         3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericError("bisect: endpoints do not bracket a root");
  }
  for (int it = 0; it < max_iter && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fhi > 0.0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double GaussHermite::integrate(const std::function<double(double)>& f) const {
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < nodes.size(); ++i) {
    acc += static_cast<long double>(weights[i]) * f(nodes[i]);
  }
  return static_cast<double>(acc);
}

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw NumericError("gauss_hermite: order must be positive");
  // Golub-Welsch on the symmetric tridiagonal Jacobi matrix of the
  // physicists' Hermite polynomials (zero diagonal, off-diagonal
  // sqrt(k/2)), then a change of variables to the N(0,1) density.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) {
    throw NumericError("gauss_hermite: eigen decomposition failed");
  }
  GaussHermite rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = sqrt2 * es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;  // mu0 = sqrt(pi) cancels against 1/sqrt(pi)
  }
  return rule;
}

std::size_t nearest_rank(double q, std::size_t n) {
  if (n == 0) throw NumericError("nearest_rank: empty sample");
  if (!(q > 0.0 && q < 1.0)) {
    throw NumericError("nearest_rank: quantile level must lie in (0,1)");
  }
  // The 1e-9 slack keeps exact ranks (e.g. 0.9*10) from spilling past
  // the intended order statistic through floating-point noise.
  const double raw = q * static_cast<double>(n);
  auto rank = static_cast<long long>(std::ceil(raw - 1e-9));
  if (rank < 1) rank = 1;
  if (rank > static_cast<long long>(n)) rank = static_cast<long long>(n);
  return static_cast<std::size_t>(rank);
}

double nearest_rank_quantile(const std::vector<double>& sorted, double q) {
  return sorted[nearest_rank(q, sorted.size()) - 1];
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw NumericError("mean_of: empty sample");
  long double acc = 0.0L;
  for (double v : values) acc += v;
  return static_cast<double>(acc / static_cast<long double>(values.size()));
}

}  // namespace iptw
