#include "iptw/rng.hpp"

#include <cmath>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"

namespace iptw {

double rnorm(Engine& eng) { return normal_quantile(u01_pos(eng)); }

double rexp(Engine& eng) { return -std::log(u01_pos(eng)); }

double rt(Engine& eng, int df) {
  if (df < 1) throw DataError("t degrees of freedom must be >= 1");
  const double z = rnorm(eng);
  // chi^2(df): even part from exponentials, odd remainder from a squared normal.
  double chi2 = 0.0;
  for (int k = 0; k + 1 < df; k += 2) chi2 += 2.0 * rexp(eng);
  if (df % 2 == 1) {
    const double zo = rnorm(eng);
    chi2 += zo * zo;
  }
  return z / std::sqrt(chi2 / static_cast<double>(df));
}

long rpoisson(Engine& eng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw DataError("Poisson mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  if (mean > 60.0) throw DataError("Poisson mean too large for inversion sampler");
  // Sequential inversion of the CDF.
  const double u = u01(eng);
  double p = std::exp(-mean);
  double cdf = p;
  long k = 0;
  while (u > cdf && k < 10000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace iptw
