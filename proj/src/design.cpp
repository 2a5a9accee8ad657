#include "iptw/design.hpp"

#include <cmath>

#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"

namespace iptw {

void DesignInputs::validate() const {
  if (!(delta != 0.0) || !std::isfinite(delta))
    throw DataError("delta must be nonzero and finite");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("alpha must lie in (0,1)");
  if (!(power > 0.0 && power < 1.0)) throw DataError("power must lie in (0,1)");
}

double DesignInputs::z_sum() const {
  return normal_quantile(1.0 - alpha / 2.0) + normal_quantile(power);
}

double se_target(const DesignInputs& inp) {
  inp.validate();
  return std::abs(inp.delta) / inp.z_sum();
}

long required_n(double v, const DesignInputs& inp) {
  inp.validate();
  if (!(v > 0.0) || !std::isfinite(v))
    throw DataError("variance factor must be positive and finite");
  const double z = inp.z_sum();
  const double n = std::ceil(z * z * v / (inp.delta * inp.delta));
  if (!(n >= 1.0) || n > 9e15) throw NumericError("required n out of range");
  return static_cast<long>(n);
}

namespace {

void check_link_consistency(double implied, double given, const char* what) {
  if (std::abs(implied - given) > 1e-8)
    throw DataError(std::string("inconsistent ") + what +
                    ": delta and arm-1 parameter disagree on the link scale");
}

}  // namespace

double rct_variance(const RCTParams& params) {
  if (!(params.rho > 0.0 && params.rho < 1.0))
    throw DataError("rho must lie in (0,1)");
  const double rho = params.rho;

  switch (params.kind) {
    case OutcomeKind::binary: {
      if (!(params.p0 > 0.0 && params.p0 < 1.0))
        throw DataError("p0 must lie in (0,1)");
      double p1;
      if (params.p1) {
        p1 = *params.p1;
        if (!(p1 > 0.0 && p1 < 1.0)) throw DataError("p1 must lie in (0,1)");
        if (params.delta)
          check_link_consistency(logit(params.p0) + *params.delta, logit(p1),
                                 "binary effect");
      } else if (params.delta) {
        p1 = expit(logit(params.p0) + *params.delta);
      } else {
        throw DataError("binary benchmark needs p1 or delta");
      }
      return 1.0 / (rho * p1 * (1.0 - p1)) +
             1.0 / ((1.0 - rho) * params.p0 * (1.0 - params.p0));
    }
    case OutcomeKind::count: {
      if (!(params.lambda0 > 0.0)) throw DataError("lambda0 must be positive");
      double l1;
      if (params.lambda1) {
        l1 = *params.lambda1;
        if (!(l1 > 0.0)) throw DataError("lambda1 must be positive");
        if (params.delta)
          check_link_consistency(std::log(params.lambda0) + *params.delta,
                                 std::log(l1), "count effect");
      } else if (params.delta) {
        l1 = params.lambda0 * std::exp(*params.delta);
      } else {
        throw DataError("count benchmark needs lambda1 or delta");
      }
      return 1.0 / (rho * l1) + 1.0 / ((1.0 - rho) * params.lambda0);
    }
    case OutcomeKind::continuous: {
      if (!(params.sigma2 > 0.0)) throw DataError("sigma2 must be positive");
      return params.sigma2 / rho + params.sigma2 / (1.0 - rho);
    }
  }
  throw DataError("unknown outcome kind");
}

}  // namespace iptw
