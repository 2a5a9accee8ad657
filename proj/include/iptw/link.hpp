#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "iptw/dataset.hpp"
#include "iptw/errors.hpp"
#include "iptw/numeric.hpp"

namespace iptw {

enum class LinkKind { logit, log, identity };

// Marginal-model link: g maps the mean scale to the linear predictor,
// g_inv back, dmu is the derivative of g_inv.
class Link {
 public:
  static Link logit() { return Link(LinkKind::logit); }
  static Link log() { return Link(LinkKind::log); }
  static Link identity() { return Link(LinkKind::identity); }

  static Link canonical_for(OutcomeKind kind) {
    switch (kind) {
      case OutcomeKind::binary:
        return logit();
      case OutcomeKind::count:
        return log();
      case OutcomeKind::continuous:
        return identity();
    }
    return identity();
  }

  LinkKind kind() const { return kind_; }

  double g(double mu) const {
    switch (kind_) {
      case LinkKind::logit:
        return iptw::logit(mu);
      case LinkKind::log:
        return std::log(mu);
      case LinkKind::identity:
        return mu;
    }
    return mu;
  }

  double g_inv(double lp) const {
    switch (kind_) {
      case LinkKind::logit:
        return expit(lp);
      case LinkKind::log:
        return std::exp(lp);
      case LinkKind::identity:
        return lp;
    }
    return lp;
  }

  // d g_inv / d lp at the given linear predictor.
  double dmu(double lp) const {
    switch (kind_) {
      case LinkKind::logit: {
        const double m = expit(lp);
        return m * (1.0 - m);
      }
      case LinkKind::log:
        return std::exp(lp);
      case LinkKind::identity:
        return 1.0;
    }
    return 1.0;
  }

  // Strict interior of the mean domain, where g is finite.
  bool in_domain(double mu) const {
    if (!std::isfinite(mu)) return false;
    switch (kind_) {
      case LinkKind::logit:
        return mu > 0.0 && mu < 1.0;
      case LinkKind::log:
        return mu > 0.0;
      case LinkKind::identity:
        return true;
    }
    return false;
  }

  std::string name() const {
    switch (kind_) {
      case LinkKind::logit:
        return "logit";
      case LinkKind::log:
        return "log";
      case LinkKind::identity:
        return "identity";
    }
    return "?";
  }

 private:
  explicit Link(LinkKind kind) : kind_(kind) {}
  LinkKind kind_;
};

}  // namespace iptw
