#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "iptw/rng.hpp"

namespace iptw {

enum class OutcomeKind { binary, count, continuous };

OutcomeKind outcome_kind_from_string(const std::string& s);
std::string to_string(OutcomeKind kind);

struct Observation {
  Eigen::VectorXd x;
  int t = 0;
  double y = 0.0;
};

// Immutable sample of (covariates, treatment, outcome) rows. Safe to
// share across threads once constructed.
class Dataset {
 public:
  // Validates: t in {0,1}, outcome consistent with kind, all finite.
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd t, Eigen::VectorXd y,
          OutcomeKind kind);

  std::int64_t n() const { return y_.size(); }
  Eigen::Index p() const { return x_.cols(); }
  OutcomeKind kind() const { return kind_; }

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& y() const { return y_; }

  Observation row(Eigen::Index i) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd t_;  // stored as 0.0 / 1.0
  Eigen::VectorXd y_;
  OutcomeKind kind_;
};

struct ArmDiagnostics {
  std::int64_t n_control = 0;
  std::int64_t n_treated = 0;
  std::int64_t events_control = 0;  // binary/count outcomes only
  std::int64_t events_treated = 0;
  std::vector<std::string> flags;

  bool arms_ok() const { return n_control > 0 && n_treated > 0; }
};

// CSV schema: header `y,t,x1,...,xp`, one row per subject, UTF-8,
// LF or CRLF line endings.
Dataset load_csv(const std::string& path, OutcomeKind kind);
void write_csv(const Dataset& d, const std::string& path);

// Diagnostic pass: per-arm counts, per-arm event counts, degeneracy
// flags. Never mutates or throws.
ArmDiagnostics validate(const Dataset& d);

// Plain nonparametric bootstrap: n rows drawn uniformly with
// replacement. Same n, p and kind as the input.
Dataset resample(const Dataset& d, Engine& rng);

}  // namespace iptw
