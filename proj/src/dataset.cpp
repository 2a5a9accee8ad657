#include "iptw/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iptw/errors.hpp"

namespace iptw {

OutcomeKind outcome_kind_from_string(const std::string& s) {
  if (s == "binary") return OutcomeKind::binary;
  if (s == "count") return OutcomeKind::count;
  if (s == "continuous") return OutcomeKind::continuous;
  throw DataError("unknown outcome kind '" + s + "'");
}

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::binary:
      return "binary";
    case OutcomeKind::count:
      return "count";
    case OutcomeKind::continuous:
      return "continuous";
  }
  return "?";
}

namespace {

void check_outcome(double y, OutcomeKind kind, const std::string& where) {
  if (!std::isfinite(y)) {
    throw DataError(where + ": outcome value is not finite");
  }
  switch (kind) {
    case OutcomeKind::binary:
      if (y != 0.0 && y != 1.0) {
        throw DataError(where + ": outcome out of range for kind");
      }
      break;
    case OutcomeKind::count:
      if (y < 0.0 || std::floor(y) != y) {
        throw DataError(where + ": outcome out of range for kind");
      }
      break;
    case OutcomeKind::continuous:
      break;
  }
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd t, Eigen::VectorXd y,
                 OutcomeKind kind)
    : x_(std::move(x)), t_(std::move(t)), y_(std::move(y)), kind_(kind) {
  const auto n = y_.size();
  if (n < 1) throw DataError("dataset must contain at least one row");
  if (t_.size() != n || x_.rows() != n) {
    throw DataError("dataset columns have inconsistent lengths");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t_[i] != 0.0 && t_[i] != 1.0) {
      throw DataError("row " + std::to_string(i + 1) +
                      ": invalid treatment value");
    }
    check_outcome(y_[i], kind_, "row " + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      if (!std::isfinite(x_(i, j))) {
        throw DataError("row " + std::to_string(i + 1) +
                        ": covariate value is not finite");
      }
    }
  }
}

Observation Dataset::row(Eigen::Index i) const {
  return Observation{x_.row(i).transpose(), static_cast<int>(t_[i]), y_[i]};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + cell.size()) {
    throw DataError("line " + std::to_string(line_no) + ": non-numeric cell '" +
                    cell + "'");
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, OutcomeKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "y" || header[1] != "t") {
    throw DataError("'" + path + "': header must be y,t,x1,...,xp");
  }
  const auto p = static_cast<Eigen::Index>(header.size()) - 2;
  for (Eigen::Index j = 0; j < p; ++j) {
    const std::string want = "x" + std::to_string(j + 1);
    if (header[static_cast<std::size_t>(j) + 2] != want) {
      throw DataError("'" + path + "': missing column " + want);
    }
  }

  std::vector<double> ys, ts;
  std::vector<double> xs;  // row-major
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected " + std::to_string(header.size()) +
                      " cells, got " + std::to_string(cells.size()));
    }
    const double y = parse_cell(cells[0], line_no);
    const double t = parse_cell(cells[1], line_no);
    if (t != 0.0 && t != 1.0) {
      throw DataError("line " + std::to_string(line_no) +
                      ": invalid treatment value");
    }
    check_outcome(y, kind, "line " + std::to_string(line_no));
    ys.push_back(y);
    ts.push_back(t);
    for (Eigen::Index j = 0; j < p; ++j) {
      xs.push_back(parse_cell(cells[static_cast<std::size_t>(j) + 2], line_no));
    }
  }
  const auto n = static_cast<Eigen::Index>(ys.size());
  if (n == 0) throw DataError("'" + path + "' contains no data rows");

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd t(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = ys[static_cast<std::size_t>(i)];
    t[i] = ts[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j) {
      x(i, j) = xs[static_cast<std::size_t>(i * p + j)];
    }
  }
  return Dataset(std::move(x), std::move(t), std::move(y), kind);
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "y,t";
  for (Eigen::Index j = 0; j < d.p(); ++j) out << ",x" << (j + 1);
  out << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", d.y()[i]);
    out << buf << ',' << static_cast<int>(d.t()[i]);
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", d.x()(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

ArmDiagnostics validate(const Dataset& d) {
  ArmDiagnostics diag;
  const bool eventish =
      d.kind() == OutcomeKind::binary || d.kind() == OutcomeKind::count;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const bool treated = d.t()[i] == 1.0;
    (treated ? diag.n_treated : diag.n_control) += 1;
    if (eventish && d.y()[i] > 0.0) {
      (treated ? diag.events_treated : diag.events_control) += 1;
    }
  }
  if (diag.n_control == 0) diag.flags.emplace_back("control arm empty");
  if (diag.n_treated == 0) diag.flags.emplace_back("treated arm empty");
  if (eventish) {
    if (diag.n_control > 0 && diag.events_control == 0) {
      diag.flags.emplace_back("no events in arm 0");
    }
    if (diag.n_treated > 0 && diag.events_treated == 0) {
      diag.flags.emplace_back("no events in arm 1");
    }
  }
  return diag;
}

Dataset resample(const Dataset& d, Engine& rng) {
  const auto n = static_cast<Eigen::Index>(d.n());
  Eigen::MatrixXd x(n, d.p());
  Eigen::VectorXd t(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k =
        static_cast<Eigen::Index>(draw_index(rng, static_cast<std::size_t>(n)));
    x.row(i) = d.x().row(k);
    t[i] = d.t()[k];
    y[i] = d.y()[k];
  }
  return Dataset(std::move(x), std::move(t), std::move(y), d.kind());
}

}  // namespace iptw
