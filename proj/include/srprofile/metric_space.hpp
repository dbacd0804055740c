#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lie_algebra.hpp"

namespace srprofile {

inline constexpr double kTriangleTol = 1e-9;

/**
 * Finite metric space given by its full distance matrix, optionally with point coordinates.
 *
 * Construction validates the metric axioms: exact zero diagonal, symmetry, strictly
 * positive off-diagonal entries and the triangle inequality up to kTriangleTol * max(1, diam).
 */
class FiniteMetricSpace
{
public:
  FiniteMetricSpace() = default;

  explicit FiniteMetricSpace(Eigen::MatrixXd dist, std::vector<Vec> coords = {}) : dist_(std::move(dist)), coords_(std::move(coords))
  {
    validate();
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(dist_.rows()); }
  bool empty() const noexcept { return dist_.rows() == 0; }
  const Eigen::MatrixXd& dist() const noexcept { return dist_; }
  double operator()(std::size_t i, std::size_t j) const
  {
    return dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const std::vector<Vec>& coords() const noexcept { return coords_; }
  bool has_coords() const noexcept { return !coords_.empty(); }

  double diameter() const { return empty() ? 0.0 : dist_.maxCoeff(); }

  FiniteMetricSpace scaled(double lambda) const
  {
    if (!(lambda > 0.0)) { throw Error(ErrorCode::InvalidScale, "metric scaling factor must be > 0"); }
    return FiniteMetricSpace(dist_ * lambda, coords_);
  }

  FiniteMetricSpace subspace(const std::vector<std::size_t>& idx) const
  {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd d(k, k);
    std::vector<Vec> c;
    for (Eigen::Index a = 0; a < k; ++a) {
      check_index(idx[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < k; ++b) {
        d(a, b) = dist_(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]),
                        static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]));
      }
      if (has_coords()) { c.push_back(coords_[idx[static_cast<std::size_t>(a)]]); }
    }
    return FiniteMetricSpace(std::move(d), std::move(c));
  }

  void check_index(std::size_t i) const
  {
    if (i >= size()) { throw Error(ErrorCode::InvalidDimension, "point index out of range"); }
  }

private:
  void validate() const
  {
    const Eigen::Index n = dist_.rows();
    if (dist_.cols() != n) { throw Error(ErrorCode::NotAMetric, "distance matrix is not square"); }
    if (!coords_.empty() && static_cast<Eigen::Index>(coords_.size()) != n) {
      throw Error(ErrorCode::InvalidDimension, "coordinate count does not match point count");
    }
    double diam = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dist_(i, i) != 0.0) { throw Error(ErrorCode::NotAMetric, "nonzero diagonal entry at " + std::to_string(i)); }
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double a = dist_(i, j), b = dist_(j, i);
        if (!std::isfinite(a) || a != b) {
          throw Error(ErrorCode::NotAMetric, "asymmetric or non-finite entry at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        if (!(a > 0.0)) {
          throw Error(ErrorCode::NotAMetric, "distinct points " + std::to_string(i) + ", " + std::to_string(j) + " at distance 0");
        }
        diam = std::max(diam, a);
      }
    }
    const double tol = kTriangleTol * std::max(1.0, diam);
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double dik = dist_(i, k);
        for (Eigen::Index j = 0; j < n; ++j) {
          if (dist_(i, j) > dik + dist_(k, j) + tol) {
            throw Error(ErrorCode::NotAMetric, "triangle inequality fails for (" + std::to_string(i) + ", " + std::to_string(k)
                                                   + ", " + std::to_string(j) + ")");
          }
        }
      }
    }
  }

  Eigen::MatrixXd dist_;
  std::vector<Vec> coords_;
};

/// Shortest-path closure of a symmetric nonnegative matrix (Floyd-Warshall).
inline Eigen::MatrixXd metric_closure(Eigen::MatrixXd d)
{
  const Eigen::Index n = d.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dik = d(i, k);
      for (Eigen::Index j = 0; j < n; ++j) { d(i, j) = std::min(d(i, j), dik + d(k, j)); }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------------------------
// CSV: header "x1,...,xm,d1,...,dn" (coordinate columns optional), one row per point.
// Values are written with 17 significant digits so that parsing restores the exact doubles.

inline std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const FiniteMetricSpace& X)
{
  const std::size_t n = X.size();
  const std::size_t m = X.has_coords() ? static_cast<std::size_t>(X.coords().front().size()) : 0;
  std::string header;
  for (std::size_t c = 0; c < m; ++c) { header += (header.empty() ? "" : ",") + ("x" + std::to_string(c + 1)); }
  for (std::size_t j = 0; j < n; ++j) { header += (header.empty() ? "" : ",") + ("d" + std::to_string(j + 1)); }
  out << header << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    std::string row;
    for (std::size_t c = 0; c < m; ++c) {
      row += (row.empty() ? "" : ",") + format_double(X.coords()[i][static_cast<Eigen::Index>(c)]);
    }
    for (std::size_t j = 0; j < n; ++j) { row += (row.empty() ? "" : ",") + format_double(X(i, j)); }
    out << row << '\n';
  }
}

inline FiniteMetricSpace read_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line)) { throw Error(ErrorCode::InvalidConfig, "empty CSV input"); }
  std::vector<char> kind;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') { cell.pop_back(); }
      if (cell.empty() || (cell[0] != 'x' && cell[0] != 'd')) {
        throw Error(ErrorCode::InvalidConfig, "CSV header cells must be x<k> or d<k>, got '" + cell + "'");
      }
      kind.push_back(cell[0]);
    }
  }
  const auto m = static_cast<std::size_t>(std::count(kind.begin(), kind.end(), 'x'));
  const std::size_t n = kind.size() - m;
  if (m > static_cast<std::size_t>(kMaxAlgebraDim)) { throw Error(ErrorCode::InvalidConfig, "too many coordinate columns"); }
  Eigen::MatrixXd d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Vec> coords;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") { continue; }
    if (row >= n) { throw Error(ErrorCode::InvalidConfig, "CSV has more rows than distance columns"); }
    std::stringstream ss(line);
    std::string cell;
    Vec c(static_cast<Eigen::Index>(m));
    std::size_t col = 0, xc = 0, dc = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= kind.size()) { throw Error(ErrorCode::InvalidConfig, "CSV row longer than header"); }
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || errno == ERANGE) { throw Error(ErrorCode::InvalidConfig, "bad CSV number '" + cell + "'"); }
      if (kind[col] == 'x') { c[static_cast<Eigen::Index>(xc++)] = v; }
      else { d(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(dc++)) = v; }
      ++col;
    }
    if (col != kind.size()) { throw Error(ErrorCode::InvalidConfig, "CSV row shorter than header"); }
    if (m > 0) { coords.push_back(c); }
    ++row;
  }
  if (row != n) { throw Error(ErrorCode::InvalidConfig, "CSV distance matrix is not square"); }
  return FiniteMetricSpace(std::move(d), std::move(coords));
}

inline nlohmann::json to_json(const FiniteMetricSpace& X)
{
  nlohmann::json dist = nlohmann::json::array();
  for (std::size_t i = 0; i < X.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < X.size(); ++j) { row.push_back(X(i, j)); }
    dist.push_back(std::move(row));
  }
  nlohmann::json out{{"n", X.size()}, {"dist", dist}};
  if (X.has_coords()) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& c : X.coords()) { coords.push_back(std::vector<double>(c.data(), c.data() + c.size())); }
    out["coords"] = coords;
  }
  return out;
}

inline FiniteMetricSpace metric_space_from_json(const nlohmann::json& doc)
{
  try {
    const auto rows = doc.at("dist").get<std::vector<std::vector<double>>>();
    const auto n    = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
        throw Error(ErrorCode::NotAMetric, "distance matrix is not square");
      }
      for (Eigen::Index j = 0; j < n; ++j) { d(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    }
    std::vector<Vec> coords;
    if (doc.contains("coords")) {
      for (const auto& c : doc.at("coords")) {
        const auto v = c.get<std::vector<double>>();
        if (v.size() > static_cast<std::size_t>(kMaxAlgebraDim)) { throw Error(ErrorCode::InvalidConfig, "coordinate tuple too long"); }
        coords.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
    }
    return FiniteMetricSpace(std::move(d), std::move(coords));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed metric space document: ") + ex.what());
  }
}

/// Reads a metric space from a .json or .csv file (by extension).
inline FiniteMetricSpace load_metric_space(const std::string& path)
{
  std::ifstream in(path);
  if (!in) { throw Error(ErrorCode::IoError, "cannot open " + path); }
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::InvalidConfig, path + ": " + ex.what());
    }
    return metric_space_from_json(doc);
  }
  return read_csv(in);
}

}  // namespace srprofile
