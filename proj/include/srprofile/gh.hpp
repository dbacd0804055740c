#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "geometry.hpp"
#include "metric_space.hpp"

namespace srprofile {

/// Relation between two finite spaces; a correspondence when both projections are onto.
struct Correspondence
{
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline bool is_correspondence(const Correspondence& R, std::size_t nx, std::size_t ny)
{
  std::vector<char> cx(nx, 0), cy(ny, 0);
  for (const auto& [i, j] : R.pairs) {
    if (i >= nx || j >= ny) { return false; }
    cx[i] = cy[j] = 1;
  }
  return std::all_of(cx.begin(), cx.end(), [](char c) { return c != 0; })
      && std::all_of(cy.begin(), cy.end(), [](char c) { return c != 0; });
}

/// max over pairs of pairs of |d_X(x, x') - d_Y(y, y')|.
inline double distortion(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const Correspondence& R)
{
  double worst = 0.0;
  for (std::size_t a = 0; a < R.pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < R.pairs.size(); ++b) {
      worst = std::max(worst, std::abs(X(R.pairs[a].first, R.pairs[b].first) - Y(R.pairs[a].second, R.pairs[b].second)));
    }
  }
  return worst;
}

/// Hausdorff distance between index sets A and B of a common finite metric space.
inline double hausdorff_distance(const std::vector<std::size_t>& A, const std::vector<std::size_t>& B, const FiniteMetricSpace& ambient)
{
  if (A.empty() || B.empty()) { throw Error(ErrorCode::EmptyInput, "Hausdorff distance needs nonempty sets"); }
  for (auto a : A) { ambient.check_index(a); }
  for (auto b : B) { ambient.check_index(b); }
  auto directed = [&](const std::vector<std::size_t>& P, const std::vector<std::size_t>& Q) {
    double sup = 0.0;
    for (auto p : P) {
      double inf = std::numeric_limits<double>::infinity();
      for (auto q : Q) { inf = std::min(inf, ambient(p, q)); }
      sup = std::max(sup, inf);
    }
    return sup;
  };
  return std::max(directed(A, B), directed(B, A));
}

namespace detail {

inline void require_nonempty(const FiniteMetricSpace& X, const FiniteMetricSpace& Y)
{
  if (X.empty() || Y.empty()) { throw Error(ErrorCode::EmptyInput, "GH distance needs nonempty spaces"); }
}

/// Hausdorff distance on the line between two sorted samples.
inline double sorted_hausdorff(const std::vector<double>& a, const std::vector<double>& b)
{
  auto directed = [](const std::vector<double>& p, const std::vector<double>& q) {
    double sup = 0.0;
    std::size_t j = 0;
    for (double v : p) {
      while (j + 1 < q.size() && q[j + 1] <= v) { ++j; }
      double best = std::abs(v - q[j]);
      if (j + 1 < q.size()) { best = std::min(best, std::abs(q[j + 1] - v)); }
      sup = std::max(sup, best);
    }
    return sup;
  };
  return std::max(directed(a, b), directed(b, a));
}

/**
 * H(x, y): Hausdorff distance between the distance sets {d_X(x, .)} and {d_Y(y, .)}.
 *
 * If (x, y) belongs to a correspondence R then H(x, y) <= dis R, since every x' is paired
 * with some y' and |d_X(x, x') - d_Y(y, y')| <= dis R (and symmetrically).
 */
inline Eigen::MatrixXd profile_mismatch(const FiniteMetricSpace& X, const FiniteMetricSpace& Y)
{
  const std::size_t nx = X.size(), ny = Y.size();
  std::vector<std::vector<double>> rx(nx), ry(ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t k = 0; k < nx; ++k) { rx[i].push_back(X(i, k)); }
    std::sort(rx[i].begin(), rx[i].end());
  }
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t k = 0; k < ny; ++k) { ry[j].push_back(Y(j, k)); }
    std::sort(ry[j].begin(), ry[j].end());
  }
  Eigen::MatrixXd H(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sorted_hausdorff(rx[i], ry[j]);
    }
  }
  return H;
}

inline double lower_from_mismatch(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const Eigen::MatrixXd& H)
{
  const double diam_term = 0.5 * std::abs(X.diameter() - Y.diameter());
  const double rows      = H.rowwise().minCoeff().maxCoeff();
  const double cols      = H.colwise().minCoeff().maxCoeff();
  return std::max(diam_term, 0.5 * std::max(rows, cols));
}

/**
 * Correspondence graph(f) + graph(g)^T with cached per-pair maxima, for local search.
 *
 * Pairs 0..nx-1 are (x, f(x)); pairs nx..nx+ny-1 are (g(y), y).
 */
class CorrespondenceState
{
public:
  CorrespondenceState(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, std::vector<std::size_t> f,
                      std::vector<std::size_t> g)
      : X_(&X), Y_(&Y), px_(X.size() + Y.size()), py_(X.size() + Y.size()), rowmax_(X.size() + Y.size(), 0.0)
  {
    for (std::size_t x = 0; x < X.size(); ++x) {
      px_[x] = x;
      py_[x] = f[x];
    }
    for (std::size_t y = 0; y < Y.size(); ++y) {
      px_[X.size() + y] = g[y];
      py_[X.size() + y] = y;
    }
    for (std::size_t r = 0; r < px_.size(); ++r) { rowmax_[r] = row_max(r, px_[r], py_[r]); }
  }

  std::size_t pairs() const noexcept { return px_.size(); }

  double entry(std::size_t r, std::size_t s) const { return std::abs((*X_)(px_[r], px_[s]) - (*Y_)(py_[r], py_[s])); }

  /// Max distortion of pair r if it were (x, y).
  double row_max(std::size_t r, std::size_t x, std::size_t y) const
  {
    double m = 0.0;
    for (std::size_t s = 0; s < px_.size(); ++s) {
      if (s != r) { m = std::max(m, std::abs((*X_)(x, px_[s]) - (*Y_)(y, py_[s]))); }
    }
    return m;
  }

  double value() const { return *std::max_element(rowmax_.begin(), rowmax_.end()); }

  /// Lowest-index pair attaining the distortion, and its partner.
  std::pair<std::size_t, std::size_t> worst() const
  {
    const double v = value();
    std::size_t r = 0;
    while (rowmax_[r] != v) { ++r; }
    for (std::size_t s = 0; s < px_.size(); ++s) {
      if (s != r && entry(r, s) == v) { return {r, s}; }
    }
    return {r, r};
  }

  /// Best replacement for the free end of pair r; returns (row max, new end).
  std::pair<double, std::size_t> best_move(std::size_t r) const
  {
    const bool moves_y = r < X_->size();
    const std::size_t count = moves_y ? Y_->size() : X_->size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < count; ++c) {
      const double m = moves_y ? row_max(r, px_[r], c) : row_max(r, c, py_[r]);
      if (m < best) {
        best = m;
        arg = c;
      }
    }
    return {best, arg};
  }

  void apply(std::size_t r, std::size_t end)
  {
    const std::size_t old_x = px_[r], old_y = py_[r];
    if (r < X_->size()) { py_[r] = end; }
    else { px_[r] = end; }
    rowmax_[r] = row_max(r, px_[r], py_[r]);
    for (std::size_t s = 0; s < px_.size(); ++s) {
      if (s == r) { continue; }
      const double old_e = std::abs((*X_)(old_x, px_[s]) - (*Y_)(old_y, py_[s]));
      const double new_e = entry(r, s);
      if (new_e >= rowmax_[s]) { rowmax_[s] = new_e; }
      else if (old_e == rowmax_[s]) { rowmax_[s] = row_max(s, px_[s], py_[s]); }
    }
  }

  Correspondence correspondence() const
  {
    Correspondence R;
    for (std::size_t r = 0; r < px_.size(); ++r) { R.pairs.emplace_back(px_[r], py_[r]); }
    std::sort(R.pairs.begin(), R.pairs.end());
    R.pairs.erase(std::unique(R.pairs.begin(), R.pairs.end()), R.pairs.end());
    return R;
  }

private:
  const FiniteMetricSpace* X_;
  const FiniteMetricSpace* Y_;
  std::vector<std::size_t> px_, py_;
  std::vector<double> rowmax_;
};

/// Repeatedly re-pairs an end of the worst pair while that strictly lowers the pair's maximum.
inline void local_search(CorrespondenceState& st, int max_moves)
{
  for (int it = 0; it < max_moves; ++it) {
    const double v = st.value();
    if (v == 0.0) { return; }
    const auto [r, s] = st.worst();
    auto [mr, er] = st.best_move(r);
    auto [ms, es] = st.best_move(s);
    if (mr < v && mr <= ms) { st.apply(r, er); }
    else if (ms < v) { st.apply(s, es); }
    else { return; }
  }
}

}  // namespace detail

/**
 * Lower bound on d_GH: max(|diam X - diam Y| / 2, max_x min_y H(x, y) / 2, max_y min_x H(x, y) / 2),
 * with H the Hausdorff distance between the distance sets of x and y.
 */
inline double gh_lower(const FiniteMetricSpace& X, const FiniteMetricSpace& Y)
{
  detail::require_nonempty(X, Y);
  return detail::lower_from_mismatch(X, Y, detail::profile_mismatch(X, Y));
}

struct GhUpperResult
{
  double value = 0.0;
  Correspondence correspondence;
};

/**
 * Half the distortion of the best correspondence found.
 *
 * Seeds: the identity when sizes agree, nearest distance-profile matching in both
 * directions, then cfg.multistarts - 1 seeded random maps. Each seed is improved by local
 * search for up to cfg.max_iter moves. Ties keep the earlier seed.
 */
inline GhUpperResult gh_upper(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const SolverConfig& cfg = {})
{
  detail::require_nonempty(X, Y);
  cfg.validate();
  const std::size_t nx = X.size(), ny = Y.size();
  const Eigen::MatrixXd H = detail::profile_mismatch(X, Y);
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> seeds;
  if (nx == ny) {
    std::vector<std::size_t> id(nx);
    for (std::size_t i = 0; i < nx; ++i) { id[i] = i; }
    seeds.emplace_back(id, id);
  }
  {
    std::vector<std::size_t> f(nx), g(ny);
    for (std::size_t i = 0; i < nx; ++i) {
      Eigen::Index j;
      H.row(static_cast<Eigen::Index>(i)).minCoeff(&j);
      f[i] = static_cast<std::size_t>(j);
    }
    for (std::size_t j = 0; j < ny; ++j) {
      Eigen::Index i;
      H.col(static_cast<Eigen::Index>(j)).minCoeff(&i);
      g[j] = static_cast<std::size_t>(i);
    }
    seeds.emplace_back(f, g);
  }
  std::mt19937_64 rng(cfg.seed);
  for (int k = 1; k < cfg.multistarts; ++k) {
    std::vector<std::size_t> f(nx), g(ny);
    for (auto& v : f) { v = static_cast<std::size_t>(rng() % ny); }
    for (auto& v : g) { v = static_cast<std::size_t>(rng() % nx); }
    seeds.emplace_back(f, g);
  }
  GhUpperResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (auto& [f, g] : seeds) {
    detail::CorrespondenceState st(X, Y, f, g);
    detail::local_search(st, cfg.max_iter);
    const double v = 0.5 * st.value();
    if (v < best.value) {
      best.value          = v;
      best.correspondence = st.correspondence();
    }
    if (best.value == 0.0) { break; }
  }
  return best;
}

inline constexpr std::size_t kExactGhCap = 7;

/**
 * Exact d_GH = 1/2 min dis R over correspondences, for spaces of at most 7 points.
 *
 * Every correspondence contains one of the form graph(f) + {(g(y), y) : y not in im f}
 * and distortion is monotone under inclusion, so the search enumerates f and then the
 * partners of uncovered y only, pruning partial relations whose distortion already reaches
 * the incumbent (initially 2 * gh_upper). The search stops early once it meets 2 * gh_lower.
 */
inline double gh_exact_small(const FiniteMetricSpace& X, const FiniteMetricSpace& Y)
{
  detail::require_nonempty(X, Y);
  if (X.size() > kExactGhCap || Y.size() > kExactGhCap) {
    throw Error(ErrorCode::TooLarge, "exact GH is limited to " + std::to_string(kExactGhCap) + " points per space");
  }
  const std::size_t nx = X.size(), ny = Y.size();
  const double floor_value = 2.0 * gh_lower(X, Y);
  double best = 2.0 * gh_upper(X, Y).value;
  if (best <= floor_value) { return 0.5 * best; }

  std::vector<std::size_t> rx, ry;
  rx.reserve(nx + ny);
  ry.reserve(nx + ny);
  std::vector<int> ycount(ny, 0);
  bool done = false;

  // Distortion added by appending (x, y) to the current relation.
  auto added = [&](std::size_t x, std::size_t y) {
    double m = 0.0;
    for (std::size_t k = 0; k < rx.size(); ++k) { m = std::max(m, std::abs(X(x, rx[k]) - Y(y, ry[k]))); }
    return m;
  };

  std::vector<std::size_t> uncovered;
  auto cover = [&](auto&& self, std::size_t u, double cur) -> void {
    if (done) { return; }
    if (u == uncovered.size()) {
      best = cur;
      if (best <= floor_value) { done = true; }
      return;
    }
    const std::size_t y = uncovered[u];
    for (std::size_t x = 0; x < nx && !done; ++x) {
      const double next = std::max(cur, added(x, y));
      if (next >= best) { continue; }
      rx.push_back(x);
      ry.push_back(y);
      self(self, u + 1, next);
      rx.pop_back();
      ry.pop_back();
    }
  };

  auto assign = [&](auto&& self, std::size_t x, double cur) -> void {
    if (done) { return; }
    if (x == nx) {
      uncovered.clear();
      for (std::size_t y = 0; y < ny; ++y) {
        if (ycount[y] == 0) { uncovered.push_back(y); }
      }
      cover(cover, 0, cur);
      return;
    }
    for (std::size_t y = 0; y < ny && !done; ++y) {
      const double next = std::max(cur, added(x, y));
      if (next >= best) { continue; }
      rx.push_back(x);
      ry.push_back(y);
      ++ycount[y];
      self(self, x + 1, next);
      --ycount[y];
      rx.pop_back();
      ry.pop_back();
    }
  };
  assign(assign, 0, 0.0);
  return 0.5 * best;
}

struct GhReport
{
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> exact;
  Correspondence correspondence;
};

inline GhReport gh_report(const FiniteMetricSpace& X, const FiniteMetricSpace& Y, const SolverConfig& cfg = {})
{
  GhReport r;
  r.lower = gh_lower(X, Y);
  auto up = gh_upper(X, Y, cfg);
  r.upper          = up.value;
  r.correspondence = std::move(up.correspondence);
  if (X.size() <= kExactGhCap && Y.size() <= kExactGhCap) { r.exact = gh_exact_small(X, Y); }
  return r;
}

inline nlohmann::json to_json(const GhReport& r)
{
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [i, j] : r.correspondence.pairs) { pairs.push_back({i + 1, j + 1}); }
  nlohmann::json out{{"lower", r.lower}, {"upper", r.upper}, {"correspondence", pairs}};
  out["exact"] = r.exact ? nlohmann::json(*r.exact) : nlohmann::json(nullptr);
  return out;
}

}  // namespace srprofile
