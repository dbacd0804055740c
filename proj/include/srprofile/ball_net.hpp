#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>
#include <vector>

#include "cc_distance.hpp"
#include "geometry.hpp"
#include "metric_space.hpp"

namespace srprofile {

namespace detail {

/// Unit vectors used as net moves in an m-dimensional orthonormal control space.
inline std::vector<Vec> unit_directions(int m, int K)
{
  std::vector<Vec> out;
  if (m == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return out;
  }
  if (m == 2) {
    for (int k = 0; k < K; ++k) {
      const double a = 2.0 * std::numbers::pi * k / K;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      out.push_back(u);
    }
    return out;
  }
  if (m == 3) {
    // Spherical Fibonacci lattice.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < K; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / K;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec u(3);
      u << r * std::cos(golden * k), r * std::sin(golden * k), z;
      out.push_back(u);
    }
    return out;
  }
  for (int i = 0; i < m; ++i) {
    out.push_back(basis_vector(m, i));
    out.push_back(-basis_vector(m, i));
  }
  std::mt19937_64 rng(0x5EEDULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (static_cast<int>(out.size()) < K) {
    Vec u(m);
    for (int i = 0; i < m; ++i) { u[i] = normal(rng); }
    out.push_back(u / u.norm());
  }
  return out;
}

/// Everything a net needs to move: the algebra, unit-speed moves and the box-norm weights.
struct MoveSystem
{
  LieAlgebra alg;
  Grading box;
  std::vector<Vec> moves;
  int bch_order = 0;  ///< exact BCH order for nilpotent algebras of step <= 3, 0 selects RK4
  double chart_radius = 1.5;
};

inline int exact_bch_order(const LieAlgebra& alg)
{
  const int step = nilpotency_step(alg);
  return (step >= 1 && step <= 3) ? step : 0;
}

inline MoveSystem horizontal_moves(const SubRiemannianGroup& G, int K)
{
  const Mat field = G.horizontal_embedding() * inverse_transpose_cholesky(G.metric());
  MoveSystem sys{G.alg(), G.grading(), {}, exact_bch_order(G.alg()), G.chart_radius()};
  for (const auto& u : unit_directions(G.horizontal_dim(), K)) { sys.moves.push_back(field * u); }
  return sys;
}

/// Moves along every unit direction of the Riemannian metric whose Gram matrix on the frame is full_metric.
inline MoveSystem full_moves(const SubRiemannianGroup& G, const Mat& full_metric, int K)
{
  const int n = G.dim();
  if (full_metric.rows() != n || full_metric.cols() != n) { throw Error(ErrorCode::InvalidMetric, "full metric has wrong size"); }
  const Mat field = inverse_transpose_cholesky(full_metric);
  MoveSystem sys{G.alg(), uniform_grading(n), {}, exact_bch_order(G.alg()), G.chart_radius()};
  for (const auto& u : unit_directions(n, K)) { sys.moves.push_back(field * u); }
  return sys;
}

/// p * exp(b): exact BCH for low-step nilpotent algebras, otherwise RK4 along the left-invariant field.
inline Vec right_translate(const MoveSystem& sys, const FrameEvaluator& fe, const Vec& p, const Vec& b)
{
  if (sys.bch_order > 0) { return bch_truncated(sys.alg, p, b, sys.bch_order); }
  const int nsub = std::max(1, static_cast<int>(std::ceil(b.norm() / 0.1)));
  Vec x = p;
  for (int k = 0; k < nsub; ++k) { x = rk4_step(fe, x, b, 1.0 / nsub); }
  return x;
}

struct CellKey
{
  std::array<std::int64_t, kMaxAlgebraDim> c{};
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellHash
{
  std::size_t operator()(const CellKey& k) const noexcept
  {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (auto v : k.c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      h *= 0xBF58476D1CE4E5B9ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

}  // namespace detail

/**
 * Graph of points reached from a center by fixed-length moves, merged on a weighted grid.
 *
 * Exploration is breadth first: every node up to depth ceil(explore_radius / h) - 1 is moved
 * by h along each unit direction. Move targets snap to the node already occupying their grid
 * cell; cells have side tau^{w_i} with tau = dedup_fraction * h, so merged points are within
 * tau in the box norm max |v_i|^{1/w_i}. Edges are undirected with length h, and graph
 * distances are h times hop counts.
 */
class NetGraph
{
public:
  NetGraph(const detail::MoveSystem& sys, const Vec& center, double h, double explore_radius, const SolverConfig& cfg)
      : h_(h)
  {
    cfg.validate();
    sys.alg.check_size(center);
    if (!(h > 0.0) || !(explore_radius > h)) { throw Error(ErrorCode::InvalidConfig, "net step must satisfy 0 < h < radius"); }
    const int n = sys.alg.dim();
    const double tau = cfg.dedup_fraction * h;
    Vec cell(n);
    for (int i = 0; i < n; ++i) { cell[i] = std::pow(tau, sys.box.weights[static_cast<std::size_t>(i)]); }
    auto key_of = [&](const Vec& x) {
      detail::CellKey k;
      for (int i = 0; i < n; ++i) {
        k.c[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor((x[i] - center[i]) / cell[i] + 0.5));
      }
      return k;
    };
    auto center_of = [&](const detail::CellKey& k) {
      Vec x(n);
      for (int i = 0; i < n; ++i) { x[i] = center[i] + static_cast<double>(k.c[static_cast<std::size_t>(i)]) * cell[i]; }
      return x;
    };
    const detail::FrameEvaluator fe(sys.alg);
    const int max_depth = static_cast<int>(std::ceil(explore_radius / h - 1e-9));
    const std::size_t K = sys.moves.size();
    std::unordered_map<detail::CellKey, std::uint32_t, detail::CellHash> grid;
    grid.reserve(std::min<std::size_t>(cfg.max_nodes, 1u << 20));
    std::vector<std::int32_t> depth;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    coords_.push_back(center);
    depth.push_back(0);
    grid.emplace(key_of(center), 0u);
    for (std::size_t p = 0; p < coords_.size(); ++p) {
      if (depth[p] >= max_depth) { continue; }
      for (std::size_t k = 0; k < K; ++k) {
        const Vec target = detail::right_translate(sys, fe, coords_[p], h * sys.moves[k]);
        if (!(target.norm() <= sys.chart_radius)) { continue; }
        const auto key = key_of(target);
        auto [it, inserted] = grid.try_emplace(key, static_cast<std::uint32_t>(coords_.size()));
        if (inserted) {
          if (coords_.size() >= cfg.max_nodes) {
            throw Error(ErrorCode::BudgetExceeded, "net exploration exceeded " + std::to_string(cfg.max_nodes) + " nodes");
          }
          coords_.push_back(center_of(key));
          depth.push_back(depth[p] + 1);
        }
        if (it->second != p) { edges.emplace_back(static_cast<std::uint32_t>(p), it->second); }
      }
    }
    // Undirected adjacency in CSR form.
    const std::size_t N = coords_.size();
    offset_.assign(N + 1, 0);
    for (const auto& [a, b] : edges) {
      ++offset_[a + 1];
      ++offset_[b + 1];
    }
    for (std::size_t i = 0; i < N; ++i) { offset_[i + 1] += offset_[i]; }
    adj_.resize(offset_[N]);
    std::vector<std::size_t> fill(offset_.begin(), offset_.end() - 1);
    for (const auto& [a, b] : edges) {
      adj_[fill[a]++] = b;
      adj_[fill[b]++] = a;
    }
    hops_from_center_ = bfs(0);
  }

  std::size_t size() const noexcept { return coords_.size(); }
  double h() const noexcept { return h_; }
  const Vec& coords(std::size_t i) const { return coords_[i]; }
  /// Hop count from the center, -1 if unreachable in the undirected graph.
  std::int32_t hops(std::size_t i) const { return hops_from_center_[i]; }

  /// Hop counts from source to every node (-1 when unreachable).
  std::vector<std::int32_t> bfs(std::size_t source) const
  {
    std::vector<std::int32_t> dist(coords_.size(), -1);
    std::vector<std::uint32_t> queue;
    queue.reserve(coords_.size());
    dist[source] = 0;
    queue.push_back(static_cast<std::uint32_t>(source));
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::uint32_t v = queue[qi];
      for (std::size_t e = offset_[v]; e < offset_[v + 1]; ++e) {
        const std::uint32_t w = adj_[e];
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    return dist;
  }

  /// Nodes whose graph distance to the center is at most radius.
  std::vector<std::size_t> ball(double radius) const
  {
    const auto limit = static_cast<std::int32_t>(std::floor(radius / h_ + 1e-9));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (hops_from_center_[i] >= 0 && hops_from_center_[i] <= limit) { out.push_back(i); }
    }
    return out;
  }

  /**
   * Picks at most max_points ball nodes and returns them with their graph distances.
   *
   * Without anchors: farthest-point sampling in the graph metric, seeded with the center
   * and the first node of maximal depth, lowest index on ties. With anchors: the center,
   * then for each anchor the node nearest in box norm (repeats dropped), up to max_points.
   * Anchors snap to ball nodes only, unless restrict_to_ball is false.
   */
  FiniteMetricSpace sample(double radius, std::size_t max_points, const Grading& box,
                           const std::vector<Vec>& anchors = {}, bool restrict_to_ball = true) const
  {
    const auto in_ball = ball(radius);
    std::vector<std::size_t> everything;
    if (!restrict_to_ball) {
      everything.resize(coords_.size());
      for (std::size_t i = 0; i < everything.size(); ++i) { everything[i] = i; }
    }
    const auto& candidates = restrict_to_ball ? in_ball : everything;
    const std::size_t N = coords_.size();
    std::vector<char> is_candidate(N, 0);
    for (auto c : candidates) { is_candidate[c] = 1; }
    std::size_t deepest = 0;
    for (auto c : candidates) {
      if (hops_from_center_[c] > hops_from_center_[deepest]) { deepest = c; }
    }
    // lower[a][b] holds the hop count between chosen[a] and chosen[b] for b < a.
    std::vector<std::size_t> chosen;
    std::vector<std::vector<std::int32_t>> lower;
    std::vector<std::int32_t> gap(N, std::numeric_limits<std::int32_t>::max());
    auto add = [&](std::size_t v) {
      if (chosen.size() >= max_points || std::find(chosen.begin(), chosen.end(), v) != chosen.end()) { return; }
      const auto row = bfs(v);
      std::vector<std::int32_t> back;
      for (auto c : chosen) { back.push_back(row[c]); }
      chosen.push_back(v);
      lower.push_back(std::move(back));
      for (auto c : candidates) { gap[c] = std::min(gap[c], row[c] < 0 ? std::numeric_limits<std::int32_t>::max() : row[c]); }
    };
    add(0);
    if (anchors.empty() && deepest != 0) { add(deepest); }
    if (!anchors.empty()) {
      for (const auto& a : anchors) {
        std::size_t best = N;
        double best_d = std::numeric_limits<double>::infinity();
        for (auto c : candidates) {
          const double d = box_norm(box, coords_[c] - a);
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        if (best < N) { add(best); }
      }
    } else {
      while (chosen.size() < std::min(max_points, candidates.size())) {
        std::size_t next = N;
        for (auto c : candidates) {
          if (gap[c] > 0 && (next == N || gap[c] > gap[next])) { next = c; }
        }
        if (next == N) { break; }
        add(next);
      }
    }
    const auto k = static_cast<Eigen::Index>(chosen.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k, k);
    std::vector<Vec> pts;
    for (Eigen::Index a = 0; a < k; ++a) {
      pts.push_back(coords_[chosen[static_cast<std::size_t>(a)]]);
      for (Eigen::Index b = 0; b < a; ++b) {
        const std::int32_t hop = lower[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        if (hop < 0) { throw Error(ErrorCode::SolverFailed, "net graph is disconnected"); }
        d(a, b) = d(b, a) = h_ * hop;
      }
    }
    return FiniteMetricSpace(std::move(d), std::move(pts));
  }

private:
  double h_;
  std::vector<Vec> coords_;
  std::vector<std::size_t> offset_;
  std::vector<std::uint32_t> adj_;
  std::vector<std::int32_t> hops_from_center_;
};

/**
 * Net of the closed CC ball B(center, radius) with graph distances.
 *
 * Returns at most cfg.max_points points chosen by farthest-point sampling; distances
 * overestimate the CC distance by O(h) plus the direction-quantization error.
 */
inline FiniteMetricSpace ball_net(const SubRiemannianGroup& G, const Vec& center, double radius, double h,
                                  const SolverConfig& cfg = {})
{
  G.require_in_chart(center);
  if (!(h > 0.0 && h < radius)) { throw Error(ErrorCode::InvalidConfig, "net step must satisfy 0 < h < radius"); }
  if (radius > G.chart_radius()) { throw Error(ErrorCode::OutOfChart, "ball radius exceeds the chart radius"); }
  const auto sys = detail::horizontal_moves(G, cfg.directions);
  const NetGraph graph(sys, center, h, radius * cfg.explore_factor, cfg);
  return graph.sample(radius, cfg.max_points, G.grading());
}

}  // namespace srprofile
