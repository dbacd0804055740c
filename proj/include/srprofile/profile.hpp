#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ball_net.hpp"
#include "cc_distance.hpp"
#include "families.hpp"
#include "geometry.hpp"
#include "gh.hpp"
#include "metric_space.hpp"

namespace srprofile {

/**
 * Profile curves.
 *
 *   ambient  CC ball of radius eps around x in G, distances divided by eps
 *   Dg       CC unit ball of the rescaled structure G_eps around delta_eps^{-1} x
 *   delta    fixed unit-ball points p of the nilpotentization with distances
 *            d(delta_eps p, delta_eps q) / eps, i.e. the CC distance of G_eps
 *   Delta    unit ball of the Riemannian metric on G_eps with the whole frame orthonormal
 *   limit    CC unit ball of the nilpotentization (the same space for every eps)
 */
enum class ProfileVariant { Ambient, Delta, DeltaRiemannian, Dg, Limit };

inline const char* to_string(ProfileVariant v)
{
  switch (v) {
    case ProfileVariant::Ambient: return "ambient";
    case ProfileVariant::Delta: return "delta";
    case ProfileVariant::DeltaRiemannian: return "Delta";
    case ProfileVariant::Dg: return "Dg";
    case ProfileVariant::Limit: return "limit";
  }
  return "unknown";
}

inline ProfileVariant parse_variant(const std::string& s)
{
  for (auto v : {ProfileVariant::Ambient, ProfileVariant::Delta, ProfileVariant::DeltaRiemannian, ProfileVariant::Dg,
                 ProfileVariant::Limit}) {
    if (s == to_string(v)) { return v; }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown profile variant '" + s + "' (ambient, delta, Delta, Dg, limit)");
}

struct ProfileSample
{
  std::vector<double> eps_grid;
  std::vector<FiniteMetricSpace> spaces;
  ProfileVariant variant = ProfileVariant::Ambient;
  Vec basepoint;
  double net_h = 0.1;
};

struct FitReport
{
  double alpha    = 0.0;
  double C        = 0.0;
  double residual = 0.0;
  bool pass       = false;
  bool saturated  = false;  ///< some value sits at or below the resolution floor
};

struct ProfileOptions
{
  double net_h = 0.1;
  std::vector<Vec> anchors;  ///< unit-ball points of the nilpotentization used to pick slice points
  int threads = 1;
};

inline nlohmann::json to_json(const FitReport& f)
{
  return {{"alpha", f.alpha}, {"C", f.C}, {"residual", f.residual}, {"pass", f.pass}, {"saturated", f.saturated}};
}

namespace detail {

inline void validate_eps_grid(const std::vector<double>& eps)
{
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0) || !std::isfinite(eps[k])) { throw Error(ErrorCode::InvalidScale, "eps values must be positive"); }
    if (k > 0 && !(eps[k] < eps[k - 1])) { throw Error(ErrorCode::InvalidScale, "eps grid must be strictly decreasing"); }
  }
}

inline void validate_net_h(double h)
{
  if (!(h > 0.0 && h <= 0.5)) { throw Error(ErrorCode::InvalidConfig, "net_h must lie in (0, 0.5]"); }
}

/// Runs job(k) for k < count on at most `threads` workers; rethrows the lowest-index failure.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job)
{
  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 64));
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t k) {
    try {
      job(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (workers == 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) { run(k); }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) { run(k); }
      });
    }
    for (auto& t : pool) { t.join(); }
  }
  for (auto& e : errors) {
    if (e) { std::rethrow_exception(e); }
  }
}

inline SubRiemannianGroup nilpotent_group(const SubRiemannianGroup& G)
{
  return SubRiemannianGroup(nilpotentize(G.alg(), G.grading()), G.grading(), G.metric(), G.chart_radius());
}

/// x * exp(v) in the group of sys.
inline Vec translate(const MoveSystem& sys, const Vec& x, const Vec& v)
{
  return right_translate(sys, FrameEvaluator(sys.alg), x, v);
}

/// Least squares fit of log y = alpha log x + log C over entries with y > 0.
inline FitReport loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  FitReport f;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (y[k] > 0.0) {
      lx.push_back(std::log(x[k]));
      ly.push_back(std::log(y[k]));
    }
  }
  if (lx.size() < 2) { return f; }
  const auto n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k] / n;
    my += ly[k] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  if (sxx == 0.0) { return f; }
  f.alpha = sxy / sxx;
  const double logC = my - f.alpha * mx;
  f.C = std::exp(logC);
  double ss = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - (f.alpha * lx[k] + logC);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

}  // namespace detail

/// Unit CC ball net of the nilpotentization, farthest-point sampled.
inline FiniteMetricSpace limit_profile(const SubRiemannianGroup& G, double net_h, const SolverConfig& cfg = {})
{
  detail::validate_net_h(net_h);
  const auto N = detail::nilpotent_group(G);
  return ball_net(N, Vec::Zero(G.dim()), 1.0, net_h, cfg);
}

/**
 * Samples one profile variant over eps_grid at basepoint x.
 *
 * Nets use step eps * net_h in G (ambient) or net_h in the rescaled picture, so every slice
 * is a unit-radius space at resolution net_h. With opts.anchors, slice points are the nodes
 * nearest to x * exp(delta_eps v) (ambient) or x' * exp(v) (rescaled variants), which keeps
 * point i of every slice over the same point of the tangent cone. The delta variant needs
 * anchors; without them it uses the points of limit_profile. Delta always uses
 * farthest-point sampling.
 */
inline ProfileSample sample_profile(const SubRiemannianGroup& G, const Vec& x, ProfileVariant variant,
                                    const std::vector<double>& eps_grid, const SolverConfig& cfg = {},
                                    ProfileOptions opts = {})
{
  cfg.validate();
  detail::validate_net_h(opts.net_h);
  detail::validate_eps_grid(eps_grid);
  G.require_in_chart(x);
  for (const auto& a : opts.anchors) { G.alg().check_size(a); }
  if (variant == ProfileVariant::Ambient) {
    for (double e : eps_grid) {
      if (e > G.chart_radius()) { throw Error(ErrorCode::OutOfChart, "eps exceeds the chart radius"); }
    }
  }
  ProfileSample out;
  out.eps_grid  = eps_grid;
  out.variant   = variant;
  out.basepoint = x;
  out.net_h     = opts.net_h;
  if (eps_grid.empty()) { return out; }

  const double h = opts.net_h;
  if (variant == ProfileVariant::Limit) {
    const auto N = detail::nilpotent_group(G);
    const auto sys = detail::horizontal_moves(N, cfg.directions);
    const NetGraph graph(sys, Vec::Zero(G.dim()), h, cfg.explore_factor, cfg);
    const auto space = graph.sample(1.0, cfg.max_points, G.grading(), opts.anchors);
    out.spaces.assign(eps_grid.size(), space);
    return out;
  }
  if (variant == ProfileVariant::Delta && opts.anchors.empty()) {
    opts.anchors = limit_profile(G, h, cfg).coords();
  }

  std::vector<FiniteMetricSpace> spaces(eps_grid.size());
  detail::parallel_for(eps_grid.size(), opts.threads, [&](std::size_t k) {
    const double eps = eps_grid[k];
    switch (variant) {
      case ProfileVariant::Ambient: {
        const auto sys = detail::horizontal_moves(G, cfg.directions);
        std::vector<Vec> anchors;
        for (const auto& v : opts.anchors) { anchors.push_back(detail::translate(sys, x, dilate(G.grading(), eps, v))); }
        const NetGraph graph(sys, x, eps * h, eps * cfg.explore_factor, cfg);
        spaces[k] = graph.sample(eps, cfg.max_points, G.grading(), anchors).scaled(1.0 / eps);
        break;
      }
      case ProfileVariant::Dg:
      case ProfileVariant::Delta: {
        const auto Ge = rescaled_structure(G, eps);
        const Vec center = dilate(G.grading(), 1.0 / eps, x);
        Ge.require_in_chart(center);
        const auto sys = detail::horizontal_moves(Ge, cfg.directions);
        std::vector<Vec> anchors;
        for (const auto& v : opts.anchors) { anchors.push_back(detail::translate(sys, center, v)); }
        const NetGraph graph(sys, center, h, cfg.explore_factor, cfg);
        spaces[k] = graph.sample(1.0, cfg.max_points, G.grading(), anchors, variant == ProfileVariant::Dg);
        break;
      }
      case ProfileVariant::DeltaRiemannian: {
        const auto Ge = rescaled_structure(G, eps);
        const Vec center = dilate(G.grading(), 1.0 / eps, x);
        Ge.require_in_chart(center);
        const auto sys = detail::full_moves(Ge, Mat::Identity(G.dim(), G.dim()), cfg.directions);
        const NetGraph graph(sys, center, h, cfg.explore_factor, cfg);
        spaces[k] = graph.sample(1.0, cfg.max_points, uniform_grading(G.dim()));
        break;
      }
      case ProfileVariant::Limit: break;
    }
  });
  out.spaces = std::move(spaces);
  return out;
}

/// Resolution floor of gh_upper between two nets of step net_h.
inline double resolution_floor(double net_h) { return 2.0 * net_h; }

/**
 * Fits g(eps) = gh_upper(P_eps, limit) ~ C eps^alpha.
 *
 * pass requires g to decrease along the grid within 15% (values clamped to the floor) and a
 * log-residual of at most kFitResidual. When some g is at or below the floor the fit is
 * flagged saturated and pass only needs the clamped monotonicity.
 */
inline constexpr double kFitResidual = 0.25;
inline constexpr double kMonotoneSlack = 0.15;

inline FitReport convergence_fit(const ProfileSample& sample, const FiniteMetricSpace& limit, const SolverConfig& cfg,
                                 std::vector<double>* values = nullptr)
{
  if (sample.eps_grid.size() < 3) { throw Error(ErrorCode::NeedMoreSamples, "convergence fit needs at least 3 eps values"); }
  const double floor = resolution_floor(sample.net_h);
  std::vector<double> g;
  for (const auto& s : sample.spaces) { g.push_back(gh_upper(s, limit, cfg).value); }
  FitReport f = detail::loglog_fit(sample.eps_grid, g);
  f.saturated = std::any_of(g.begin(), g.end(), [&](double v) { return v <= floor; });
  bool monotone = true;
  for (std::size_t k = 1; k < g.size(); ++k) {
    if (std::max(g[k], floor) > (1.0 + kMonotoneSlack) * std::max(g[k - 1], floor)) { monotone = false; }
  }
  f.pass = monotone && (f.saturated || f.residual <= kFitResidual);
  if (values) { *values = g; }
  return f;
}

/// One slice of a rectifiability grid: the profile at scale eps * a.
struct RectifiabilityCell
{
  double eps;
  double a;
  FiniteMetricSpace space;
};

inline constexpr double kRectifiabilityOrder = 1.0 - 0.3;

/**
 * Joint order of gh_upper(cell, limit) in eps * a; pass iff order >= 0.7 or every value
 * is at the resolution floor.
 */
inline FitReport rectifiability_check(const std::vector<RectifiabilityCell>& cells, const FiniteMetricSpace& limit,
                                      double net_h, const SolverConfig& cfg = {})
{
  std::vector<double> eps, as, t, g;
  for (const auto& c : cells) {
    if (!(c.eps > 0.0) || !(c.a > 0.0)) { throw Error(ErrorCode::InvalidScale, "rectifiability grid needs positive eps and a"); }
    if (std::find(eps.begin(), eps.end(), c.eps) == eps.end()) { eps.push_back(c.eps); }
    if (std::find(as.begin(), as.end(), c.a) == as.end()) { as.push_back(c.a); }
    if (std::find(t.begin(), t.end(), c.eps * c.a) == t.end()) { t.push_back(c.eps * c.a); }
  }
  if (cells.size() < 3 || eps.size() < 2 || as.size() < 2 || t.size() < 2) {
    throw Error(ErrorCode::NeedMoreSamples, "rectifiability needs at least 3 cells over 2 eps and 2 a values");
  }
  t.clear();
  for (const auto& c : cells) {
    t.push_back(c.eps * c.a);
    g.push_back(gh_upper(c.space, limit, cfg).value);
  }
  const double floor = resolution_floor(net_h);
  FitReport f = detail::loglog_fit(t, g);
  const bool all_floor = std::all_of(g.begin(), g.end(), [&](double v) { return v <= floor; });
  f.saturated = std::any_of(g.begin(), g.end(), [&](double v) { return v <= floor; });
  f.pass      = all_floor || f.alpha >= kRectifiabilityOrder;
  return f;
}

enum class Verdict { Equivalent, Distinct, Undecided };

inline const char* to_string(Verdict v)
{
  switch (v) {
    case Verdict::Equivalent: return "Equivalent";
    case Verdict::Distinct: return "Distinct";
    case Verdict::Undecided: return "Undecided";
  }
  return "Undecided";
}

struct EquivalenceReport
{
  FitReport fit;
  Verdict verdict = Verdict::Undecided;
  std::vector<double> h;
};

/**
 * Fits h(eps) = gh_upper(P1(eps), P2(eps)) ~ C eps^beta. Equivalent iff beta > 1 + margin
 * or every h is at the floor; Distinct iff beta < 1 - margin and C exceeds the floor.
 */
inline EquivalenceReport curvature_equivalence(const ProfileSample& s1, const ProfileSample& s2, const SolverConfig& cfg = {},
                                               double margin = 0.2)
{
  if (s1.eps_grid != s2.eps_grid || s1.net_h != s2.net_h || s1.spaces.size() != s2.spaces.size()) {
    throw Error(ErrorCode::GridMismatch, "profiles must share eps grid and net step");
  }
  EquivalenceReport r;
  for (std::size_t k = 0; k < s1.spaces.size(); ++k) { r.h.push_back(gh_upper(s1.spaces[k], s2.spaces[k], cfg).value); }
  const double floor = resolution_floor(s1.net_h);
  r.fit = detail::loglog_fit(s1.eps_grid, r.h);
  const bool all_floor = std::all_of(r.h.begin(), r.h.end(), [&](double v) { return v <= floor; });
  r.fit.saturated = std::any_of(r.h.begin(), r.h.end(), [&](double v) { return v <= floor; });
  if (all_floor || (r.h.size() >= 2 && r.fit.alpha > 1.0 + margin)) { r.verdict = Verdict::Equivalent; }
  else if (r.h.size() >= 2 && r.fit.alpha < 1.0 - margin && r.fit.C > floor) { r.verdict = Verdict::Distinct; }
  r.fit.pass = r.verdict != Verdict::Undecided;
  return r;
}

struct RigidityRow
{
  double eps        = 0.0;
  double delta      = 0.0;  ///< max |d1 - d2| over the sampled pairs
  double normalized = 0.0;  ///< delta / eps^2
};

struct RigidityReport
{
  std::vector<RigidityRow> rows;
  FitReport fit;  ///< order of delta in eps; pass iff order >= 2 - 0.3
};

/// Seeded point pairs in the cube [-half_width, half_width]^n.
inline std::vector<std::pair<Vec, Vec>> rigidity_pairs(int dim, int count, std::uint64_t seed, double half_width = 0.5)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-half_width, half_width);
  std::vector<std::pair<Vec, Vec>> out;
  for (int k = 0; k < count; ++k) {
    Vec a(dim), b(dim);
    for (int i = 0; i < dim; ++i) { a[i] = U(rng); }
    for (int i = 0; i < dim; ++i) { b[i] = U(rng); }
    out.emplace_back(a, b);
  }
  return out;
}

/**
 * Delta(eps) = max over pairs of |d1(delta_eps x, delta_eps y) - d2(delta_eps x, delta_eps y)|.
 *
 * Both groups must share the grading and horizontal metric. The first solver failure
 * propagates.
 */
inline RigidityReport bracket_rigidity_scan(const SubRiemannianGroup& G1, const SubRiemannianGroup& G2,
                                            const std::vector<double>& eps_grid,
                                            const std::vector<std::pair<Vec, Vec>>& pairs, const SolverConfig& cfg = {},
                                            int threads = 1)
{
  cfg.validate();
  detail::validate_eps_grid(eps_grid);
  if (G1.dim() != G2.dim() || G1.grading().weights != G2.grading().weights) {
    throw Error(ErrorCode::InvalidDimension, "rigidity scan needs groups with the same grading");
  }
  if (G1.metric() != G2.metric()) { throw Error(ErrorCode::InvalidMetric, "rigidity scan needs the same horizontal metric"); }
  RigidityReport r;
  r.rows.resize(eps_grid.size());
  const std::size_t P = pairs.size();
  std::vector<double> diffs(eps_grid.size() * P, 0.0);
  detail::parallel_for(eps_grid.size() * P, threads, [&](std::size_t job) {
    const double eps = eps_grid[job / P];
    const auto& [x, y] = pairs[job % P];
    const Vec a = dilate(G1.grading(), eps, x);
    const Vec b = dilate(G1.grading(), eps, y);
    diffs[job] = std::abs(cc_distance(G1, a, b, cfg).distance - cc_distance(G2, a, b, cfg).distance);
  });
  std::vector<double> delta;
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    double m = 0.0;
    for (std::size_t p = 0; p < P; ++p) { m = std::max(m, diffs[k * P + p]); }
    r.rows[k] = {eps_grid[k], m, m / (eps_grid[k] * eps_grid[k])};
    delta.push_back(m);
  }
  r.fit = detail::loglog_fit(eps_grid, delta);
  r.fit.saturated = std::any_of(delta.begin(), delta.end(), [&](double v) { return v <= 2.0 * cfg.tol; });
  r.fit.pass = std::all_of(delta.begin(), delta.end(), [&](double v) { return v <= 2.0 * cfg.tol; })
            || r.fit.alpha >= 2.0 - 0.3;
  return r;
}

/// Same scan from contact-family parameters without isotropy; both must satisfy A + D = 0.
inline RigidityReport bracket_rigidity_scan(const ContactFamilyParams& p1, const ContactFamilyParams& p2,
                                            const std::vector<double>& eps_grid,
                                            const std::vector<std::pair<Vec, Vec>>& pairs, const SolverConfig& cfg = {},
                                            int threads = 1)
{
  for (const auto* p : {&p1, &p2}) {
    if (p->has_isotropy) { throw Error(ErrorCode::InvalidConfig, "rigidity scan covers the group family only"); }
    if (!(std::abs(p->A + p->D) <= kParamTol)) { throw ConstraintViolation("A+D=0", p->A + p->D); }
  }
  const SubRiemannianGroup G1(contact_family(p1), Grading{{1, 1, 2}});
  const SubRiemannianGroup G2(contact_family(p2), Grading{{1, 1, 2}});
  return bracket_rigidity_scan(G1, G2, eps_grid, pairs, cfg, threads);
}

inline nlohmann::json to_json(const RigidityReport& r)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) { rows.push_back({{"eps", row.eps}, {"delta", row.delta}, {"delta_over_eps2", row.normalized}}); }
  return {{"rows", rows}, {"fit", to_json(r.fit)}};
}

/// Profile report: per-slice GH to the limit, pairwise GH between slices and the convergence fit.
struct ProfileReport
{
  ProfileSample sample;
  std::vector<double> gh_to_limit;
  std::vector<std::vector<double>> gh_pairwise;
  std::optional<FitReport> fit;
};

inline ProfileReport profile_report(ProfileSample sample, const FiniteMetricSpace* limit, const SolverConfig& cfg = {})
{
  ProfileReport r;
  const std::size_t n = sample.spaces.size();
  r.gh_pairwise.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      r.gh_pairwise[i][j] = r.gh_pairwise[j][i] = gh_upper(sample.spaces[i], sample.spaces[j], cfg).value;
    }
  }
  if (limit) {
    if (n >= 3) { r.fit = convergence_fit(sample, *limit, cfg, &r.gh_to_limit); }
    else {
      for (const auto& s : sample.spaces) { r.gh_to_limit.push_back(gh_upper(s, *limit, cfg).value); }
    }
  }
  r.sample = std::move(sample);
  return r;
}

inline nlohmann::json to_json(const ProfileReport& r)
{
  nlohmann::json slices = nlohmann::json::array();
  for (std::size_t k = 0; k < r.sample.spaces.size(); ++k) {
    slices.push_back({{"eps", r.sample.eps_grid[k]},
                      {"points", r.sample.spaces[k].size()},
                      {"diameter", r.sample.spaces[k].diameter()}});
  }
  nlohmann::json out{{"variant", to_string(r.sample.variant)},
                     {"eps", r.sample.eps_grid},
                     {"net_h", r.sample.net_h},
                     {"basepoint", std::vector<double>(r.sample.basepoint.data(), r.sample.basepoint.data() + r.sample.basepoint.size())},
                     {"slices", slices},
                     {"gh_to_limit", r.gh_to_limit},
                     {"gh_pairwise", r.gh_pairwise}};
  out["fit"] = r.fit ? to_json(*r.fit) : nlohmann::json(nullptr);
  return out;
}

/// CSV file name of one slice: <run-id>_<variant>_<eps>.csv.
inline std::string slice_file_name(const std::string& run_id, ProfileVariant v, double eps)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, eps);
  return run_id + "_" + to_string(v) + "_" + std::string(buf, res.ptr) + ".csv";
}

}  // namespace srprofile
