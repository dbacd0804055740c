#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "detail/lbfgs.hpp"
#include "geometry.hpp"

namespace srprofile {

struct DistanceResult
{
  double distance = 0.0;
  PathCertificate certificate;
};

namespace detail {

/**
 * Control-affine system x' = psi(ad_x) field w with w orthonormal controls.
 *
 * to_tuple converts w into the control tuple stored in certificates; scale holds the
 * weights used to normalise the endpoint residual.
 */
struct ControlSystem
{
  FrameEvaluator fe;
  Mat field;
  Mat to_tuple;
  Grading scale;
  double chart_radius;
};

inline Mat inverse_transpose_cholesky(const Mat& metric)
{
  Eigen::LLT<Mat> llt(metric);
  if (llt.info() != Eigen::Success) { throw Error(ErrorCode::InvalidMetric, "metric is not positive definite"); }
  const Mat L = llt.matrixL();
  return L.transpose().inverse();
}

inline ControlSystem horizontal_system(const SubRiemannianGroup& G)
{
  const Mat LinvT = inverse_transpose_cholesky(G.metric());
  return {FrameEvaluator(G.alg()), G.horizontal_embedding() * LinvT, LinvT, G.grading(), G.chart_radius()};
}

inline ControlSystem full_system(const SubRiemannianGroup& G, const Mat& full_metric)
{
  const int n = G.dim();
  if (full_metric.rows() != n || full_metric.cols() != n) {
    throw Error(ErrorCode::InvalidMetric, "full metric must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if ((full_metric - full_metric.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * std::max(1.0, full_metric.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::InvalidMetric, "full metric is not symmetric");
  }
  const Mat LinvT = inverse_transpose_cholesky(full_metric);
  return {FrameEvaluator(G.alg()), LinvT, LinvT, uniform_grading(n), G.chart_radius()};
}

struct ControlSolution
{
  std::vector<Vec> w;
  double length         = std::numeric_limits<double>::infinity();
  double endpoint_error = std::numeric_limits<double>::infinity();
};

/// Augmented-Lagrangian energy minimisation from one initial guess z0 (controls divided by s).
inline ControlSolution solve_from(const ControlSystem& sys, const Vec& x, const Vec& y, double s, Eigen::VectorXd z,
                                  const SolverConfig& cfg)
{
  const int n = sys.fe.dim();
  const int m = static_cast<int>(sys.field.cols());
  const int N = cfg.segments;
  const double dt = 1.0 / N;
  Vec dscale(n);
  for (int i = 0; i < n; ++i) { dscale[i] = std::pow(s, sys.scale.weights[static_cast<std::size_t>(i)]); }

  std::vector<Mat> Ax(static_cast<std::size_t>(N)), Ab(static_cast<std::size_t>(N));
  Vec lambda = Vec::Zero(n);
  double mu  = cfg.penalty_weight;

  auto endpoint = [&](const Eigen::VectorXd& zz, bool with_jacobians, Vec& out) -> bool {
    Vec xk = x;
    for (int k = 0; k < N; ++k) {
      const Vec b = sys.field * (s * zz.segment(k * m, m));
      if (with_jacobians) {
        xk = rk4_step(sys.fe, xk, b, dt, &Ax[static_cast<std::size_t>(k)], &Ab[static_cast<std::size_t>(k)]);
      } else {
        xk = rk4_step(sys.fe, xk, b, dt);
      }
      if (!(xk.norm() <= sys.chart_radius)) { return false; }
    }
    out = xk;
    return true;
  };

  auto objective = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& grad) -> double {
    Vec xN;
    if (!endpoint(zz, true, xN)) { return std::numeric_limits<double>::infinity(); }
    const Vec r = (xN - y).cwiseQuotient(dscale);
    const double f = zz.squaredNorm() * dt + lambda.dot(r) + 0.5 * mu * r.squaredNorm();
    Vec p = (lambda + mu * r).cwiseQuotient(dscale);
    grad.resize(zz.size());
    for (int k = N - 1; k >= 0; --k) {
      const auto ks = static_cast<std::size_t>(k);
      grad.segment(k * m, m) = 2.0 * dt * zz.segment(k * m, m) + s * (Ab[ks] * sys.field).transpose() * p;
      p = Ax[ks].transpose() * p;
    }
    return f;
  };

  auto residual = [&](const Eigen::VectorXd& zz, Vec& r) -> bool {
    Vec xN;
    if (!endpoint(zz, false, xN)) { return false; }
    r = (xN - y).cwiseQuotient(dscale);
    return true;
  };

  constexpr int kRounds       = 16;
  constexpr double kTargetRes = 1e-10;
  double prev_res = std::numeric_limits<double>::infinity();
  Vec r;
  for (int round = 0; round < kRounds; ++round) {
    auto res = lbfgs_minimize(objective, z, cfg.max_iter, 1e-12);
    if (!std::isfinite(res.f)) { break; }
    z = res.x;
    if (!residual(z, r)) { break; }
    const double rn = r.lpNorm<Eigen::Infinity>();
    if (rn <= kTargetRes) { break; }
    lambda += mu * r;
    if (rn > 0.1 * prev_res && mu < 1e8) { mu *= 10.0; }
    prev_res = rn;
  }

  ControlSolution out;
  Vec xN;
  if (!endpoint(z, false, xN)) { return out; }
  out.endpoint_error = (xN - y).norm();
  out.length         = 0.0;
  out.w.reserve(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    out.w.emplace_back(s * z.segment(k * m, m));
    out.length += out.w.back().norm() * dt;
  }
  return out;
}

/// Straight start plus seeded random Fourier loops; best converged solution by length, lowest index on ties.
inline ControlSolution solve_controls(const ControlSystem& sys, const Vec& x, const Vec& y, const Vec& straight_u,
                                      const SolverConfig& cfg)
{
  const int m = static_cast<int>(sys.field.cols());
  const int N = cfg.segments;
  const double s = box_norm(sys.scale, y - x);
  ControlSolution zero;
  if (s == 0.0) {
    zero.w.assign(static_cast<std::size_t>(N), Vec::Zero(m));
    zero.length = 0.0;
    zero.endpoint_error = 0.0;
    return zero;
  }
  // straight_u is expressed in tuple coordinates; convert to orthonormal controls.
  const Vec w_straight = sys.to_tuple.inverse() * straight_u;
  ControlSolution best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int start = 0; start < cfg.multistarts; ++start) {
    Eigen::VectorXd z(N * m);
    for (int k = 0; k < N; ++k) { z.segment(k * m, m) = w_straight / s; }
    if (start > 0) {
      std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(start));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int f = 1; f <= 3; ++f) {
        Eigen::VectorXd a(m), b(m);
        for (int j = 0; j < m; ++j) {
          a[j] = 1.5 * normal(rng) / f;
          b[j] = 1.5 * normal(rng) / f;
        }
        for (int k = 0; k < N; ++k) {
          const double t = (k + 0.5) / N;
          z.segment(k * m, m) += a * std::cos(2.0 * std::numbers::pi * f * t) + b * std::sin(2.0 * std::numbers::pi * f * t);
        }
      }
    }
    ControlSolution sol = solve_from(sys, x, y, s, std::move(z), cfg);
    best_res = std::min(best_res, sol.endpoint_error);
    if (sol.endpoint_error <= cfg.tol && sol.length < best.length) { best = std::move(sol); }
  }
  if (!std::isfinite(best.length)) {
    throw SolverFailed("no path within tolerance " + std::to_string(cfg.tol) + " after " + std::to_string(cfg.multistarts)
                           + " starts",
                       best_res);
  }
  return best;
}

}  // namespace detail

/**
 * Carnot-Caratheodory distance by direct trajectory optimisation.
 *
 * Minimises the energy of piecewise-constant horizontal controls over unit time subject to
 * the endpoint constraint (augmented Lagrangian, L-BFGS inner solver, exact gradients by an
 * adjoint pass through the RK4 steps). The reported distance is the certificate length.
 */
inline DistanceResult cc_distance(const SubRiemannianGroup& G, const Vec& x, const Vec& y, const SolverConfig& cfg = {})
{
  cfg.validate();
  G.require_in_chart(x);
  G.require_in_chart(y);
  const auto sys = detail::horizontal_system(G);
  const Vec straight = G.horizontal_embedding().transpose() * (y - x);
  auto sol = detail::solve_controls(sys, x, y, straight, cfg);
  DistanceResult out;
  out.certificate.dt             = 1.0 / cfg.segments;
  out.certificate.endpoint_error = sol.endpoint_error;
  for (const auto& w : sol.w) { out.certificate.controls.emplace_back(sys.to_tuple * w); }
  out.certificate.length = sol.length;
  out.distance           = sol.length;
  return out;
}

/// Distance of the Riemannian metric full_metric (Gram matrix of the whole frame), same solver.
inline double riemannian_distance(const SubRiemannianGroup& G, const Mat& full_metric, const Vec& x, const Vec& y,
                                  const SolverConfig& cfg = {})
{
  cfg.validate();
  G.require_in_chart(x);
  G.require_in_chart(y);
  const auto sys = detail::full_system(G, full_metric);
  return detail::solve_controls(sys, x, y, y - x, cfg).length;
}

}  // namespace srprofile
