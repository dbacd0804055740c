#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace srprofile::detail {

struct LbfgsResult
{
  Eigen::VectorXd x;
  double f       = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/**
 * Limited-memory BFGS with backtracking Armijo line search.
 *
 * fg(x, grad) returns the objective and fills grad; it may return +inf for infeasible x,
 * which the line search treats as a rejected step. Curvature pairs with s'y <= 0 are skipped.
 */
template <class Fn>
LbfgsResult lbfgs_minimize(Fn&& fg, Eigen::VectorXd x, int max_iter, double grad_tol, int memory = 12)
{
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n), g_new(n), x_new(n), d(n);
  double f = fg(x, g);
  LbfgsResult out;
  if (!std::isfinite(f)) {
    out.x = x;
    return out;
  }
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;
  int stalls = 0;
  int it     = 0;
  for (; it < max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= grad_tol) { break; }
    // Two-loop recursion.
    d = -g;
    std::vector<double> alpha(S.size());
    for (std::size_t k = S.size(); k-- > 0;) {
      alpha[k] = rho[k] * S[k].dot(d);
      d -= alpha[k] * Y[k];
    }
    if (!S.empty()) { d *= S.back().dot(Y.back()) / Y.back().squaredNorm(); }
    else { d /= std::max(1.0, g.norm()); }
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta = rho[k] * Y[k].dot(d);
      d += (alpha[k] - beta) * S[k];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      d     = -g / std::max(1.0, g.norm());
      slope = g.dot(d);
    }
    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * d;
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) { break; }
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    const double decrease = f - f_new;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    stalls = decrease <= 1e-15 * std::max(1.0, std::abs(f)) ? stalls + 1 : 0;
    if (stalls >= 5) { break; }
  }
  out.x          = x;
  out.f          = f;
  out.iterations = it;
  return out;
}

}  // namespace srprofile::detail
