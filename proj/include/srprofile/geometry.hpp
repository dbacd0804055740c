#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "families.hpp"
#include "lie_algebra.hpp"

namespace srprofile {

/// Solver and net-construction parameters shared by the distance engines.
struct SolverConfig
{
  int segments          = 40;     ///< piecewise-constant control segments per path
  int directions        = 16;     ///< K unit horizontal directions per net move
  int max_iter          = 300;    ///< quasi-Newton iterations per penalty round
  double penalty_weight = 10.0;   ///< initial penalty on the scaled endpoint residual
  double tol            = 1e-3;   ///< accepted endpoint error
  int multistarts       = 4;      ///< number of initial guesses (first one is the straight path)
  std::uint64_t seed    = 20240601;
  std::size_t max_nodes  = 1500000;  ///< net exploration budget
  std::size_t max_points = 300;      ///< points kept in a net
  double dedup_fraction  = 0.5;      ///< node merge radius as a fraction of the step h
  double explore_factor  = 1.5;      ///< nets explore to explore_factor * radius so that short paths may leave the ball

  void validate() const
  {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (segments < 1) { fail("segments must be >= 1"); }
    if (directions < 2) { fail("directions must be >= 2"); }
    if (max_iter < 1) { fail("max_iter must be >= 1"); }
    if (!(penalty_weight > 0.0)) { fail("penalty_weight must be > 0"); }
    if (!(tol > 0.0 && tol < 1.0)) { fail("tol must lie in (0, 1)"); }
    if (multistarts < 1) { fail("multistarts must be >= 1"); }
    if (seed == 0) { fail("seed must be positive"); }
    if (max_nodes < 1) { fail("max_nodes must be >= 1"); }
    if (max_points < 2) { fail("max_points must be >= 2"); }
    if (!(dedup_fraction > 0.0 && dedup_fraction < 1.0)) { fail("dedup_fraction must lie in (0, 1)"); }
    if (!(explore_factor >= 1.0 && explore_factor <= 4.0)) { fail("explore_factor must lie in [1, 4]"); }
  }
};

inline nlohmann::json to_json(const SolverConfig& c)
{
  return {{"segments", c.segments},       {"directions", c.directions}, {"max_iter", c.max_iter},
          {"penalty_weight", c.penalty_weight}, {"tol", c.tol},     {"multistarts", c.multistarts},
          {"seed", c.seed},               {"max_nodes", c.max_nodes}, {"max_points", c.max_points},
          {"dedup_fraction", c.dedup_fraction}, {"explore_factor", c.explore_factor}};
}

/// Overrides fields present in the document; unknown keys are rejected.
inline void apply_json(SolverConfig& c, const nlohmann::json& doc)
{
  if (!doc.is_object()) { throw Error(ErrorCode::InvalidConfig, "solver config must be a JSON object"); }
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "segments") { c.segments = value.get<int>(); }
      else if (key == "directions") { c.directions = value.get<int>(); }
      else if (key == "max_iter") { c.max_iter = value.get<int>(); }
      else if (key == "penalty_weight") { c.penalty_weight = value.get<double>(); }
      else if (key == "tol") { c.tol = value.get<double>(); }
      else if (key == "multistarts") { c.multistarts = value.get<int>(); }
      else if (key == "seed") { c.seed = value.get<std::uint64_t>(); }
      else if (key == "max_nodes") { c.max_nodes = value.get<std::size_t>(); }
      else if (key == "max_points") { c.max_points = value.get<std::size_t>(); }
      else if (key == "dedup_fraction") { c.dedup_fraction = value.get<double>(); }
      else if (key == "explore_factor") { c.explore_factor = value.get<double>(); }
      else { throw Error(ErrorCode::InvalidConfig, "unknown solver option '" + key + "'"); }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad solver option: ") + ex.what());
  }
}

/**
 * Left-invariant sub-Riemannian structure on a simply connected group, in exponential coordinates.
 *
 * The horizontal space is spanned by the weight-1 basis elements; metric is the Gram matrix
 * of those elements. Coordinates x are valid while |x| <= chart_radius (Euclidean norm).
 */
class SubRiemannianGroup
{
public:
  SubRiemannianGroup(LieAlgebra alg, Grading grading, Mat metric = Mat(), double chart_radius = 1.5)
      : alg_(std::move(alg)), grading_(std::move(grading)), chart_radius_(chart_radius)
  {
    if (grading_.size() != alg_.dim()) { throw Error(ErrorCode::InvalidDimension, "grading length does not match algebra"); }
    require_positive_weights(grading_);
    if (const auto check = validate_grading(alg_, grading_); !check.ok) {
      throw Error(ErrorCode::NotFiltered, "structure constants are not compatible with the grading");
    }
    if (jacobi_defect(alg_) > 1e-9) { throw Error(ErrorCode::InvalidConfig, "structure constants violate the Jacobi identity"); }
    if (!(chart_radius_ > 0.0) || !std::isfinite(chart_radius_)) {
      throw Error(ErrorCode::InvalidConfig, "chart radius must be positive");
    }
    for (int i = 0; i < alg_.dim(); ++i) {
      if (grading_.weights[static_cast<std::size_t>(i)] == 1) { horizontal_.push_back(i); }
    }
    const int m = static_cast<int>(horizontal_.size());
    if (m == 0 || !is_bracket_generating(alg_, horizontal_)) {
      throw Error(ErrorCode::NotBracketGenerating, "weight-1 elements do not Lie-generate the algebra");
    }
    metric_ = metric.size() == 0 ? Mat(Mat::Identity(m, m)) : metric;
    if (metric_.rows() != m || metric_.cols() != m) {
      throw Error(ErrorCode::InvalidMetric, "metric must be " + std::to_string(m) + "x" + std::to_string(m));
    }
    if ((metric_ - metric_.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * std::max(1.0, metric_.lpNorm<Eigen::Infinity>())) {
      throw Error(ErrorCode::InvalidMetric, "metric is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(metric_);
    if (es.eigenvalues().minCoeff() <= 0.0) { throw Error(ErrorCode::InvalidMetric, "metric is not positive definite"); }
  }

  const LieAlgebra& alg() const noexcept { return alg_; }
  const Grading& grading() const noexcept { return grading_; }
  const std::vector<int>& horizontal() const noexcept { return horizontal_; }
  const Mat& metric() const noexcept { return metric_; }
  double chart_radius() const noexcept { return chart_radius_; }
  int dim() const noexcept { return alg_.dim(); }
  int horizontal_dim() const noexcept { return static_cast<int>(horizontal_.size()); }

  bool in_chart(const Vec& x) const { return x.norm() <= chart_radius_; }

  void require_in_chart(const Vec& x) const
  {
    alg_.check_size(x);
    if (!in_chart(x)) {
      throw Error(ErrorCode::OutOfChart, "point with |x| = " + std::to_string(x.norm()) + " outside chart radius "
                                             + std::to_string(chart_radius_));
    }
  }

  /// n x m matrix embedding horizontal control tuples into the algebra.
  Mat horizontal_embedding() const
  {
    Mat S = Mat::Zero(dim(), horizontal_dim());
    for (int a = 0; a < horizontal_dim(); ++a) { S(horizontal_[static_cast<std::size_t>(a)], a) = 1.0; }
    return S;
  }

private:
  LieAlgebra alg_;
  Grading grading_;
  std::vector<int> horizontal_;
  Mat metric_;
  double chart_radius_;
};

/// Catalog group with identity metric.
inline SubRiemannianGroup make_group(std::string_view name)
{
  auto [alg, g] = named_algebra(name);
  return SubRiemannianGroup(std::move(alg), std::move(g));
}

/// Same horizontal data with structure constants c * eps^{w_i + w_j - w_k}.
inline SubRiemannianGroup rescaled_structure(const SubRiemannianGroup& G, double eps)
{
  return SubRiemannianGroup(dilated_brackets(G.alg(), G.grading(), eps), G.grading(), G.metric(), G.chart_radius());
}

namespace detail {

/// psi(z) = z / (1 - e^{-z}) = sum_r kPsi[r] z^r, truncated after z^12 (next term ~1.3e-12 z^14).
inline constexpr std::array<double, 13> kPsi{1.0,          0.5, 1.0 / 12.0,        0.0, -1.0 / 720.0,
                                             0.0,          1.0 / 30240.0, 0.0, -1.0 / 1209600.0,
                                             0.0,          1.0 / 47900160.0,  0.0, -691.0 / 1307674368000.0};

/**
 * Evaluates X(x) b = psi(ad_x) b and its derivative in x.
 *
 * With A = ad_x and a_r = A^r b, the derivative is -sum_r M_r ad_{a_r} where
 * M_r = sum_s kPsi[r + s + 1] A^s, because d/dx_i (A^r b) = sum A^s [e_i, a_{r-1-s}].
 */
class FrameEvaluator
{
public:
  explicit FrameEvaluator(const LieAlgebra& alg) : alg_(&alg), n_(alg.dim())
  {
    for (int i = 0; i < n_; ++i) { ad_basis_[static_cast<std::size_t>(i)] = alg.ad_basis(i); }
  }

  int dim() const noexcept { return n_; }

  Mat ad(const Vec& x) const
  {
    Mat A = Mat::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) {
      if (x[i] != 0.0) { A += x[i] * ad_basis_[static_cast<std::size_t>(i)]; }
    }
    return A;
  }

  Mat frame(const Vec& x) const
  {
    const Mat A = ad(x);
    Mat out = Mat::Identity(n_, n_);
    Mat P   = Mat::Identity(n_, n_);
    for (std::size_t r = 1; r < kPsi.size(); ++r) {
      P = P * A;
      if (kPsi[r] != 0.0) { out += kPsi[r] * P; }
    }
    return out;
  }

  Vec apply(const Vec& x, const Vec& b) const
  {
    const Mat A = ad(x);
    Vec a   = b;
    Vec out = b;
    for (std::size_t r = 1; r < kPsi.size(); ++r) {
      a = A * a;
      if (a.squaredNorm() == 0.0) { break; }
      if (kPsi[r] != 0.0) { out += kPsi[r] * a; }
    }
    return out;
  }

  /// Returns psi(ad_x) b; writes d/dx of it into J and psi(ad_x) into F.
  Vec apply(const Vec& x, const Vec& b, Mat& J, Mat& F) const
  {
    constexpr int R = static_cast<int>(kPsi.size());
    const Mat A = ad(x);
    // Powers of A vanish early for nilpotent algebras; top is the last nonzero one.
    std::array<Vec, R> av;
    av[0] = b;
    int top = 0;
    for (int r = 1; r < R; ++r) {
      av[static_cast<std::size_t>(r)] = A * av[static_cast<std::size_t>(r - 1)];
      if (av[static_cast<std::size_t>(r)].squaredNorm() == 0.0) { break; }
      top = r;
    }
    Mat P = A;
    int deg = 1;
    for (; deg < R && P.squaredNorm() != 0.0; ++deg) { P = P * A; }
    Vec out = Vec::Zero(n_);
    for (int r = 0; r <= top; ++r) { out += kPsi[static_cast<std::size_t>(r)] * av[static_cast<std::size_t>(r)]; }
    // Horner evaluation of F = sum_r kPsi[r] A^r, r < deg.
    F = kPsi[static_cast<std::size_t>(deg - 1)] * Mat::Identity(n_, n_);
    for (int r = deg - 2; r >= 0; --r) {
      F = A * F;
      F.diagonal().array() += kPsi[static_cast<std::size_t>(r)];
    }
    // J = -sum_s A^s ad(v_s), v_s = sum_q kPsi[q + s + 1] a_q.
    J = Mat::Zero(n_, n_);
    for (int s = std::min(deg - 1, R - 2); s >= 0; --s) {
      Vec v = Vec::Zero(n_);
      for (int q = 0; q <= top && q + s + 1 < R; ++q) {
        const double c = kPsi[static_cast<std::size_t>(q + s + 1)];
        if (c != 0.0) { v += c * av[static_cast<std::size_t>(q)]; }
      }
      J = A * J;
      J -= ad(v);
    }
    return out;
  }

private:
  const LieAlgebra* alg_;
  int n_;
  std::array<Mat, kMaxAlgebraDim> ad_basis_;
};

/// One classical RK4 step of x' = psi(ad_x) b; optionally returns d x'/d x and d x'/d b.
inline Vec rk4_step(const FrameEvaluator& fe, const Vec& x, const Vec& b, double h, Mat* Ax = nullptr, Mat* Ab = nullptr)
{
  if (Ax == nullptr) {
    const Vec k1 = fe.apply(x, b);
    const Vec k2 = fe.apply(x + 0.5 * h * k1, b);
    const Vec k3 = fe.apply(x + 0.5 * h * k2, b);
    const Vec k4 = fe.apply(x + h * k3, b);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const int n   = fe.dim();
  const Mat I   = Mat::Identity(n, n);
  Mat J, F;
  const Vec k1  = fe.apply(x, b, J, F);
  const Mat k1x = J, k1b = F;
  const Vec k2  = fe.apply(x + 0.5 * h * k1, b, J, F);
  const Mat k2x = J * (I + 0.5 * h * k1x), k2b = F + 0.5 * h * J * k1b;
  const Vec k3  = fe.apply(x + 0.5 * h * k2, b, J, F);
  const Mat k3x = J * (I + 0.5 * h * k2x), k3b = F + 0.5 * h * J * k2b;
  const Vec k4  = fe.apply(x + h * k3, b, J, F);
  const Mat k4x = J * (I + h * k3x), k4b = F + h * J * k3b;
  *Ax = I + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  *Ab = (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// psi(ad_x): column i is the left-invariant field X_i at exponential coordinate x.
inline Mat left_invariant_frame(const SubRiemannianGroup& G, const Vec& x)
{
  G.require_in_chart(x);
  return detail::FrameEvaluator(G.alg()).frame(x);
}

/// Piecewise-constant horizontal controls; u_k are coefficients on the horizontal basis elements.
struct PathCertificate
{
  std::vector<Vec> controls;
  double dt             = 0.0;
  double endpoint_error = 0.0;
  double length         = 0.0;
};

/// sum_k |u_k|_metric * dt.
inline double certificate_length(const SubRiemannianGroup& G, const PathCertificate& cert)
{
  double len = 0.0;
  for (const auto& u : cert.controls) { len += std::sqrt(std::max(0.0, u.dot(G.metric() * u))) * cert.dt; }
  return len;
}

/// Endpoint of the horizontal path from start, one RK4 step of size dt per control segment.
inline Vec integrate_horizontal(const SubRiemannianGroup& G, const Vec& start, const PathCertificate& cert)
{
  G.require_in_chart(start);
  if (!(cert.dt >= 0.0)) { throw Error(ErrorCode::InvalidConfig, "certificate dt must be >= 0"); }
  const detail::FrameEvaluator fe(G.alg());
  const Mat S = G.horizontal_embedding();
  Vec x = start;
  for (const auto& u : cert.controls) {
    if (u.size() != G.horizontal_dim()) {
      throw Error(ErrorCode::InvalidDimension, "control tuple length must equal the horizontal dimension");
    }
    x = detail::rk4_step(fe, x, S * u, cert.dt);
    if (!G.in_chart(x)) { throw Error(ErrorCode::OutOfChart, "trajectory left the exponential chart"); }
  }
  return x;
}

inline nlohmann::json to_json(const PathCertificate& cert)
{
  nlohmann::json controls = nlohmann::json::array();
  for (const auto& u : cert.controls) { controls.push_back(std::vector<double>(u.data(), u.data() + u.size())); }
  return {{"dt", cert.dt}, {"endpoint_error", cert.endpoint_error}, {"length", cert.length}, {"controls", controls}};
}

inline PathCertificate certificate_from_json(const nlohmann::json& doc)
{
  try {
    PathCertificate cert;
    cert.dt             = doc.at("dt").get<double>();
    cert.endpoint_error = doc.value("endpoint_error", 0.0);
    cert.length         = doc.value("length", 0.0);
    for (const auto& row : doc.at("controls")) {
      const auto v = row.get<std::vector<double>>();
      if (v.empty() || v.size() > static_cast<std::size_t>(kMaxAlgebraDim)) {
        throw Error(ErrorCode::InvalidDimension, "control tuple length out of range");
      }
      cert.controls.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return cert;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed certificate: ") + ex.what());
  }
}

/// Weighted box norm max_i |v_i|^{1/w_i}; comparable with the distance to the origin near 0.
inline double box_norm(const Grading& g, const Vec& v)
{
  double out = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const int w = g.weights[static_cast<std::size_t>(i)];
    const double a = std::abs(v[i]);
    out = std::max(out, w == 1 ? a : std::pow(a, 1.0 / w));
  }
  return out;
}

}  // namespace srprofile
