#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace srprofile {

inline constexpr int kMaxAlgebraDim = 8;

// Coordinates and square operators never exceed kMaxAlgebraDim, so storage stays inline.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAlgebraDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAlgebraDim, kMaxAlgebraDim>;

/**
 * Finite-dimensional real Lie algebra stored as a dense structure-constant tensor.
 *
 * [e_i, e_j] = sum_k c(i, j, k) e_k, zero-based indices. Antisymmetry in (i, j) is
 * maintained by construction: every write sets both c(i, j, k) and c(j, i, k).
 * The tensor is not required to satisfy the Jacobi identity; see jacobi_defect().
 */
class LieAlgebra
{
public:
  explicit LieAlgebra(int dim, std::vector<std::string> labels = {})
      : dim_(dim), c_(static_cast<std::size_t>(std::max(dim, 0) * std::max(dim, 0) * std::max(dim, 0)), 0.0),
        labels_(std::move(labels))
  {
    if (dim < 1 || dim > kMaxAlgebraDim) {
      throw Error(ErrorCode::InvalidDimension, "algebra dimension must be in [1, 8], got " + std::to_string(dim));
    }
    if (!labels_.empty() && static_cast<int>(labels_.size()) != dim) {
      throw Error(ErrorCode::InvalidDimension, "label count does not match dimension");
    }
  }

  /// Builds from a full tensor in (i, j, k) row-major order; rejects non-antisymmetric input.
  static LieAlgebra from_tensor(int dim, const std::vector<double>& tensor, std::vector<std::string> labels = {})
  {
    LieAlgebra alg(dim, std::move(labels));
    if (tensor.size() != alg.c_.size()) {
      throw Error(ErrorCode::InvalidDimension, "tensor size does not match dim^3");
    }
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) {
          const double v  = tensor[alg.index(i, j, k)];
          const double vt = tensor[alg.index(j, i, k)];
          if (v != -vt) {
            throw Error(ErrorCode::InvalidDimension, "structure constants are not antisymmetric in (i, j)");
          }
        }
      }
    }
    alg.c_ = tensor;
    return alg;
  }

  int dim() const noexcept { return dim_; }

  double operator()(int i, int j, int k) const { return c_[index(i, j, k)]; }

  /// Sets [e_i, e_j] += ... component k to value (and the antisymmetric partner).
  void set(int i, int j, int k, double value)
  {
    check_index(i);
    check_index(j);
    check_index(k);
    if (i == j) {
      if (value != 0.0) { throw Error(ErrorCode::InvalidDimension, "[e_i, e_i] must vanish"); }
      return;
    }
    c_[index(i, j, k)] = value;
    c_[index(j, i, k)] = -value;
  }

  const std::vector<double>& tensor() const noexcept { return c_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::string label(int i) const
  {
    if (!labels_.empty()) { return labels_[static_cast<std::size_t>(i)]; }
    return "e" + std::to_string(i + 1);
  }

  /// Matrix of ad_x: column j holds [x, e_j].
  Mat ad(const Vec& x) const
  {
    check_size(x);
    Mat A = Mat::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      if (x[i] == 0.0) { continue; }
      for (int j = 0; j < dim_; ++j) {
        for (int k = 0; k < dim_; ++k) { A(k, j) += x[i] * c_[index(i, j, k)]; }
      }
    }
    return A;
  }

  /// Matrix of ad_{e_i}.
  Mat ad_basis(int i) const
  {
    check_index(i);
    Mat A(dim_, dim_);
    for (int j = 0; j < dim_; ++j) {
      for (int k = 0; k < dim_; ++k) { A(k, j) = c_[index(i, j, k)]; }
    }
    return A;
  }

  void check_size(const Vec& x) const
  {
    if (x.size() != dim_) {
      throw Error(ErrorCode::InvalidDimension,
                  "coordinate tuple has length " + std::to_string(x.size()) + ", expected " + std::to_string(dim_));
    }
  }

  friend bool operator==(const LieAlgebra& a, const LieAlgebra& b) { return a.dim_ == b.dim_ && a.c_ == b.c_; }

private:
  std::size_t index(int i, int j, int k) const
  {
    return static_cast<std::size_t>((i * dim_ + j) * dim_ + k);
  }

  void check_index(int i) const
  {
    if (i < 0 || i >= dim_) { throw Error(ErrorCode::InvalidDimension, "basis index out of range"); }
  }

  int dim_;
  std::vector<double> c_;
  std::vector<std::string> labels_;
};

/// Degrees of basis elements in an adapted frame.
struct Grading
{
  std::vector<int> weights;

  int size() const noexcept { return static_cast<int>(weights.size()); }
  int step() const { return weights.empty() ? 0 : *std::max_element(weights.begin(), weights.end()); }

  /// Q = sum_i i * dim V_i.
  int homogeneous_dimension() const
  {
    int q = 0;
    for (int w : weights) { q += w; }
    return q;
  }

  friend bool operator==(const Grading&, const Grading&) = default;
};

inline Grading uniform_grading(int dim) { return Grading{std::vector<int>(static_cast<std::size_t>(dim), 1)}; }

inline Vec bracket(const LieAlgebra& alg, const Vec& x, const Vec& y)
{
  alg.check_size(x);
  alg.check_size(y);
  const int n = alg.dim();
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (x[i] == 0.0) { continue; }
    for (int j = 0; j < n; ++j) {
      const double xy = x[i] * y[j];
      if (xy == 0.0) { continue; }
      for (int k = 0; k < n; ++k) { out[k] += xy * alg(i, j, k); }
    }
  }
  return out;
}

inline Vec basis_vector(int dim, int i)
{
  Vec e = Vec::Zero(dim);
  e[i] = 1.0;
  return e;
}

/// max over basis triples of |[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]|.
inline double jacobi_defect(const LieAlgebra& alg)
{
  const int n = alg.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const Vec ei = basis_vector(n, i), ej = basis_vector(n, j), ek = basis_vector(n, k);
        const Vec cyc = bracket(alg, ei, bracket(alg, ej, ek)) + bracket(alg, ej, bracket(alg, ek, ei))
                      + bracket(alg, ek, bracket(alg, ei, ej));
        worst = std::max(worst, cyc.norm());
      }
    }
  }
  // Triples with a repeated index vanish identically by antisymmetry.
  return worst;
}

struct GradingCheck
{
  bool ok = true;
  std::vector<std::array<int, 3>> violations;
};

/// Filtration compatibility: c(i,j,k) == 0 whenever w_k > w_i + w_j.
inline GradingCheck validate_grading(const LieAlgebra& alg, const Grading& g)
{
  if (g.size() != alg.dim()) { throw Error(ErrorCode::InvalidDimension, "grading length does not match algebra"); }
  GradingCheck out;
  const int n = alg.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const auto wi = g.weights[static_cast<std::size_t>(i)], wj = g.weights[static_cast<std::size_t>(j)],
                   wk = g.weights[static_cast<std::size_t>(k)];
        if (alg(i, j, k) != 0.0 && wk > wi + wj) {
          out.ok = false;
          out.violations.push_back({i, j, k});
        }
      }
    }
  }
  return out;
}

inline void require_positive_weights(const Grading& g)
{
  for (int w : g.weights) {
    if (w < 1) { throw Error(ErrorCode::InvalidConfig, "grading weights must be >= 1"); }
  }
}

/// delta_eps: x_i -> eps^{w_i} x_i.
inline Vec dilate(const Grading& g, double eps, const Vec& x)
{
  if (!(eps > 0.0) || !std::isfinite(eps)) { throw Error(ErrorCode::InvalidScale, "dilation factor must be > 0"); }
  if (x.size() != g.size()) { throw Error(ErrorCode::InvalidDimension, "tuple length does not match grading"); }
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) { out[i] = std::pow(eps, g.weights[static_cast<std::size_t>(i)]) * x[i]; }
  return out;
}

/// Structure constants of Delta_eps^{-1}[Delta_eps ., Delta_eps .]: c(i,j,k) * eps^{w_i + w_j - w_k}.
inline LieAlgebra dilated_brackets(const LieAlgebra& alg, const Grading& g, double eps)
{
  if (!(eps > 0.0) || !std::isfinite(eps)) { throw Error(ErrorCode::InvalidScale, "scale must be > 0"); }
  if (g.size() != alg.dim()) { throw Error(ErrorCode::InvalidDimension, "grading length does not match algebra"); }
  const int n = alg.dim();
  std::vector<double> t(alg.tensor().size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const int e = g.weights[static_cast<std::size_t>(i)] + g.weights[static_cast<std::size_t>(j)]
                    - g.weights[static_cast<std::size_t>(k)];
        t[static_cast<std::size_t>((i * n + j) * n + k)] = alg(i, j, k) * (e == 0 ? 1.0 : std::pow(eps, e));
      }
    }
  }
  return LieAlgebra::from_tensor(n, t, alg.labels());
}

/// Graded part of the bracket: the eps -> 0 limit of dilated_brackets().
inline LieAlgebra nilpotentize(const LieAlgebra& alg, const Grading& g)
{
  const auto check = validate_grading(alg, g);
  if (!check.ok) {
    const auto& v = check.violations.front();
    throw Error(ErrorCode::NotFiltered, "bracket [" + alg.label(v[0]) + ", " + alg.label(v[1]) + "] has a component on "
                                          + alg.label(v[2]) + " of too high degree");
  }
  const int n = alg.dim();
  LieAlgebra out(n, alg.labels());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (g.weights[static_cast<std::size_t>(k)]
            == g.weights[static_cast<std::size_t>(i)] + g.weights[static_cast<std::size_t>(j)]) {
          out.set(i, j, k, alg(i, j, k));
        }
      }
    }
  }
  return out;
}

/// Baker-Campbell-Hausdorff series truncated after the terms of the given degree (1, 2 or 3).
inline Vec bch_truncated(const LieAlgebra& alg, const Vec& x, const Vec& y, int order)
{
  if (order < 1 || order > 3) { throw Error(ErrorCode::InvalidOrder, "BCH order must be 1, 2 or 3"); }
  alg.check_size(x);
  alg.check_size(y);
  Vec z = x + y;
  if (order >= 2) {
    const Vec xy = bracket(alg, x, y);
    z += 0.5 * xy;
    if (order >= 3) { z += (bracket(alg, x, xy) - bracket(alg, y, xy)) / 12.0; }
  }
  return z;
}

namespace detail {

inline int matrix_rank(const Eigen::MatrixXd& m, double tol = 1e-10)
{
  if (m.cols() == 0 || m.rows() == 0) { return 0; }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

/// Columns spanning [a, b] for a in span(A), b in span(B).
inline Eigen::MatrixXd bracket_span(const LieAlgebra& alg, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
{
  Eigen::MatrixXd out(alg.dim(), A.cols() * B.cols());
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < A.cols(); ++i) {
    for (Eigen::Index j = 0; j < B.cols(); ++j) { out.col(col++) = bracket(alg, Vec(A.col(i)), Vec(B.col(j))); }
  }
  return out;
}

inline Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& m, double tol = 1e-10)
{
  const int r = matrix_rank(m, tol);
  if (r == 0) { return Eigen::MatrixXd(m.rows(), 0); }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(tol);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), r);
  return q;
}

}  // namespace detail

/// Dimensions of the lower central series g, [g,g], [g,[g,g]], ... until it stabilises.
inline std::vector<int> lower_central_series_dims(const LieAlgebra& alg)
{
  const int n = alg.dim();
  Eigen::MatrixXd current = Eigen::MatrixXd::Identity(n, n);
  std::vector<int> dims{n};
  for (int guard = 0; guard <= n; ++guard) {
    Eigen::MatrixXd next = detail::orthonormal_span(detail::bracket_span(alg, Eigen::MatrixXd::Identity(n, n), current));
    const int d = static_cast<int>(next.cols());
    if (d == dims.back()) { break; }
    dims.push_back(d);
    current = next;
    if (d == 0) { break; }
  }
  return dims;
}

/// Nilpotency step (number of nonzero terms of the lower central series) or 0 if not nilpotent.
inline int nilpotency_step(const LieAlgebra& alg)
{
  const auto dims = lower_central_series_dims(alg);
  if (dims.back() != 0) { return 0; }
  return static_cast<int>(dims.size()) - 1;
}

/// Chow condition on the algebra: iterated brackets of the given basis elements span everything.
inline bool is_bracket_generating(const LieAlgebra& alg, const std::vector<int>& generators)
{
  const int n = alg.dim();
  Eigen::MatrixXd gen(n, static_cast<Eigen::Index>(generators.size()));
  for (std::size_t i = 0; i < generators.size(); ++i) { gen.col(static_cast<Eigen::Index>(i)) = basis_vector(n, generators[i]); }
  Eigen::MatrixXd span  = detail::orthonormal_span(gen);
  Eigen::MatrixXd layer = span;
  for (int guard = 0; guard < n && span.cols() < n; ++guard) {
    layer = detail::orthonormal_span(detail::bracket_span(alg, gen, layer));
    Eigen::MatrixXd joined(n, span.cols() + layer.cols());
    joined << span, layer;
    Eigen::MatrixXd next = detail::orthonormal_span(joined);
    if (next.cols() == span.cols()) { break; }
    span = next;
  }
  return span.cols() == n;
}

/// Killing form B(x, y) = tr(ad_x ad_y) in the standard basis.
inline Mat killing_form(const LieAlgebra& alg)
{
  const int n = alg.dim();
  std::vector<Mat> ads;
  ads.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) { ads.push_back(alg.ad_basis(i)); }
  Mat K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) { K(i, j) = (ads[static_cast<std::size_t>(i)] * ads[static_cast<std::size_t>(j)]).trace(); }
  }
  return K;
}

struct Signature
{
  int positive = 0;
  int negative = 0;
  int zero     = 0;

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline Signature signature(const Mat& symmetric, double tol = 1e-9)
{
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric);
  Signature s;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()[i];
    if (v > tol) {
      ++s.positive;
    } else if (v < -tol) {
      ++s.negative;
    } else {
      ++s.zero;
    }
  }
  return s;
}

/**
 * Linear map F commuting with dilations and preserving brackets.
 *
 * Commutation with delta_eps is tested for eps in {0.5, 2}; brackets are compared on
 * all basis pairs with absolute tolerance 1e-10.
 */
inline bool is_homogeneous_morphism(const LieAlgebra& alg, const Grading& g, const Mat& F)
{
  const int n = alg.dim();
  if (F.rows() != n || F.cols() != n) { throw Error(ErrorCode::InvalidDimension, "F must be dim x dim"); }
  if (g.size() != n) { throw Error(ErrorCode::InvalidDimension, "grading length does not match algebra"); }
  constexpr double tol = 1e-10;
  for (double eps : {0.5, 2.0}) {
    for (int j = 0; j < n; ++j) {
      const Vec ej = basis_vector(n, j);
      const Vec lhs = F * dilate(g, eps, ej);
      const Vec rhs = dilate(g, eps, F * ej);
      if ((lhs - rhs).lpNorm<Eigen::Infinity>() > tol * std::max(1.0, F.lpNorm<Eigen::Infinity>())) { return false; }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec ei = basis_vector(n, i), ej = basis_vector(n, j);
      const Vec lhs = F * bracket(alg, ei, ej);
      const Vec rhs = bracket(alg, F * ei, F * ej);
      if ((lhs - rhs).lpNorm<Eigen::Infinity>() > tol) { return false; }
    }
  }
  return true;
}

}  // namespace srprofile
