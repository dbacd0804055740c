#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lie_algebra.hpp"

namespace srprofile {

inline constexpr double kParamTol = 1e-9;

/**
 * Homogeneous contact 3-manifold data.
 *
 * With isotropy the algebra has basis (X0, X1, X2, X3), X0 spanning the isotropy:
 *
 *   [X1, X2] = X3 + a X0
 *   [X1, X3] = b X0 + A X1 + B X2
 *   [X2, X3] = c X0 + C X1 + D X2
 *   [X0, X1] = e X2,   [X0, X2] = -e X1,   [X0, X3] = 0
 *
 * Without isotropy it is the 3-dimensional algebra on (X1, X2, X3) with a = b = c = e = 0.
 */
struct ContactFamilyParams
{
  double a = 0, b = 0, c = 0, e = 0;
  double A = 0, B = 0, C = 0, D = 0;
  bool has_isotropy = true;
};

struct Relation
{
  std::string name;
  double residual;
};

/**
 * Jacobi relations of the contact family, as residuals that must vanish.
 *
 * Expanding the cyclic sums of the 4-dimensional tensor gives exactly
 * A + D, e*b, e*c, e*(A - D), e*(B + C). Note the third one involves the X0
 * coefficient c of [X2, X3], not the X1 coefficient C.
 */
inline std::vector<Relation> contact_relations(const ContactFamilyParams& p)
{
  if (!p.has_isotropy) { return {{"A+D=0", p.A + p.D}}; }
  return {
      {"A+D=0", p.A + p.D},
      {"eb=0", p.e * p.b},
      {"ec=0", p.e * p.c},
      {"e(A-D)=0", p.e * (p.A - p.D)},
      {"e(B+C)=0", p.e * (p.B + p.C)},
  };
}

/// Builds the tensor without checking any relation; used to study the Jacobi conditions themselves.
inline LieAlgebra contact_tensor(const ContactFamilyParams& p)
{
  if (!p.has_isotropy) {
    LieAlgebra alg(3, {"X1", "X2", "X3"});
    alg.set(0, 1, 2, 1.0);
    alg.set(0, 2, 0, p.A);
    alg.set(0, 2, 1, p.B);
    alg.set(1, 2, 0, p.C);
    alg.set(1, 2, 1, p.D);
    return alg;
  }
  LieAlgebra alg(4, {"X0", "X1", "X2", "X3"});
  alg.set(1, 2, 3, 1.0);
  alg.set(1, 2, 0, p.a);
  alg.set(1, 3, 0, p.b);
  alg.set(1, 3, 1, p.A);
  alg.set(1, 3, 2, p.B);
  alg.set(2, 3, 0, p.c);
  alg.set(2, 3, 1, p.C);
  alg.set(2, 3, 2, p.D);
  alg.set(0, 1, 2, p.e);
  alg.set(0, 2, 1, -p.e);
  return alg;
}

/// Contact family algebra; throws ConstraintViolation naming the first relation that fails.
inline LieAlgebra contact_family(const ContactFamilyParams& p)
{
  for (const auto& r : contact_relations(p)) {
    if (!(std::abs(r.residual) <= kParamTol)) { throw ConstraintViolation(r.name, r.residual); }
  }
  return contact_tensor(p);
}

enum class ContactClass { SingularDirectSum, NonGroupFamily, GroupFamily };

inline const char* to_string(ContactClass c)
{
  switch (c) {
    case ContactClass::SingularDirectSum: return "SingularDirectSum";
    case ContactClass::NonGroupFamily: return "NonGroupFamily";
    case ContactClass::GroupFamily: return "GroupFamily";
  }
  return "Unknown";
}

inline ContactClass classify_contact(const ContactFamilyParams& p)
{
  if (!p.has_isotropy) { return ContactClass::GroupFamily; }
  return std::abs(p.e) < kParamTol ? ContactClass::SingularDirectSum : ContactClass::NonGroupFamily;
}

inline const std::array<std::string_view, 6>& catalog_names()
{
  static const std::array<std::string_view, 6> names{"heisenberg", "so3", "sl2r", "e11", "abelian2", "abelian3"};
  return names;
}

/// Adapted-basis parameters (A, B, C) of the 3-dimensional catalog groups.
inline ContactFamilyParams catalog_params(std::string_view name)
{
  ContactFamilyParams p;
  p.has_isotropy = false;
  if (name == "heisenberg") { return p; }
  if (name == "so3") {
    p.B = -1.0;
    p.C = 1.0;
    return p;
  }
  if (name == "sl2r") {
    p.B = 1.0;
    p.C = 1.0;
    return p;
  }
  if (name == "e11") {
    p.B = 1.0;
    return p;
  }
  std::string known;
  for (auto n : catalog_names()) { known += (known.empty() ? "" : ", ") + std::string(n); }
  throw Error(ErrorCode::UnknownCatalogEntry, "no 3-dimensional contact group named '" + std::string(name) + "' (catalog: " + known + ")");
}

/// Catalog geometry: structure constants with its grading.
inline std::pair<LieAlgebra, Grading> named_algebra(std::string_view name)
{
  if (name == "abelian2") { return {LieAlgebra(2), uniform_grading(2)}; }
  if (name == "abelian3") { return {LieAlgebra(3), uniform_grading(3)}; }
  return {contact_family(catalog_params(name)), Grading{{1, 1, 2}}};
}

/// Homogeneous Riemannian surface G/G0: [X0,X1] = b X2, [X0,X2] = -b X1, [X1,X2] = e X0.
struct SurfaceFamilyParams
{
  double b = 0;
  double e = 0;
};

inline LieAlgebra surface_family(const SurfaceFamilyParams& p)
{
  LieAlgebra alg(3, {"X0", "X1", "X2"});
  alg.set(0, 1, 2, p.b);
  alg.set(0, 2, 1, -p.b);
  alg.set(1, 2, 0, p.e);
  return alg;
}

enum class SurfaceKind { EuclideanPlane, Flat, Spherical, Hyperbolic };

inline const char* to_string(SurfaceKind k)
{
  switch (k) {
    case SurfaceKind::EuclideanPlane: return "EuclideanPlane";
    case SurfaceKind::Flat: return "Flat";
    case SurfaceKind::Spherical: return "Spherical";
    case SurfaceKind::Hyperbolic: return "Hyperbolic";
  }
  return "Unknown";
}

/// e = 0 gives the Euclidean plane as factor space; otherwise the sign of b*e decides.
inline SurfaceKind surface_kind(const SurfaceFamilyParams& p)
{
  if (std::abs(p.e) < kParamTol) { return SurfaceKind::EuclideanPlane; }
  const double k = p.b * p.e;
  if (std::abs(k) < kParamTol) { return SurfaceKind::Flat; }
  return k > 0 ? SurfaceKind::Spherical : SurfaceKind::Hyperbolic;
}

/// b / e; undefined (NaN) for e = 0.
inline double curvature_ratio(const SurfaceFamilyParams& p)
{
  return std::abs(p.e) < kParamTol ? std::numeric_limits<double>::quiet_NaN() : p.b / p.e;
}

/// b * e: sectional curvature of G/G0 when X1, X2 are orthonormal.
inline double curvature_product(const SurfaceFamilyParams& p) { return p.b * p.e; }

/// Parameters after the basis change X0 -> lambda X0, which leaves the metric on span(X1, X2) untouched.
inline SurfaceFamilyParams rescale_isotropy(const SurfaceFamilyParams& p, double lambda)
{
  if (!(lambda > 0.0)) { throw Error(ErrorCode::InvalidScale, "isotropy rescaling must be > 0"); }
  return {lambda * p.b, p.e / lambda};
}

}  // namespace srprofile
