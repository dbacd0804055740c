#include <gtest/gtest.h>

#include <srprofile/families.hpp>
#include <srprofile/lie_algebra.hpp>
#include <srprofile/lie_json.hpp>

#include <Eigen/Dense>

#include "support/generators.hpp"

using namespace srprofile;

namespace {

// Jacobi as a representation identity: ad([e_i, e_j]) == [ad e_i, ad e_j].
double ad_homomorphism_defect(const LieAlgebra& alg)
{
  double worst = 0.0;
  for (int i = 0; i < alg.dim(); ++i) {
    for (int j = 0; j < alg.dim(); ++j) {
      const Mat lhs = alg.ad(bracket(alg, basis_vector(alg.dim(), i), basis_vector(alg.dim(), j)));
      const Mat rhs = alg.ad_basis(i) * alg.ad_basis(j) - alg.ad_basis(j) * alg.ad_basis(i);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

// Heisenberg algebra realised by strictly upper triangular 3x3 matrices.
Eigen::Matrix3d heis_matrix(const Vec& x)
{
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 1) = x[0];
  m(1, 2) = x[1];
  m(0, 2) = x[2];
  return m;
}

Vec heis_coords(const Eigen::Matrix3d& m)
{
  Vec x(3);
  x << m(0, 1), m(1, 2), m(0, 2);
  return x;
}

Eigen::Matrix3d nil_exp(const Eigen::Matrix3d& m) { return Eigen::Matrix3d::Identity() + m + 0.5 * m * m; }
Eigen::Matrix3d nil_log(const Eigen::Matrix3d& g)
{
  const Eigen::Matrix3d n = g - Eigen::Matrix3d::Identity();
  return n - 0.5 * n * n;
}

}  // namespace

TEST(Catalog, StructureConstantsSatisfyJacobi)
{
  for (auto name : catalog_names()) {
    const auto [alg, g] = named_algebra(name);
    EXPECT_LE(jacobi_defect(alg), 1e-12) << name;
    EXPECT_LE(ad_homomorphism_defect(alg), 1e-12) << name;
    EXPECT_TRUE(validate_grading(alg, g).ok) << name;
  }
}

TEST(Catalog, UnknownNameListsEntries)
{
  try {
    named_algebra("su2");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCatalogEntry);
    EXPECT_NE(std::string(e.what()).find("heisenberg"), std::string::npos);
  }
}

TEST(Catalog, KillingFormSignatures)
{
  const auto so3 = named_algebra("so3").first;
  EXPECT_TRUE(killing_form(so3).isApprox(-2.0 * Mat::Identity(3, 3)));
  EXPECT_EQ(signature(killing_form(so3)), (Signature{0, 3, 0}));
  EXPECT_EQ(signature(killing_form(named_algebra("sl2r").first)), (Signature{2, 1, 0}));
  EXPECT_EQ(signature(killing_form(named_algebra("e11").first)), (Signature{1, 0, 2}));
  EXPECT_EQ(signature(killing_form(named_algebra("heisenberg").first)), (Signature{0, 0, 3}));
}

TEST(Catalog, LowerCentralSeries)
{
  EXPECT_EQ(nilpotency_step(named_algebra("heisenberg").first), 2);
  EXPECT_EQ(nilpotency_step(named_algebra("abelian3").first), 1);
  // e(1,1) is solvable, not nilpotent: the series stalls on span(X2, X3).
  EXPECT_EQ(lower_central_series_dims(named_algebra("e11").first), (std::vector<int>{3, 2}));
  EXPECT_EQ(lower_central_series_dims(named_algebra("heisenberg").first), (std::vector<int>{3, 1, 0}));
  EXPECT_LE(nilpotency_step(named_algebra("so3").first), 0);
}

TEST(Catalog, E11AdjointSpectrum)
{
  // ad X1 acts on span(X2, X3) by [[0, 1], [1, 0]]: eigenvalues -1, 0, 1.
  const auto e11 = named_algebra("e11").first;
  Eigen::EigenSolver<Eigen::Matrix3d> eig(Eigen::Matrix3d(e11.ad_basis(0)));
  std::vector<double> ev;
  for (int i = 0; i < 3; ++i) { ev.push_back(eig.eigenvalues()[i].real()); }
  std::sort(ev.begin(), ev.end());
  EXPECT_NEAR(ev[0], -1.0, 1e-12);
  EXPECT_NEAR(ev[1], 0.0, 1e-12);
  EXPECT_NEAR(ev[2], 1.0, 1e-12);
}

TEST(ContactFamily, ValidDrawsSatisfyJacobi)
{
  gen::Rng r(11);
  for (int k = 0; k < 1000; ++k) {
    const auto p = gen::valid_contact(r);
    const auto alg = contact_family(p);
    ASSERT_LE(jacobi_defect(alg), 1e-12);
    ASSERT_LE(ad_homomorphism_defect(alg), 1e-12);
  }
}

TEST(ContactFamily, RelationsCharacteriseJacobi)
{
  gen::Rng r(12);
  int violated = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto p = gen::any_contact(r);
    const bool jacobi = jacobi_defect(contact_tensor(p)) <= 1e-9;
    bool relations = true;
    for (const auto& rel : contact_relations(p)) { relations = relations && std::abs(rel.residual) <= 1e-9; }
    ASSERT_EQ(jacobi, relations);
    violated += jacobi ? 0 : 1;
  }
  EXPECT_GT(violated, 100);
}

TEST(ContactFamily, ViolationNamesRelation)
{
  ContactFamilyParams p;
  p.e = 1.0;
  p.a = 0.3;
  p.c = 0.7;
  try {
    contact_family(p);
    FAIL();
  } catch (const ConstraintViolation& ex) {
    EXPECT_EQ(ex.relation(), "ec=0");
    EXPECT_DOUBLE_EQ(ex.residual(), 0.7);
  }
  EXPECT_GE(jacobi_defect(contact_tensor(p)), 0.5);
}

TEST(ContactFamily, Classification)
{
  ContactFamilyParams p;
  p.e = 1.0;
  p.a = 0.3;
  EXPECT_EQ(classify_contact(p), ContactClass::NonGroupFamily);
  p.e = 0.0;
  EXPECT_EQ(classify_contact(p), ContactClass::SingularDirectSum);
  EXPECT_EQ(classify_contact(catalog_params("so3")), ContactClass::GroupFamily);
}

TEST(Nilpotentize, ContactGroupsGiveHeisenberg)
{
  const auto heis = named_algebra("heisenberg").first;
  for (auto name : {"so3", "sl2r", "e11", "heisenberg"}) {
    const auto [alg, g] = named_algebra(name);
    EXPECT_EQ(nilpotentize(alg, g).tensor(), heis.tensor()) << name;
    const auto near = dilated_brackets(alg, g, 1e-3);
    for (std::size_t i = 0; i < heis.tensor().size(); ++i) {
      EXPECT_NEAR(near.tensor()[i], heis.tensor()[i], 1e-5) << name;
    }
  }
}

TEST(Nilpotentize, RejectsUnfilteredStructure)
{
  const auto so3 = named_algebra("so3").first;
  EXPECT_THROW(nilpotentize(so3, Grading{{1, 1, 3}}), Error);
}

TEST(Nilpotentize, DilatedBracketsAreIsomorphic)
{
  // delta_eps is an isomorphism from the dilated bracket onto the original one.
  gen::Rng r(3);
  const auto [alg, g] = named_algebra("sl2r");
  for (double eps : {0.5, 0.1, 2.0}) {
    const auto de = dilated_brackets(alg, g, eps);
    for (int k = 0; k < 20; ++k) {
      const Vec x = r.vec(3, 1), y = r.vec(3, 1);
      const Vec lhs = dilate(g, eps, bracket(de, x, y));
      const Vec rhs = bracket(alg, dilate(g, eps, x), dilate(g, eps, y));
      EXPECT_LE((lhs - rhs).norm(), 1e-13);
    }
  }
}

TEST(Bch, MatchesMatrixGroupOnHeisenberg)
{
  gen::Rng r(5);
  const auto heis = named_algebra("heisenberg").first;
  for (int k = 0; k < 100; ++k) {
    const Vec x = r.vec(3, 2), y = r.vec(3, 2);
    const Vec oracle = heis_coords(nil_log(nil_exp(heis_matrix(x)) * nil_exp(heis_matrix(y))));
    EXPECT_LE((bch_truncated(heis, x, y, 2) - oracle).norm(), 1e-12);
  }
}

TEST(Bch, AssociativeAndInverseOnHeisenberg)
{
  gen::Rng r(6);
  const auto heis = named_algebra("heisenberg").first;
  for (int k = 0; k < 100; ++k) {
    const Vec x = r.vec(3, 2), y = r.vec(3, 2), z = r.vec(3, 2);
    const Vec left  = bch_truncated(heis, bch_truncated(heis, x, y, 2), z, 2);
    const Vec right = bch_truncated(heis, x, bch_truncated(heis, y, z, 2), 2);
    EXPECT_LE((left - right).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_LE(bch_truncated(heis, x, -x, 2).lpNorm<Eigen::Infinity>(), 1e-12);
  }
  EXPECT_THROW(bch_truncated(heis, Vec::Zero(3), Vec::Zero(3), 4), Error);
}

TEST(Morphisms, PlaneRotationsAndDilations)
{
  const auto [heis, g] = named_algebra("heisenberg");
  const double t = 0.7;
  Mat R = Mat::Identity(3, 3);
  R(0, 0) = std::cos(t);
  R(0, 1) = -std::sin(t);
  R(1, 0) = std::sin(t);
  R(1, 1) = std::cos(t);
  EXPECT_TRUE(is_homogeneous_morphism(heis, g, R));
  Mat shear = Mat::Identity(3, 3);
  shear(2, 0) = 1.0;  // mixes degrees
  EXPECT_FALSE(is_homogeneous_morphism(heis, g, shear));
}

TEST(Surface, CurvatureProductInvariantUnderIsotropyRescaling)
{
  gen::Rng r(8);
  for (int k = 0; k < 200; ++k) {
    SurfaceFamilyParams p{r.uniform(-3, 3), r.uniform(-3, 3)};
    const double lambda = r.uniform(0.1, 10);
    const auto q = rescale_isotropy(p, lambda);
    EXPECT_NEAR(curvature_product(q), curvature_product(p), 1e-12 * std::max(1.0, std::abs(curvature_product(p))));
    EXPECT_LE(jacobi_defect(surface_family(q)), 1e-12);
  }
}

TEST(Json, AlgebraRoundTrip)
{
  const auto [alg, g] = named_algebra("sl2r");
  const auto [back, gb] = lie_algebra_from_json(to_json(alg, g));
  EXPECT_EQ(back.tensor(), alg.tensor());
  EXPECT_EQ(gb.weights, g.weights);
}

TEST(Errors, DimensionBounds)
{
  EXPECT_THROW(LieAlgebra(0), Error);
  EXPECT_THROW(LieAlgebra(9), Error);
  EXPECT_THROW(dilate(Grading{{1, 1, 2}}, 0.0, Vec::Zero(3)), Error);
}
