#include <gtest/gtest.h>

#include <srprofile/ball_net.hpp>
#include <srprofile/profile.hpp>

#include <numbers>

#include "support/generators.hpp"

using namespace srprofile;

namespace {

SolverConfig coarse()
{
  SolverConfig c;
  c.max_points = 60;
  return c;
}

constexpr double kH = 0.25;

ProfileOptions opts(std::vector<Vec> anchors = {}, int threads = 1)
{
  ProfileOptions o;
  o.net_h   = kH;
  o.anchors = std::move(anchors);
  o.threads = threads;
  return o;
}

bool same(const FiniteMetricSpace& a, const FiniteMetricSpace& b)
{
  return a.size() == b.size() && (a.dist().array() == b.dist().array()).all();
}

// Synthetic space whose distances are those of X stretched by (1 + t).
FiniteMetricSpace stretched(const FiniteMetricSpace& X, double t) { return FiniteMetricSpace(X.dist() * (1.0 + t)); }

}  // namespace

TEST(BallNet, PlanarNetTracksEuclideanDistance)
{
  const auto G = make_group("abelian2");
  const auto X = ball_net(G, Vec::Zero(2), 1.0, 0.1, coarse());
  ASSERT_TRUE(X.has_coords());
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double e = (X.coords()[i] - X.coords()[j]).norm();
      EXPECT_LE(std::abs(X(i, j) - e), 0.2 + 0.02 * e) << i << "," << j;
    }
  }
}

TEST(BallNet, HeisenbergNetAgreesWithSolver)
{
  const auto G = make_group("heisenberg");
  auto cfg = coarse();
  cfg.max_points = 8;
  const auto X = ball_net(G, Vec::Zero(3), 1.0, 0.1, cfg);
  for (std::size_t i = 1; i < X.size(); ++i) {
    const double d = cc_distance(G, Vec::Zero(3), X.coords()[i]).distance;
    // Graph paths are admissible up to snapping, and quantised directions cost at most a few percent.
    EXPECT_GE(X(0, i), d - 0.1) << i;
    EXPECT_LE(X(0, i), 1.08 * d + 0.2) << i;
  }
}

TEST(BallNet, UnitBallIsScaleNormalised)
{
  for (auto name : {"heisenberg", "so3", "abelian3"}) {
    const auto X = ball_net(make_group(name), Vec::Zero(3), 1.0, kH, coarse());
    double far = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) { far = std::max(far, X(0, i)); }
    EXPECT_GE(far, 1.0 - 2 * kH) << name;
    EXPECT_LE(far, 1.0 + 2 * kH) << name;
    EXPECT_LE(X.diameter(), 2.0 + 2 * kH) << name;
  }
}

TEST(BallNet, BudgetAndArguments)
{
  auto cfg = coarse();
  cfg.max_nodes = 100;
  try {
    ball_net(make_group("heisenberg"), Vec::Zero(3), 1.0, 0.1, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
  EXPECT_THROW(ball_net(make_group("heisenberg"), Vec::Zero(3), 1.0, 1.5, coarse()), Error);
  EXPECT_THROW(ball_net(make_group("heisenberg"), Vec::Zero(3), 2.0, 0.1, coarse()), Error);
}

TEST(BallNet, Deterministic)
{
  const auto G = make_group("so3");
  EXPECT_TRUE(same(ball_net(G, Vec::Zero(3), 1.0, kH, coarse()), ball_net(G, Vec::Zero(3), 1.0, kH, coarse())));
}

TEST(Profile, EmptyGridGivesEmptySample)
{
  const auto s = sample_profile(make_group("so3"), Vec::Zero(3), ProfileVariant::Ambient, {}, coarse(), opts());
  EXPECT_TRUE(s.spaces.empty());
  const auto j = to_json(profile_report(s, nullptr, coarse()));
  EXPECT_TRUE(j.at("slices").empty());
}

TEST(Profile, GridValidation)
{
  const auto G = make_group("so3");
  EXPECT_THROW(sample_profile(G, Vec::Zero(3), ProfileVariant::Ambient, {0.5, 0.5}, coarse(), opts()), Error);
  EXPECT_THROW(sample_profile(G, Vec::Zero(3), ProfileVariant::Ambient, {0.5, 1.0}, coarse(), opts()), Error);
  EXPECT_THROW(sample_profile(G, Vec::Zero(3), ProfileVariant::Ambient, {2.0}, coarse(), opts()), Error);
  EXPECT_THROW(parse_variant("gamma"), Error);
  EXPECT_EQ(parse_variant("Delta"), ProfileVariant::DeltaRiemannian);
}

TEST(Profile, EveryVariantIsScaleNormalised)
{
  const auto G = make_group("so3");
  for (auto v : {ProfileVariant::Ambient, ProfileVariant::Dg, ProfileVariant::DeltaRiemannian, ProfileVariant::Limit}) {
    const auto s = sample_profile(G, Vec::Zero(3), v, {0.5, 0.3}, coarse(), opts());
    for (const auto& X : s.spaces) {
      double far = 0.0;
      for (std::size_t i = 0; i < X.size(); ++i) { far = std::max(far, X(0, i)); }
      EXPECT_GE(far, 1.0 - 2 * kH) << to_string(v);
      EXPECT_LE(far, 1.0 + 2 * kH) << to_string(v);
    }
  }
}

TEST(Profile, CarnotProfilesAreConstant)
{
  for (auto name : {"abelian3", "heisenberg"}) {
    const auto s = sample_profile(make_group(name), Vec::Zero(3), ProfileVariant::Ambient, {1.0, 0.5, 0.25}, coarse(), opts());
    for (std::size_t i = 0; i < s.spaces.size(); ++i) {
      for (std::size_t j = i + 1; j < s.spaces.size(); ++j) {
        EXPECT_LE(gh_upper(s.spaces[i], s.spaces[j], coarse()).value, resolution_floor(kH)) << name;
      }
    }
  }
}

TEST(Profile, LimitOfContactGroupsIsHeisenberg)
{
  const auto heis = limit_profile(make_group("heisenberg"), kH, coarse());
  EXPECT_TRUE(same(limit_profile(make_group("so3"), kH, coarse()), heis));
  EXPECT_TRUE(same(limit_profile(make_group("e11"), kH, coarse()), heis));
}

TEST(Profile, AnchoredSlicesAlignWithLimit)
{
  const auto G = make_group("so3");
  const auto limit = limit_profile(G, kH, coarse());
  const auto s = sample_profile(G, Vec::Zero(3), ProfileVariant::Dg, {0.2}, coarse(), opts(limit.coords()));
  ASSERT_EQ(s.spaces[0].size(), limit.size());
  EXPECT_LE(gh_upper(s.spaces[0], limit, coarse()).value, resolution_floor(kH));
}

TEST(Profile, DeltaVariantUsesFixedPoints)
{
  const auto G = make_group("so3");
  const auto limit = limit_profile(G, kH, coarse());
  const auto s = sample_profile(G, Vec::Zero(3), ProfileVariant::Delta, {0.3, 0.1}, coarse(), opts());
  for (const auto& X : s.spaces) {
    EXPECT_LE(X.size(), limit.size());
    EXPECT_LE(gh_upper(X, limit, coarse()).value, resolution_floor(kH));
  }
}

TEST(Profile, DeterministicAcrossThreadCounts)
{
  const auto G = make_group("sl2r");
  const auto a = sample_profile(G, Vec::Zero(3), ProfileVariant::Ambient, {0.5, 0.3}, coarse(), opts({}, 1));
  const auto b = sample_profile(G, Vec::Zero(3), ProfileVariant::Ambient, {0.5, 0.3}, coarse(), opts({}, 2));
  for (std::size_t k = 0; k < a.spaces.size(); ++k) { EXPECT_TRUE(same(a.spaces[k], b.spaces[k])); }
  EXPECT_EQ(to_json(profile_report(a, nullptr, coarse())).dump(), to_json(profile_report(b, nullptr, coarse())).dump());
}

TEST(Equivalence, IdenticalSamplesAreEquivalent)
{
  const auto s = sample_profile(make_group("so3"), Vec::Zero(3), ProfileVariant::Ambient, {0.5, 0.3}, coarse(), opts());
  const auto r = curvature_equivalence(s, s, coarse());
  EXPECT_EQ(r.verdict, Verdict::Equivalent);
  for (double h : r.h) { EXPECT_EQ(h, 0.0); }
}

TEST(Equivalence, BasepointDoesNotMatter)
{
  const auto G = make_group("so3");
  Vec x(3);
  x << 0.2, -0.1, 0.05;
  const auto limit = limit_profile(G, kH, coarse());
  const auto a = sample_profile(G, Vec::Zero(3), ProfileVariant::Ambient, {0.5, 0.3, 0.2}, coarse(), opts(limit.coords()));
  const auto b = sample_profile(G, x, ProfileVariant::Ambient, {0.5, 0.3, 0.2}, coarse(), opts(limit.coords()));
  EXPECT_EQ(curvature_equivalence(a, b, coarse()).verdict, Verdict::Equivalent);
}

TEST(Equivalence, GridMismatch)
{
  const auto G = make_group("so3");
  const auto a = sample_profile(G, Vec::Zero(3), ProfileVariant::Limit, {0.5, 0.3}, coarse(), opts());
  const auto b = sample_profile(G, Vec::Zero(3), ProfileVariant::Limit, {0.5, 0.2}, coarse(), opts());
  try {
    curvature_equivalence(a, b, coarse());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
  }
}

TEST(Equivalence, SyntheticRates)
{
  gen::Rng r(61);
  const auto base = gen::planar_space(r, 12).scaled(2.0);
  ProfileSample s1, lin, quad;
  for (auto* s : {&s1, &lin, &quad}) {
    s->eps_grid = {0.4, 0.2, 0.1, 0.05};
    s->net_h    = 0.01;
  }
  for (double e : s1.eps_grid) {
    s1.spaces.push_back(base);
    lin.spaces.push_back(stretched(base, e));
    quad.spaces.push_back(stretched(base, e * e));
  }
  EXPECT_EQ(curvature_equivalence(s1, quad).verdict, Verdict::Equivalent);
  EXPECT_EQ(curvature_equivalence(s1, lin).verdict, Verdict::Undecided);
}

TEST(ConvergenceFit, RecoversExponent)
{
  gen::Rng r(62);
  const auto base = gen::planar_space(r, 12).scaled(2.0);
  ProfileSample s;
  s.eps_grid = {0.4, 0.3, 0.2, 0.1};
  s.net_h    = 1e-4;
  for (double e : s.eps_grid) { s.spaces.push_back(stretched(base, e)); }
  const auto f = convergence_fit(s, base, coarse());
  EXPECT_NEAR(f.alpha, 1.0, 1e-6);
  EXPECT_TRUE(f.pass);
  EXPECT_FALSE(f.saturated);
  s.eps_grid.resize(2);
  s.spaces.resize(2);
  EXPECT_THROW(convergence_fit(s, base, coarse()), Error);
}

TEST(ConvergenceFit, FloorScalesWithNetStep)
{
  EXPECT_EQ(resolution_floor(0.2), 2 * resolution_floor(0.1));
  ProfileSample s;
  s.eps_grid = {0.4, 0.2, 0.1};
  s.net_h    = 0.1;
  gen::Rng r(63);
  const auto base = gen::planar_space(r, 8);
  for (std::size_t k = 0; k < 3; ++k) { s.spaces.push_back(base); }
  const auto f = convergence_fit(s, base, coarse());
  EXPECT_TRUE(f.saturated);
  EXPECT_TRUE(f.pass);
}

TEST(Rectifiability, LinearDeviationPassesSqrtFails)
{
  gen::Rng r(64);
  const auto base = gen::planar_space(r, 12).scaled(2.0);
  std::vector<RectifiabilityCell> good, bad;
  for (double e : {0.4, 0.2, 0.1}) {
    for (double a : {1.0, 0.5}) {
      good.push_back({e, a, stretched(base, e * a)});
      bad.push_back({e, a, stretched(base, std::sqrt(e * a))});
    }
  }
  EXPECT_TRUE(rectifiability_check(good, base, 1e-4, coarse()).pass);
  EXPECT_FALSE(rectifiability_check(bad, base, 1e-4, coarse()).pass);
  good.resize(2);
  try {
    rectifiability_check(good, base, 1e-4, coarse());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NeedMoreSamples);
  }
}

TEST(Rigidity, IdenticalGroupsGiveZero)
{
  const auto pairs = rigidity_pairs(3, 2, 7);
  const auto r = bracket_rigidity_scan(catalog_params("so3"), catalog_params("so3"), {0.2, 0.1}, pairs);
  for (const auto& row : r.rows) { EXPECT_LE(row.delta, 2 * SolverConfig{}.tol); }
  ContactFamilyParams bad = catalog_params("so3");
  bad.A = 0.5;
  EXPECT_THROW(bracket_rigidity_scan(bad, catalog_params("so3"), {0.2}, pairs), ConstraintViolation);
}

TEST(Rigidity, FirstOrderAgreement)
{
  // Same nilpotentization: |d1 - d2| is o(eps).
  const auto pairs = rigidity_pairs(3, 2, 8);
  const auto r = bracket_rigidity_scan(make_group("so3"), make_group("sl2r"), {0.2, 0.1}, pairs);
  for (const auto& row : r.rows) { EXPECT_LE(row.delta, 0.1 * row.eps); }
  EXPECT_EQ(slice_file_name("run", ProfileVariant::Dg, 0.1), "run_Dg_0.1.csv");
}
