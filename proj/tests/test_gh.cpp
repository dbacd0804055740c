#include <gtest/gtest.h>

#include <srprofile/gh.hpp>
#include <srprofile/metric_space.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "support/generators.hpp"

using namespace srprofile;

namespace {

// Half the least distortion over every relation in X x Y that is a correspondence.
double brute_force_gh(const FiniteMetricSpace& X, const FiniteMetricSpace& Y)
{
  const std::size_t nx = X.size(), ny = Y.size(), cells = nx * ny;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (1ULL << cells); ++mask) {
    Correspondence R;
    for (std::size_t c = 0; c < cells; ++c) {
      if (mask >> c & 1ULL) { R.pairs.emplace_back(c / ny, c % ny); }
    }
    if (is_correspondence(R, nx, ny)) { best = std::min(best, distortion(X, Y, R)); }
  }
  return 0.5 * best;
}

FiniteMetricSpace from_rows(std::initializer_list<std::initializer_list<double>> rows)
{
  Eigen::MatrixXd d(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) { d(i, j++) = v; }
    ++i;
  }
  return FiniteMetricSpace(d);
}

}  // namespace

TEST(MetricSpace, RejectsNonMetrics)
{
  EXPECT_THROW(from_rows({{0, 1}, {2, 0}}), Error);
  EXPECT_THROW(from_rows({{0, 0}, {0, 0}}), Error);
  EXPECT_THROW(from_rows({{1, 1}, {1, 0}}), Error);
  EXPECT_THROW(from_rows({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}), Error);
  try {
    from_rows({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAMetric);
  }
  EXPECT_NO_THROW(from_rows({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}));
}

TEST(MetricSpace, ClosureOfGraphWeights)
{
  Eigen::MatrixXd w(3, 3);
  const double inf = std::numeric_limits<double>::infinity();
  w << 0, 1, inf, 1, 0, 2, inf, 2, 0;
  const FiniteMetricSpace X(metric_closure(w));
  EXPECT_EQ(X(0, 2), 3.0);
}

TEST(MetricSpace, CsvRoundTripIsBitExact)
{
  gen::Rng r(41);
  for (int k = 0; k < 20; ++k) {
    const auto X = gen::planar_space(r, static_cast<std::size_t>(r.integer(1, 12)));
    std::stringstream ss;
    write_csv(ss, X);
    const auto Y = read_csv(ss);
    ASSERT_EQ(X.size(), Y.size());
    EXPECT_TRUE((X.dist().array() == Y.dist().array()).all());
  }
}

TEST(MetricSpace, CsvKeepsCoordinates)
{
  Eigen::MatrixXd d(2, 2);
  d << 0, 0.1, 0.1, 0;
  Vec a(3), b(3);
  a << 0.1, -0.2, 1.0 / 3.0;
  b << 0, 0, 0;
  const FiniteMetricSpace X(d, {a, b});
  std::stringstream ss;
  write_csv(ss, X);
  const auto Y = read_csv(ss);
  ASSERT_TRUE(Y.has_coords());
  EXPECT_EQ(Y.coords()[0], a);
}

TEST(MetricSpace, JsonRoundTripAndFiles)
{
  gen::Rng r(42);
  const auto X = gen::planar_space(r, 5);
  const auto Y = metric_space_from_json(nlohmann::json::parse(to_json(X).dump()));
  EXPECT_TRUE((X.dist().array() == Y.dist().array()).all());
  const std::string path = ::testing::TempDir() + "srp_space.csv";
  {
    std::ofstream out(path);
    write_csv(out, X);
  }
  EXPECT_TRUE((load_metric_space(path).dist().array() == X.dist().array()).all());
  std::remove(path.c_str());
  try {
    load_metric_space("/nonexistent/space.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(MetricSpace, MalformedCsv)
{
  std::stringstream a("d1,d2\n0,1\n");
  EXPECT_THROW(read_csv(a), Error);
  std::stringstream b("d1,q2\n0,1\n1,0\n");
  EXPECT_THROW(read_csv(b), Error);
  std::stringstream c("d1,d2\n0,abc\n1,0\n");
  EXPECT_THROW(read_csv(c), Error);
}

TEST(Hausdorff, MatchesDefinition)
{
  const auto X = from_rows({{0, 1, 2, 3}, {1, 0, 1, 2}, {2, 1, 0, 1}, {3, 2, 1, 0}});
  EXPECT_EQ(hausdorff_distance({0}, {3}, X), 3.0);
  EXPECT_EQ(hausdorff_distance({0, 1}, {1, 2}, X), 1.0);
  EXPECT_EQ(hausdorff_distance({0, 3}, {0, 1, 2, 3}, X), 1.0);
  EXPECT_THROW(hausdorff_distance({}, {1}, X), Error);
}

TEST(Gh, ExactMatchesBruteForce)
{
  gen::Rng r(43);
  for (int k = 0; k < 60; ++k) {
    const auto X = gen::planar_space(r, static_cast<std::size_t>(r.integer(1, 4)));
    const auto Y = gen::planar_space(r, static_cast<std::size_t>(r.integer(1, 3)));
    EXPECT_NEAR(gh_exact_small(X, Y), brute_force_gh(X, Y), 1e-15) << k;
  }
}

TEST(Gh, PermutedCopiesAreAtDistanceZero)
{
  gen::Rng r(44);
  for (int k = 0; k < 100; ++k) {
    const auto n = static_cast<std::size_t>(r.integer(1, 6));
    const auto X = gen::planar_space(r, n);
    const auto Y = gen::permuted(X, r.permutation(n));
    EXPECT_EQ(gh_exact_small(X, Y), 0.0);
    EXPECT_EQ(gh_upper(X, Y).value, 0.0);
  }
}

TEST(Gh, SandwichAndCorrespondence)
{
  gen::Rng r(45);
  for (int k = 0; k < 100; ++k) {
    const auto X = gen::planar_space(r, static_cast<std::size_t>(r.integer(1, 6)));
    const auto Y = gen::planar_space(r, static_cast<std::size_t>(r.integer(1, 6)));
    const double lo = gh_lower(X, Y), ex = gh_exact_small(X, Y);
    const auto up = gh_upper(X, Y);
    EXPECT_LE(lo, ex + 1e-15);
    EXPECT_LE(ex, up.value + 1e-15);
    EXPECT_TRUE(is_correspondence(up.correspondence, X.size(), Y.size()));
    EXPECT_EQ(0.5 * distortion(X, Y, up.correspondence), up.value);
  }
}

TEST(Gh, ScalingIsExact)
{
  gen::Rng r(46);
  for (int k = 0; k < 30; ++k) {
    const auto X = gen::planar_space(r, 5), Y = gen::planar_space(r, 4);
    const double base = gh_exact_small(X, Y);
    for (double lambda : {0.5, 2.0}) {
      EXPECT_EQ(gh_exact_small(X.scaled(lambda), Y.scaled(lambda)), lambda * base);
    }
  }
}

TEST(Gh, TriangleInequality)
{
  gen::Rng r(47);
  for (int k = 0; k < 40; ++k) {
    const auto X = gen::planar_space(r, 4), Y = gen::planar_space(r, 3), Z = gen::planar_space(r, 4);
    EXPECT_LE(gh_exact_small(X, Z), gh_exact_small(X, Y) + gh_exact_small(Y, Z) + 1e-12);
  }
}

TEST(Gh, PointVersusSpaceIsHalfDiameter)
{
  gen::Rng r(48);
  const auto P = from_rows({{0}});
  for (int k = 0; k < 20; ++k) {
    const auto X = gen::planar_space(r, 6);
    EXPECT_EQ(gh_exact_small(P, X), 0.5 * X.diameter());
    EXPECT_EQ(gh_upper(P, X).value, 0.5 * X.diameter());
    EXPECT_EQ(gh_lower(P, X), 0.5 * X.diameter());
  }
}

TEST(Gh, UpperIsDeterministicOnLargerSpaces)
{
  gen::Rng r(49);
  const auto X = gen::planar_space(r, 40), Y = gen::planar_space(r, 35);
  SolverConfig cfg;
  const auto a = gh_upper(X, Y, cfg), b = gh_upper(X, Y, cfg);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.correspondence.pairs, b.correspondence.pairs);
  EXPECT_LE(gh_lower(X, Y), a.value);
}

TEST(Gh, Errors)
{
  gen::Rng r(50);
  const auto big = gen::planar_space(r, 8), small = gen::planar_space(r, 3);
  try {
    gh_exact_small(big, small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
  const FiniteMetricSpace empty;
  EXPECT_THROW(gh_lower(empty, small), Error);
  EXPECT_THROW(gh_upper(small, empty), Error);
}

TEST(Gh, ReportJson)
{
  gen::Rng r(51);
  const auto X = gen::planar_space(r, 3), Y = gen::planar_space(r, 3);
  const auto j = to_json(gh_report(X, Y));
  EXPECT_TRUE(j.at("exact").is_number());
  EXPECT_GE(j.at("upper").get<double>(), j.at("exact").get<double>());
  for (const auto& p : j.at("correspondence")) { EXPECT_GE(p[0].get<int>(), 1); }
}
