#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "robust_mspca/errors.hpp"
#include "robust_mspca/moments.hpp"
#include "robust_mspca/mirrorprox.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace robust_mspca {
namespace {

using testing::TempDir;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

TEST(SecondMoment, TwoUnitRows) {
  SourceSamples s;
  s.dim = 2;
  s.labels = {"a"};
  s.data.push_back((Matrix(2, 2) << 1, 0, 0, 1).finished());
  const SecondMomentSet m = compute_second_moment(s);
  EXPECT_EQ(m[0], 0.5 * Matrix::Identity(2, 2));
  EXPECT_DOUBLE_EQ(m.rho_max(), 0.5);
}

TEST(SecondMoment, CenteringAnnihilatesConstants) {
  SourceSamples s;
  s.dim = 3;
  s.labels = {"a"};
  s.data.push_back(Matrix::Constant(6, 3, 2.5));
  EXPECT_LE(compute_second_moment(s, true)[0].norm(), 1e-14);
  EXPECT_GT(compute_second_moment(s, false)[0].norm(), 1.0);
}

TEST(SecondMoment, MonteCarloNearPopulation) {
  // sd of the (0,0) entry at n = 200 is 3 sqrt(2/200) = 0.3, so the 0.5
  // bound is a ~1.7 sigma band: most seeds land inside, the average is
  // much tighter.
  const Matrix pop = Eigen::Vector2d(3, 1).asDiagonal();
  int inside = 0;
  Matrix mean = Matrix::Zero(2, 2);
  const int trials = 200;
  for (int seed = 0; seed < trials; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> normal;
    Matrix x(200, 2);
    for (Index i = 0; i < 200; ++i) {
      x(i, 0) = std::sqrt(3.0) * normal(rng);
      x(i, 1) = normal(rng);
    }
    const Matrix sigma = compute_second_moment(SourceSamples{{x}, {"g"}, 2})[0];
    if ((sigma - pop).cwiseAbs().maxCoeff() <= 0.5) ++inside;
    mean += sigma / trials;
  }
  EXPECT_GE(inside, trials * 85 / 100);
  EXPECT_LE((mean - pop).cwiseAbs().maxCoeff(), 0.1);
}

TEST(SecondMoment, PsdAndRowPermutationInvariant) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x(30, 5);
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng) * (j + 1);
    std::vector<int> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(30, 5);
    for (int i = 0; i < 30; ++i) xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);

    SourceSamples s{{x, xp, x}, {"a", "b", "c"}, 5};
    const SecondMomentSet m = compute_second_moment(s, trial % 2 == 1);
    EXPECT_GE(sym_eig(m[0]).values.minCoeff(), -1e-8);
    EXPECT_LE((m[0] - m[1]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(m[0], m[2]);  // duplicated source: bitwise identical
  }
}

TEST(SecondMoment, DimensionMismatch) {
  SourceSamples s{{Matrix::Ones(3, 2), Matrix::Ones(3, 3)}, {"a", "b"}, 2};
  EXPECT_EQ(kind_of([&] { compute_second_moment(s); }), ErrorKind::ShapeError);
}

TEST(SecondMomentSet, RejectsNonPsdAndAsymmetric) {
  Matrix neg = Eigen::Vector2d(1, -1).asDiagonal();
  EXPECT_EQ(kind_of([&] { SecondMomentSet({neg}, {}); }), ErrorKind::InvalidMatrix);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_EQ(kind_of([&] { SecondMomentSet({asym}, {}); }), ErrorKind::InvalidMatrix);
  EXPECT_NO_THROW(SecondMomentSet::indefinite({neg}, {}));
  EXPECT_DOUBLE_EQ(SecondMomentSet::indefinite({neg}, {}).rho_max(), 1.0);
}

TEST(SecondMomentSet, RhoMaxMatchesRecomputation) {
  std::mt19937_64 rng(4);
  const SecondMomentSet m = testing::random_instance(6, 4, rng);
  double expected = 0.0;
  for (const auto& a : m.matrices()) expected = std::max(expected, operator_norm(a));
  EXPECT_NEAR(m.rho_max(), expected, 1e-10);
}

TEST(LoadSources, OneFilePerSource) {
  TempDir dir;
  dir.write("b.csv", "x,y\n1,2\n3,4\n5,6\n7,8\n9,10\n");
  dir.write("a.csv", "1,0\n0,1\n2,2\n");
  const SourceSamples s = load_sources({{dir.path()}, std::nullopt});
  ASSERT_EQ(s.count(), 2u);
  EXPECT_EQ(s.dim, 2);
  EXPECT_EQ(s.labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.data[0].rows(), 3);
  EXPECT_EQ(s.data[1].rows(), 5);
  EXPECT_DOUBLE_EQ(s.data[1](4, 1), 10.0);
}

TEST(LoadSources, ExplicitFilesAreSortedByLabel) {
  TempDir dir;
  const auto z = dir.write("zeta.csv", "1,2\n");
  const auto a = dir.write("alpha.csv", "3,4\n");
  const SourceSamples s = load_sources({{z, a}, std::nullopt});
  EXPECT_EQ(s.labels, (std::vector<std::string>{"alpha", "zeta"}));
  EXPECT_DOUBLE_EQ(s.data[0](0, 0), 3.0);
}

TEST(LoadSources, SingleFileWithSourceColumn) {
  TempDir dir;
  const auto f = dir.write("all.csv",
                           "f1,source,f2\n1,s2,2\n3,s1,4\n5,s2,6\n");
  const SourceSamples s = load_sources({{f}, std::string("source")});
  ASSERT_EQ(s.count(), 2u);
  EXPECT_EQ(s.labels, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(s.dim, 2);
  EXPECT_EQ(s.data[0].rows(), 1);
  EXPECT_EQ(s.data[1].rows(), 2);
  EXPECT_DOUBLE_EQ(s.data[1](1, 1), 6.0);
}

TEST(LoadSources, NanCellNamesLocation) {
  TempDir dir;
  const auto f = dir.write("bad.csv", "1,2\n3,NaN\n");
  try {
    load_sources({{f}, std::nullopt});
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("NaN"), std::string::npos);
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    EXPECT_NE(msg.find("column 2"), std::string::npos);
  }
}

TEST(LoadSources, ErrorPaths) {
  TempDir dir;
  EXPECT_EQ(kind_of([&] { load_sources({{dir.path() / "missing.csv"}, std::nullopt}); }),
            ErrorKind::IoError);
  const auto ragged = dir.write("ragged.csv", "1,2\n3\n");
  EXPECT_EQ(kind_of([&] { load_sources({{ragged}, std::nullopt}); }), ErrorKind::ShapeError);
  const auto word = dir.write("word.csv", "1,2\n3,abc\n");
  EXPECT_EQ(kind_of([&] { load_sources({{word}, std::nullopt}); }), ErrorKind::ParseError);
  const auto a = dir.write("wide.csv", "1,2,3\n");
  const auto b = dir.write("narrow.csv", "1,2\n");
  EXPECT_EQ(kind_of([&] { load_sources({{a, b}, std::nullopt}); }), ErrorKind::ShapeError);
}

TEST(LoadMoments, ReadsMatrices) {
  TempDir dir;
  dir.write("s2.csv", "2,0\n0,1\n");
  dir.write("s1.csv", "3,0\n0,1\n");
  const SecondMomentSet m = load_moment_matrices({dir.path()});
  EXPECT_EQ(m.labels(), (std::vector<std::string>{"s1", "s2"}));
  EXPECT_DOUBLE_EQ(m[0](0, 0), 3.0);
  EXPECT_DOUBLE_EQ(m.rho_max(), 3.0);
}

TEST(Rescale, DividesByMaxOperatorNorm) {
  Matrix a = Eigen::Vector2d(4, 2).asDiagonal();
  const auto [scaled, scale] = rescale_by_max_opnorm(SecondMomentSet({a}, {}));
  EXPECT_DOUBLE_EQ(scale, 4.0);
  EXPECT_EQ(scaled[0], Matrix(Eigen::Vector2d(1, 0.5).asDiagonal()));
  EXPECT_NEAR(scaled.rho_max(), 1.0, 1e-10);

  const auto [again, one] = rescale_by_max_opnorm(scaled);
  EXPECT_DOUBLE_EQ(one, 1.0);
  EXPECT_EQ(again[0], scaled[0]);
}

TEST(Rescale, AllZeroIsDegenerate) {
  EXPECT_EQ(kind_of([] { rescale_by_max_opnorm(SecondMomentSet({Matrix::Zero(3, 3)}, {})); }),
            ErrorKind::DegenerateInstance);
}

TEST(Rescale, SameRoundedSubspace) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Matrix> mats;
    for (int l = 0; l < 3; ++l) mats.push_back(7.5 * testing::random_psd(6, rng));
    const SecondMomentSet m(std::move(mats), {});
    const auto [scaled, scale] = rescale_by_max_opnorm(m);
    const SolveReport a = solve(m, 2, 300);
    const SolveReport b = solve(scaled, 2, 300);
    EXPECT_LE((a.p_rounded.matrix() - b.p_rounded.matrix()).norm(), 1e-6);
    EXPECT_NEAR(a.worst_case_ev, scale * b.worst_case_ev, 1e-8 * scale);
  }
}

}  // namespace
}  // namespace robust_mspca
