#include <gtest/gtest.h>

#include "gom/error.hpp"
#include "gom/moment_matrix.hpp"
#include "gom/oracle.hpp"
#include "gom/worked_example.hpp"
#include "reference.hpp"

using namespace gom;

TEST(Oracle, MomentsMatchBruteForceJointSum) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto model = random_model(Scheme({2, 3, 2, 3}), 1 + seed % 3, seed, false);
    auto mt = exact_ell_moments(model, 4);
    EXPECT_EQ(mt.source(), MomentSource::exact_oracle);
    EXPECT_EQ(mt.values().size(), model.scheme().cell_count());
    for (const auto& [cell, value] : mt.values()) {
      EXPECT_EQ(value, reference::brute_force_moment(model, cell)) << cell.to_string();
      EXPECT_EQ(value, exact_ell_moment(model, cell));
    }
  }
}

TEST(Oracle, ReferenceModelMoments) {
  auto mt = exact_ell_moments(worked_example_model(), 3);
  EXPECT_EQ(mt.at(CellIndex({1, 1, 0})), Rational(89, 405));
  EXPECT_EQ(mt.at(CellIndex({1, 0, 2})), Rational(197, 1080));
  EXPECT_EQ(mt.at(CellIndex({0, 0, 0})), Rational(1));
}

TEST(Oracle, ConditionalMomentMatchesReference) {
  auto model = worked_example_model();
  auto basis = worked_example_alpha_basis();
  for (const auto& cell : cells_up_to_order(model.scheme(), 2)) {
    auto truth = reference::conditional_truth(model, basis, cell);
    EXPECT_EQ(exact_conditional_moment(model, basis, cell, PowerIndex({1, 0})), truth.expectation[0]);
    EXPECT_EQ(exact_conditional_moment(model, basis, cell, PowerIndex({0, 2})), truth.second[1][1]);
  }
}

TEST(Oracle, LatentCoordinatesReconstructPoints) {
  auto model = worked_example_model();
  auto basis = worked_example_alpha_basis();
  auto g = latent_coordinates(model, basis);
  ASSERT_EQ(g.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(g[i][0] + g[i][1], Rational(1));
    auto beta = basis.columns * std::span<const Rational>(g[i]);
    EXPECT_EQ(beta, model.points()[i]);
  }
  // A basis missing the second direction cannot represent the points.
  Basis<Rational> thin = basis;
  thin.columns = Matrix<Rational>::from_columns({basis.columns.column(0)});
  EXPECT_THROW(latent_coordinates(model, thin), IdentificationError);
}

TEST(Oracle, RejectsInvalidModels) {
  Scheme s({2, 2});
  std::vector<Rational> ok = {Rational(1, 2), Rational(1, 2), Rational(1, 3), Rational(2, 3)};
  std::vector<Rational> bad = {Rational(1, 2), Rational(1, 3), Rational(1, 3), Rational(2, 3)};
  std::vector<Rational> neg = {Rational(3, 2), Rational(-1, 2), Rational(1, 3), Rational(2, 3)};
  EXPECT_NO_THROW(DiscreteLatentModel<Rational>(s, {ok}, {Rational(1)}));
  EXPECT_THROW(DiscreteLatentModel<Rational>(s, {bad}, {Rational(1)}), InputError);
  EXPECT_THROW(DiscreteLatentModel<Rational>(s, {neg}, {Rational(1)}), InputError);
  EXPECT_THROW(DiscreteLatentModel<Rational>(s, {ok, ok}, {Rational(1, 2), Rational(1, 3)}), InputError);
  EXPECT_THROW(DiscreteLatentModel<Rational>(s, {ok}, {Rational(1), Rational(0)}), InputError);
}

TEST(Sampling, DeterministicGivenSeed) {
  auto model = worked_example_model();
  EXPECT_EQ(sample(model, 500, 42).rows(), sample(model, 500, 42).rows());
  EXPECT_NE(sample(model, 500, 42).rows(), sample(model, 500, 43).rows());
  EXPECT_EQ(sample(model, 37, 1).size(), 37u);
  EXPECT_EQ(sample(to_double_model(model), 100, 3).rows(), sample(to_double_model(model), 100, 3).rows());
}

TEST(Sampling, FrequenciesApproachMoments) {
  auto model = worked_example_model();
  auto f = to_frequencies<double>(tabulate(sample(model, 200000, 9), 3));
  auto m = exact_ell_moments(model, 3);
  for (const auto& [cell, value] : m.values())
    EXPECT_NEAR(f.at(cell), to_double(value), 0.01) << cell.to_string();
}

TEST(RandomModel, GeneralPositionCertifiesRank) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const std::size_t K = 1 + seed % 3;
    auto model = random_model(Scheme({3, 3, 2, 2}), K, seed, true);
    EXPECT_EQ(model.support_size(), K);
    auto mt = exact_ell_moments(model, 4);
    EXPECT_EQ(estimate_rank(build_moment_matrix(mt, 2), 0.0, 10), K);
  }
  EXPECT_EQ(random_model(Scheme({2, 2, 3}), 2, 7, true).points(), random_model(Scheme({2, 2, 3}), 2, 7, true).points());
}
