#include <gtest/gtest.h>

#include "gom/error.hpp"
#include "gom/estimator.hpp"
#include "gom/io.hpp"
#include "gom/oracle.hpp"
#include "gom/worked_example.hpp"
#include "reference.hpp"

using namespace gom;

namespace {

FitConfig rational_config() {
  FitConfig cfg;
  cfg.arithmetic = Arithmetic::rational;
  return cfg;
}

}  // namespace

TEST(Fit, ReferenceModelExact) {
  auto mt = exact_ell_moments(worked_example_model(), 3);
  auto cfg = rational_config();
  cfg.preferred_basis_columns = {CellIndex({0, 0, 0}), CellIndex({0, 0, 2})};
  auto m = fit(mt, cfg);
  EXPECT_EQ(m.K, 2u);
  EXPECT_EQ(m.basis.columns, worked_example_alpha_basis().columns);
  EXPECT_EQ(m.diagnostics.estimated_rank, std::optional<std::size_t>(2));
  EXPECT_TRUE(m.diagnostics.summation.ok());
  EXPECT_EQ(m.diagnostics.affine_deviation, 0.0);
  ASSERT_TRUE(m.completed);
  const auto& c = m.conditionals.at(CellIndex({1, 0, 0}));
  EXPECT_EQ(c.status, CellStatus::identified);
  EXPECT_EQ(c.expectation, std::vector<Rational>({Rational(131, 55), Rational(-76, 55)}));
  EXPECT_EQ(*c.variance, std::vector<Rational>({Rational(15523, 6050), Rational(15523, 6050)}));
}

TEST(Fit, EveryStoredCellMatchesOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const std::size_t K = 1 + seed % 3;
    auto model = random_model(Scheme({2, 3, 2, 2}), K, seed, true);
    auto m = fit(exact_ell_moments(model, 4), rational_config());
    ASSERT_EQ(m.K, K);
    for (const auto& [cell, cc] : m.conditionals) {
      if (cc.expectation.empty()) continue;
      auto truth = reference::conditional_truth(model, m.basis, cell);
      EXPECT_EQ(cc.expectation, truth.expectation);
      if (cc.variance) EXPECT_EQ(*cc.variance, truth.variance);
    }
  }
}

TEST(Fit, OverSpecifiedKIsIdentificationError) {
  auto mt = exact_ell_moments(worked_example_model(), 3);
  auto cfg = rational_config();
  cfg.K_override = 5;
  EXPECT_THROW(fit(mt, cfg), IdentificationError);
}

TEST(Fit, ConfigValidation) {
  FitConfig cfg;
  cfg.rank_rel_tol = -1;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = FitConfig{};
  cfg.refine_max_iters = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = FitConfig{};
  cfg.threads = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  auto cfg2 = rational_config();
  cfg2.refine = true;
  EXPECT_THROW(fit(exact_ell_moments(worked_example_model(), 3), cfg2), InputError);
  EXPECT_EQ(parse_normalization("lambda0+lambda1"), Normalization::lambda0_lambda1);
  EXPECT_EQ(parse_cell_status(to_string(CellStatus::expectation_only)), CellStatus::expectation_only);
}

TEST(Fit, DeterministicAndThreadIndependent) {
  auto model = random_model(Scheme({3, 2, 3, 2}), 3, 4, true);
  auto mt = exact_ell_moments(model, 4);
  auto cfg = rational_config();
  const std::string once = model_to_json(fit(mt, cfg));
  EXPECT_EQ(model_to_json(fit(mt, cfg)), once);
  cfg.threads = 4;
  EXPECT_EQ(model_to_json(fit(mt, cfg)), once);

  auto dt = to_frequencies<double>(tabulate(sample(model, 3000, 2), 4));
  FitConfig f;
  f.K_override = 3;
  const std::string fl = model_to_json(fit(dt, f));
  f.threads = 3;
  EXPECT_EQ(model_to_json(fit(dt, f)), fl);
}

TEST(Fit, FromSampleInBothArithmetics) {
  Sample s = sample(worked_example_model(), 2000, 8);
  auto cfg = rational_config();
  cfg.K_override = 2;
  auto exact = fit(s, cfg);
  ASSERT_TRUE(std::holds_alternative<FittedModel<Rational>>(exact));
  EXPECT_TRUE(std::get<FittedModel<Rational>>(exact).diagnostics.summation.ok());
  cfg.arithmetic = Arithmetic::floating;
  auto fl = fit(s, cfg);
  ASSERT_TRUE(std::holds_alternative<FittedModel<double>>(fl));
  EXPECT_EQ(std::get<FittedModel<double>>(fl).K, 2u);
}

TEST(Fit, FloatTableCannotFitExactly) {
  auto dt = to_double_table(exact_ell_moments(worked_example_model(), 3));
  EXPECT_THROW(fit_any(dt, rational_config()), InputError);
  auto r = fit_any(exact_ell_moments(worked_example_model(), 3), FitConfig{});
  EXPECT_TRUE(std::holds_alternative<FittedModel<double>>(r));
}

TEST(Fit, Lambda1Normalization) {
  auto cfg = rational_config();
  cfg.normalization = Normalization::lambda0_lambda1;
  auto m = fit(exact_ell_moments(worked_example_model(), 3), cfg);
  ASSERT_TRUE(m.lambda1_transform);
  const auto& origin = m.conditionals.at(CellIndex({0, 0, 0}));
  EXPECT_EQ(origin.expectation, std::vector<Rational>({Rational(1, 2), Rational(1, 2)}));
}

TEST(Predict, StoredFreshAndRejected) {
  auto mt = exact_ell_moments(worked_example_model(), 3);
  auto cfg = rational_config();
  cfg.preferred_basis_columns = {CellIndex({0, 0, 0}), CellIndex({0, 0, 2})};
  auto m = fit(mt, cfg);
  auto origin = predict(m, CellIndex({0, 0, 0}));
  EXPECT_TRUE(origin.stored);
  EXPECT_EQ(origin.expectation[0] + origin.expectation[1], Rational(1));
  EXPECT_EQ(origin.beta, reconstruct_beta(m.basis, origin.expectation));

  auto p = predict(m, CellIndex({1, 0, 0}));
  EXPECT_NEAR(to_double(p.expectation[0]), 2.3818, 5e-5);
  EXPECT_NEAR(std::sqrt(to_double((*p.variance)[1])), 1.6018, 5e-5);

  EXPECT_THROW(predict(m, CellIndex({1, 2, 3})), InputError);
  cfg.anchors = AnchorPolicy::canonical;
  auto strict = fit(mt, cfg);
  const auto j0 = strict.anchors.measurements();
  CellIndex observing = CellIndex::zeros(3).with(j0[0], 1);
  try {
    predict(strict, observing);
    FAIL();
  } catch (const PredictionError& e) {
    EXPECT_NE(std::string(e.what()).find("not identifiable"), std::string::npos);
  }
}

TEST(Refine, NeverIncreasesResidualAndFixesExactInput) {
  const Scheme s({3, 3, 3, 3});
  FitConfig cfg;
  cfg.K_override = 2;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto latent = random_model(s, 2, seed, true);
    auto mt = to_frequencies<double>(tabulate(sample(latent, 3000, seed), 4));
    auto m = fit(mt, cfg);
    auto r = refine_joint_ls(m, mt, cfg);
    ASSERT_TRUE(r.diagnostics.refinement);
    EXPECT_LE(r.diagnostics.refinement->final_residual, r.diagnostics.refinement->initial_residual);
    EXPECT_NEAR(r.diagnostics.refinement->initial_residual, *m.diagnostics.main_system_residual, 1e-12);
  }
  auto latent = random_model(s, 2, 9, true);
  auto exact = to_double_table(exact_ell_moments(latent, 4));
  auto m = fit(exact, cfg);
  auto r = refine_joint_ls(m, exact, cfg);
  EXPECT_EQ(r.diagnostics.refinement->iterations, 1);
  EXPECT_FALSE(r.diagnostics.refinement->improved);
  EXPECT_EQ(r.basis.columns, m.basis.columns);
}

TEST(MainSystem, ExactMomentsHaveZeroResidual) {
  auto model = random_model(Scheme({3, 2, 3, 2}), 2, 3, true);
  auto mt = to_double_table(exact_ell_moments(model, 4));
  FitConfig cfg;
  auto m = fit(mt, cfg);
  auto res = main_system_residual(m.basis, mt, m.anchors.measurements(), 2);
  EXPECT_LT(res.residual, 1e-12);
  EXPECT_GT(res.equations, res.unknowns);
}
