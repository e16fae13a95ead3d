#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "olrsim/errors.hpp"
#include "olrsim/theory.hpp"
#include "support.hpp"

using namespace olrsim;
using olrsim::testing::make_fixture;
using olrsim::testing::random_rows;

namespace {

std::vector<PromptId> ids_where(const Dataset& d, bool noisy) {
  std::vector<PromptId> out;
  for (const auto& p : d) {
    if (p.is_noisy() == noisy) out.push_back(p.prompt_id);
  }
  return out;
}

Dataset mark_half_active(Dataset d) {
  for (std::size_t i = 0; i < d.size(); i += 2) {
    const auto& s = d[i].space;
    d[i].train_label = s.answers[(s.index_of(s.true_answer) + 1) % s.size()];
    d[i].noise_class = NoiseClass::kActive;
  }
  return d;
}

}  // namespace

TEST(LogRatio, KnownValueAndUndefined) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(3, 3);
  auto fx = make_fixture({rows});
  fx.dataset[0].train_label = 1;
  fx.dataset[0].noise_class = NoiseClass::kActive;
  PolicyParams th{Eigen::Vector3d(std::log(3.0), 0.0, 0.0)};
  EXPECT_NEAR(log_ratio(th, fx.fm, fx.dataset[0]), std::log(3.0), 1e-14);
  EXPECT_NEAR(reference_log_ratio(PolicyParams::zeros(3), fx.fm, fx.dataset[0]), 0.0, 0.0);

  fx.dataset[0].train_label = kInfeasible;
  fx.dataset[0].noise_class = NoiseClass::kInactive;
  EXPECT_THROW(log_ratio(th, fx.fm, fx.dataset[0]), UndefinedError);
}

TEST(LogRatio, StableForExtremeLogits) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(2, 2);
  auto fx = make_fixture({rows});
  fx.dataset[0].train_label = 1;
  fx.dataset[0].noise_class = NoiseClass::kActive;
  PolicyParams th{Eigen::Vector2d(900.0, -900.0)};
  EXPECT_NEAR(log_ratio(th, fx.fm, fx.dataset[0]), 1800.0, 1e-9);
}

TEST(Coupling, DirectDotProduct) {
  // Two prompts whose true-answer scores are computed by hand.
  Rng rng(21);
  const auto fx = make_fixture({random_rows(3, 5, rng), random_rows(4, 5, rng)});
  auto d = fx.dataset;
  d[1].train_label = 1;
  d[1].noise_class = NoiseClass::kActive;
  const PolicyParams th{olrsim::testing::gaussian(5, rng, 0.5)};
  const std::vector<PromptId> clean{0};
  const std::vector<PromptId> noisy{1};
  Rng r(1);
  const double got = measure_coupling(th, fx.fm, d, clean, noisy, 7, r);
  const auto g0 = log_prob_grad(th, fx.fm, d[0].space, 0);
  const auto g1 = log_prob_grad(th, fx.fm, d[1].space, 0);
  EXPECT_NEAR(got, g0.dot(g1), 1e-12);
}

TEST(Coupling, SelfPairingIsSquaredNorm) {
  Rng rng(22);
  const auto fx = make_fixture({random_rows(4, 6, rng)});
  const PolicyParams th{olrsim::testing::gaussian(6, rng)};
  const std::vector<PromptId> one{0};
  Rng r(2);
  const double got = measure_coupling(th, fx.fm, fx.dataset, one, one, 3, r);
  EXPECT_NEAR(got, log_prob_grad(th, fx.fm, fx.dataset[0].space, 0).squaredNorm(), 1e-12);
}

TEST(Coupling, NearZeroWithoutSharedSkillAndGrowsWithAlpha) {
  double prev = -1.0;
  for (double alpha : {0.0, 0.5, 1.0}) {
    const auto task = generate_dataset({200, 5, 1, alpha, 64, 23});
    const auto d = mark_half_active(task.dataset);
    const auto clean = ids_where(d, false);
    const auto noisy = ids_where(d, true);
    Rng r(3);
    const double g =
        measure_coupling(PolicyParams::zeros(64), task.features, d, clean, noisy, 4000, r);
    if (alpha == 0.0) EXPECT_NEAR(g, 0.0, 0.03);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(Coupling, Errors) {
  Rng rng(24);
  const auto fx = make_fixture({random_rows(3, 4, rng)});
  const std::vector<PromptId> one{0};
  const std::vector<PromptId> none;
  Rng r(4);
  const auto th = PolicyParams::zeros(4);
  EXPECT_THROW(measure_coupling(th, fx.fm, fx.dataset, none, one, 5, r), UndefinedError);
  EXPECT_THROW(measure_coupling(th, fx.fm, fx.dataset, one, one, 0, r), ConfigError);
}

TEST(AdvantageMagnitudes, SplitByClass) {
  Rng rng(25);
  auto fx = make_fixture({random_rows(3, 4, rng), random_rows(3, 4, rng),
                          random_rows(3, 4, rng)});
  fx.dataset[2].train_label = 1;
  fx.dataset[2].noise_class = NoiseClass::kActive;
  std::vector<RolloutBatch> b;
  b.push_back(make_batch(0, 1, {0, 0, 1, 1}, {1, 1, 0, 0}, 1e-12));  // |A| = 1
  b.push_back(make_batch(1, 1, {0, 0, 0, 0}, {1, 1, 1, 1}, 1e-12));  // |A| = 0
  b.push_back(make_batch(2, 1, {1, 0, 0, 0}, {1, 0, 0, 0}, 1e-12));
  const auto m = advantage_magnitudes(b, fx.dataset);
  EXPECT_NEAR(m.clean, 0.5, 1e-9);
  // [1,0,0,0]: |A| = sqrt(3), 1/sqrt(3) x3; mean = sqrt(3)/2.
  EXPECT_NEAR(m.noisy, std::sqrt(3.0) / 2.0, 1e-9);
  EXPECT_EQ(advantage_magnitudes({}, fx.dataset).clean, 0.0);
}

TEST(CriticalRatio, KnownValues) {
  EXPECT_NEAR(critical_ratio(0.5, 2.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(critical_ratio(0.25, 1.0, 1.0), 0.2, 1e-15);
  EXPECT_EQ(critical_ratio(0.0, 1.0, 1.0), 0.0);
  EXPECT_EQ(critical_ratio(1.0, 1.0, 0.0), 1.0);
  EXPECT_THROW(critical_ratio(0.0, 1.0, 0.0), UndefinedError);
  EXPECT_THROW(critical_ratio(-0.1, 1.0, 1.0), UndefinedError);
}

TEST(CriticalRatio, KlVariant) {
  auto r = critical_ratio_kl(0.5, 2.0, 1.0, 0.0, 3.0);
  EXPECT_NEAR(r.raw, 0.5, 1e-15);
  r = critical_ratio_kl(0.5, 2.0, 1.0, 0.1, 2.0);
  EXPECT_NEAR(r.raw, 0.4, 1e-15);
  r = critical_ratio_kl(0.5, 2.0, 1.0, 1.0, 5.0);
  EXPECT_NEAR(r.raw, -2.0, 1e-15);
  EXPECT_EQ(r.clamped, 0.0);
  r = critical_ratio_kl(0.5, 2.0, 1.0, 1.0, -5.0);
  EXPECT_EQ(r.clamped, 1.0);
  EXPECT_THROW(critical_ratio_kl(0.0, 1.0, 0.0, 0.0, 0.0), UndefinedError);
}

TEST(Drift, KnownValuesAndBoundary) {
  EXPECT_NEAR(drift(0.5, 0.2, 2.0, 1.0), 0.5 * 0.8 * 2.0 - 0.2, 1e-15);
  EXPECT_EQ(drift(0.5, 0.0, 2.0, 1.0), 1.0);
  EXPECT_EQ(drift(0.5, 1.0, 2.0, 1.0), -1.0);
}

TEST(Drift, VanishesAtCriticalRatioProperty) {
  Rng rng(26);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double g = u(rng);
    const double gc = u(rng);
    const double gn = u(rng);
    const double rc = critical_ratio(g, gc, gn);
    EXPECT_NEAR(drift(g, rc, gc, gn), 0.0, 1e-12);
    // Drift is decreasing in rho, so it is positive below and negative above.
    EXPECT_GT(drift(g, rc * 0.9, gc, gn), 0.0);
    if (rc < 0.99) EXPECT_LT(drift(g, std::min(1.0, rc * 1.1 + 1e-3), gc, gn), 0.0);
  }
}

TEST(CriticalRatio, MonotoneProperty) {
  Rng rng(27);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double g = u(rng);
    const double gc = u(rng);
    const double gn = u(rng);
    const double base = critical_ratio(g, gc, gn);
    EXPECT_GE(critical_ratio(g * 1.5, gc, gn), base);
    EXPECT_GE(critical_ratio(g, gc * 1.5, gn), base);
    EXPECT_LE(critical_ratio(g, gc, gn * 1.5), base);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
    // A positive KL pull toward the reference lowers the boundary.
    EXPECT_LE(critical_ratio_kl(g, gc, gn, 0.3, u(rng)).raw, base);
  }
}

TEST(Tolerance, KnownValues) {
  auto t = tolerance_report(0.6, 0.5, 0.4);
  EXPECT_NEAR(t.rho_eff, 0.3, 1e-15);
  EXPECT_NEAR(t.rho_c_olr, 0.8, 1e-15);
  EXPECT_FALSE(t.unbounded);
  t = tolerance_report(0.6, 0.0, 0.4);
  EXPECT_EQ(t.rho_eff, 0.6);
  EXPECT_EQ(t.rho_c_olr, 0.4);
  t = tolerance_report(0.6, 1.0, 0.4);
  EXPECT_EQ(t.rho_eff, 0.0);
  EXPECT_TRUE(t.unbounded);
  EXPECT_EQ(t.rho_c_olr, std::numeric_limits<double>::infinity());
  EXPECT_THROW(tolerance_report(0.6, 1.2, 0.4), ConfigError);
}

TEST(Concentration, SpreadShrinksWithK) {
  // Two answers under a uniform policy: p = 1/2.
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(2, 2);
  const auto fx = make_fixture({rows});
  const std::vector<int> ks{4, 16};
  Rng r(28);
  const auto out =
      concentration_probe(PolicyParams::zeros(2), fx.fm, fx.dataset[0], ks, 10000, r);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].k, 4);
  EXPECT_GT(out[0].error_std, out[1].error_std);
  EXPECT_GT(out[1].error_std, 0.0);
}

TEST(Concentration, Errors) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(2, 2);
  const auto fx = make_fixture({rows});
  Rng r(29);
  const std::vector<int> bad{0};
  const std::vector<int> ok{4};
  EXPECT_THROW(concentration_probe(PolicyParams::zeros(2), fx.fm, fx.dataset[0], ok, 10, r),
               ConfigError);
  EXPECT_THROW(concentration_probe(PolicyParams::zeros(2), fx.fm, fx.dataset[0], bad, 200, r),
               ConfigError);
}
