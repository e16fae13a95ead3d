#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "olrsim/dataset.hpp"
#include "olrsim/errors.hpp"
#include "olrsim/policy.hpp"
#include "olrsim/rng.hpp"
#include "support.hpp"

using namespace olrsim;
using olrsim::testing::gaussian;
using olrsim::testing::random_rows;
using olrsim::testing::rel_err;
using olrsim::testing::single_prompt;

TEST(Rng, DerivedSeedsDependOnTagAndIndex) {
  EXPECT_EQ(derive_seed(1, "rollout", 3), derive_seed(1, "rollout", 3));
  EXPECT_NE(derive_seed(1, "rollout", 3), derive_seed(1, "rollout", 4));
  EXPECT_NE(derive_seed(1, "rollout", 3), derive_seed(1, "noise", 3));
  EXPECT_NE(derive_seed(1, "rollout", 3), derive_seed(2, "rollout", 3));
}

TEST(Types, LabelStrings) {
  EXPECT_EQ(label_to_string(kInfeasible), "infeasible");
  EXPECT_EQ(label_to_string(4), "4");
  EXPECT_EQ(noise_class_from_string("active"), NoiseClass::kActive);
  EXPECT_THROW(noise_class_from_string("loud"), Error);
}

TEST(AnswerSpace, RejectsDuplicatesAndMissingTruth) {
  AnswerSpace s{0, {0, 1, 1}, 0};
  EXPECT_THROW(s.validate(), Error);
  AnswerSpace t{0, {0, 1}, 5};
  EXPECT_THROW(t.validate(), Error);
  AnswerSpace single{0, {0}, 0};
  EXPECT_THROW(single.validate(), Error);
}

TEST(LabeledPrompt, ClassMustAgreeWithLabel) {
  LabeledPrompt p;
  p.space = AnswerSpace{0, {0, 1, 2}, 1};
  p.train_label = 1;
  p.noise_class = NoiseClass::kClean;
  EXPECT_NO_THROW(p.validate());
  p.train_label = 2;
  EXPECT_THROW(p.validate(), Error);
  p.noise_class = NoiseClass::kActive;
  EXPECT_NO_THROW(p.validate());
  p.train_label = kInfeasible;
  EXPECT_THROW(p.validate(), Error);
  p.noise_class = NoiseClass::kInactive;
  EXPECT_NO_THROW(p.validate());
}

TEST(GenerateDataset, ShapesAndUnitNorms) {
  const auto task = generate_dataset({50, 4, 3, 0.5, 16, 11});
  ASSERT_EQ(task.dataset.size(), 50u);
  for (const auto& p : task.dataset) {
    EXPECT_EQ(p.space.size(), 4u);
    EXPECT_EQ(p.noise_class, NoiseClass::kClean);
    EXPECT_EQ(p.train_label, p.space.true_answer);
    const auto& m = task.features.features(p.prompt_id);
    ASSERT_EQ(m.rows(), 4);
    ASSERT_EQ(m.cols(), 16);
    for (Eigen::Index r = 0; r < m.rows(); ++r) EXPECT_NEAR(m.row(r).norm(), 1.0, 1e-9);
  }
}

TEST(GenerateDataset, SkillDirectionsAreOrthonormal) {
  const auto task = generate_dataset({20, 3, 5, 0.5, 12, 2});
  const auto& u = task.features.skill_directions();
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < u.size(); ++j) {
      EXPECT_NEAR(u[i].dot(u[j]), i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(GenerateDataset, RejectsBadSpecs) {
  EXPECT_THROW(generate_dataset({0, 5, 1, 0.5, 8, 0}), ConfigError);
  EXPECT_THROW(generate_dataset({5, 1, 1, 0.5, 8, 0}), ConfigError);
  EXPECT_THROW(generate_dataset({5, 2, 6, 0.5, 8, 0}), ConfigError);
  EXPECT_THROW(generate_dataset({5, 2, 4, 0.5, 4, 0}), ConfigError);
  EXPECT_THROW(generate_dataset({5, 2, 1, 1.5, 8, 0}), ConfigError);
}

TEST(GenerateDataset, NoCouplingAtZeroAlpha) {
  const auto task = generate_dataset({1, 2, 1, 0.0, 4, 0});
  const auto& p = task.dataset[0];
  const Eigen::VectorXd f0 = task.features.phi(p.space, p.space.answers[0]);
  const Eigen::VectorXd f1 = task.features.phi(p.space, p.space.answers[1]);
  EXPECT_NEAR(f0.norm(), 1.0, 1e-12);
  EXPECT_NEAR(f1.norm(), 1.0, 1e-12);
  EXPECT_GT((f0 - f1).norm(), 1e-6);
}

TEST(GenerateDataset, FullCouplingGivesSkillDirection) {
  const auto task = generate_dataset({6, 2, 2, 1.0, 8, 3});
  for (const auto& p : task.dataset) {
    const Eigen::VectorXd f = task.features.phi(p.space, p.space.true_answer);
    const Eigen::VectorXd& u = task.features.skill_direction(task.features.skill_of(p.prompt_id));
    EXPECT_LT((f - u).norm(), 1e-12);
  }
}

TEST(GenerateDataset, SameSkillCorrectFeaturesOverlapByAlpha) {
  const auto task = generate_dataset({100, 5, 4, 0.5, 32, 7});
  double sum = 0.0;
  int n = 0;
  const auto& d = task.dataset;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      if (task.features.skill_of(d[i].prompt_id) != task.features.skill_of(d[j].prompt_id)) continue;
      sum += task.features.phi(d[i].space, d[i].space.true_answer)
                 .dot(task.features.phi(d[j].space, d[j].space.true_answer));
      ++n;
    }
  }
  ASSERT_GT(n, 0);
  EXPECT_NEAR(sum / n, 0.5, 0.1);
}

TEST(GenerateDataset, DeterministicInSeed) {
  const auto a = generate_dataset({30, 3, 2, 0.4, 10, 99});
  const auto b = generate_dataset({30, 3, 2, 0.4, 10, 99});
  for (std::size_t p = 0; p < 30; ++p) {
    EXPECT_EQ(a.dataset[p].space.true_answer, b.dataset[p].space.true_answer);
    EXPECT_EQ(a.features.features(static_cast<PromptId>(p)),
              b.features.features(static_cast<PromptId>(p)));
  }
}

TEST(ActionProbs, ZeroThetaIsUniform) {
  Rng rng(1);
  const auto fx = single_prompt(random_rows(4, 6, rng));
  const auto p = action_probs(PolicyParams::zeros(6), fx.fm, fx.dataset[0].space);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(p[i], 0.25);
}

TEST(ActionProbs, HandComputedSoftmax) {
  // Features e0 and 0 with theta = ln3 * e0 give logits (ln 3, 0).
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, 2);
  rows(0, 0) = 1.0;
  const auto fx = single_prompt(rows);
  PolicyParams th{Eigen::Vector2d(std::log(3.0), 0.0)};
  const auto p = action_probs(th, fx.fm, fx.dataset[0].space);
  EXPECT_NEAR(p[0], 0.75, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
}

TEST(ActionProbs, NormalisedAndStableForHugeLogits) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto fx = single_prompt(random_rows(5, 8, rng));
    PolicyParams th{gaussian(8, rng, trial < 100 ? 1.0 : 1e3)};
    const auto p = action_probs(th, fx.fm, fx.dataset[0].space);
    EXPECT_TRUE(p.allFinite());
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
  }
}

TEST(LabelProb, ZeroOutsideSpace) {
  Rng rng(3);
  const auto fx = single_prompt(random_rows(3, 4, rng));
  EXPECT_EQ(label_prob(PolicyParams::zeros(4), fx.fm, fx.dataset[0].space, kInfeasible), 0.0);
  EXPECT_NEAR(label_prob(PolicyParams::zeros(4), fx.fm, fx.dataset[0].space, 1), 1.0 / 3, 1e-15);
}

TEST(SampleRollouts, DeterministicForFixedSeed) {
  Rng rng(4);
  const auto fx = single_prompt(random_rows(5, 6, rng));
  PolicyParams th{gaussian(6, rng)};
  Rng a(77), b(77);
  EXPECT_EQ(sample_rollouts(th, fx.fm, fx.dataset[0].space, 64, a),
            sample_rollouts(th, fx.fm, fx.dataset[0].space, 64, b));
}

TEST(SampleRollouts, UniformTwoAnswerFrequencyWithinBinomialBand) {
  Rng frows(5);
  const auto fx = single_prompt(random_rows(2, 4, frows));
  const int seeds = 2000;
  const int K = 8;
  int zeros = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng = make_stream(123, "sample-test", static_cast<std::uint64_t>(s));
    for (AnswerId a : sample_rollouts(PolicyParams::zeros(4), fx.fm, fx.dataset[0].space, K, rng)) {
      zeros += (a == 0);
    }
  }
  const double n = seeds * K;
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_NEAR(zeros, n / 2, 3 * sigma);
}

TEST(SampleRollouts, PointMassLimit) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, 2);
  rows(0, 0) = 1.0;
  const auto fx = single_prompt(rows);
  PolicyParams th{Eigen::Vector2d(60.0, 0.0)};
  Rng rng(6);
  for (AnswerId a : sample_rollouts(th, fx.fm, fx.dataset[0].space, 200, rng)) EXPECT_EQ(a, 0);
}

TEST(SampleRollouts, RejectsNonPositiveK) {
  Rng rng(7);
  const auto fx = single_prompt(random_rows(2, 3, rng));
  EXPECT_THROW(sample_rollouts(PolicyParams::zeros(3), fx.fm, fx.dataset[0].space, 0, rng),
               ConfigError);
}

TEST(LogProbGrad, UniformTwoAnswerHalfDifference) {
  Rng rng(8);
  const Eigen::MatrixXd rows = random_rows(2, 5, rng);
  const auto fx = single_prompt(rows);
  const auto g = log_prob_grad(PolicyParams::zeros(5), fx.fm, fx.dataset[0].space, 0);
  const Eigen::VectorXd expected = (rows.row(0) - rows.row(1)).transpose() / 2.0;
  EXPECT_LT((g - expected).norm(), 1e-15);
}

TEST(LogProbGrad, VanishesAtPointMass) {
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2, 2);
  rows(0, 0) = 1.0;
  const auto fx = single_prompt(rows);
  PolicyParams th{Eigen::Vector2d(80.0, 0.0)};
  EXPECT_LT(log_prob_grad(th, fx.fm, fx.dataset[0].space, 0).norm(), 1e-30);
}

TEST(LogProbGrad, RejectsAnswersOutsideSpace) {
  Rng rng(9);
  const auto fx = single_prompt(random_rows(3, 3, rng));
  EXPECT_THROW(log_prob_grad(PolicyParams::zeros(3), fx.fm, fx.dataset[0].space, kInfeasible),
               DomainError);
}

// Property: analytic score matches central differences of log pi.
TEST(LogProbGrad, MatchesFiniteDifferences) {
  Rng rng(10);
  const double h = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> dims(1, 16), answers(2, 6);
    const int d = dims(rng);
    const int a = answers(rng);
    const auto fx = single_prompt(random_rows(a, d, rng));
    const auto& space = fx.dataset[0].space;
    PolicyParams th{gaussian(d, rng)};
    const AnswerId y = std::uniform_int_distribution<int>(0, a - 1)(rng);
    const auto g = log_prob_grad(th, fx.fm, space, y);
    Eigen::VectorXd fd(d);
    for (int i = 0; i < d; ++i) {
      PolicyParams hi = th, lo = th;
      hi.theta[i] += h;
      lo.theta[i] -= h;
      fd[i] = (std::log(label_prob(hi, fx.fm, space, y)) -
               std::log(label_prob(lo, fx.fm, space, y))) /
              (2 * h);
    }
    EXPECT_LT(rel_err(g, fd), 1e-5) << "trial " << trial;
  }
}

// Property: sum_y pi(y) grad log pi(y) = 0.
TEST(LogProbGrad, ExpectedScoreIsZero) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto fx = single_prompt(random_rows(5, 7, rng));
    const auto& space = fx.dataset[0].space;
    PolicyParams th{gaussian(7, rng, 2.0)};
    const auto p = action_probs(th, fx.fm, space);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(7);
    for (int y = 0; y < 5; ++y) s += p[y] * log_prob_grad(th, fx.fm, space, y);
    EXPECT_LT(s.norm(), 1e-8);
  }
}

TEST(PriorParams, FavoursCorrectAnswers) {
  const auto task = generate_dataset({40, 5, 2, 0.6, 32, 5});
  const auto th = prior_params(task.features, 2.0);
  int favoured = 0;
  for (const auto& p : task.dataset) {
    const auto probs = action_probs(th, task.features, p.space);
    Eigen::Index best;
    probs.maxCoeff(&best);
    favoured += p.space.answers[static_cast<std::size_t>(best)] == p.space.true_answer;
  }
  EXPECT_GE(favoured, 36);
}
