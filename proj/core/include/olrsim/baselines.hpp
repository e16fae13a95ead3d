#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "olrsim/dataset.hpp"
#include "olrsim/grpo.hpp"
#include "olrsim/policy.hpp"
#include "olrsim/rng.hpp"

namespace olrsim {

enum class Strategy {
  kGrpo,
  kOlr,
  kTtrl,
  kRandomSelect,
  kSmallLoss,
  kConfPenalty,
  kLabelSmooth,
};

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

// Strategies that only approximate a token-level method at the level of the
// answer distribution.
bool is_tabular_analog(Strategy s);
bool needs_selection_fraction(Strategy s);

// Majority-vote pseudo-label; ignores the training label entirely.
AnswerId ttrl_label(std::span<const AnswerId> batch);

// Uniform subset without replacement of round(fraction * N) prompt ids (at
// least one), sorted. Throws ConfigError unless fraction lies in (0, 1].
std::vector<PromptId> random_select(const Dataset& dataset, double fraction,
                                    Rng& rng);

// Advantage-weighted negative log-likelihood of one batch,
//   -(1/K) sum_k A_k log pi(y_k | x).
// Zero-signal batches have loss exactly 0.
double surrogate_loss(const PolicyParams& params, const FeatureMap& fm,
                      const AnswerSpace& space, const RolloutBatch& batch);

// Indices of the round(fraction * n) (at least one) smallest |loss| values;
// ties keep the earlier index. Returned in increasing index order.
std::vector<std::size_t> small_loss_select(std::span<const double> losses,
                                           double fraction);

struct RegularizerTerms {
  // Added to the objective as entropy_bonus * H(pi(.|x)).
  double entropy_bonus = 0.0;
  // Rewards become (1 - smoothing) r + smoothing / |answers| before
  // group normalisation.
  double reward_smoothing = 0.0;
};

RegularizerTerms entropy_regularizers(Strategy strategy, double lambda);

std::vector<double> smooth_rewards(std::span<const double> rewards, double lambda,
                                   std::size_t n_answers);

}  // namespace olrsim
