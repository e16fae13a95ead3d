#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "olrsim/dataset.hpp"
#include "olrsim/policy.hpp"

namespace olrsim {

// K rollouts of one prompt at one epoch together with their verifier rewards
// and group-normalised advantages.
struct RolloutBatch {
  PromptId prompt_id = 0;
  int epoch = 0;
  std::vector<AnswerId> answers;
  std::vector<double> rewards;
  std::vector<double> advantages;

  std::size_t size() const { return answers.size(); }
  // True when every advantage is exactly zero (all rewards equal).
  bool zero_signal() const;
  void validate() const;
};

struct UpdateConfig {
  double eta = 0.5;
  double beta = 0.0;
  double clip_eps = 0.2;
  double adv_eps = 1e-6;
  // Coefficient of the policy-entropy bonus; 0 disables it.
  double entropy_bonus = 0.0;

  void validate() const;
};

// 1 iff answer == label. The infeasible sentinel never matches.
int verify_reward(AnswerId answer, AnswerId effective_label);

std::vector<double> rewards_for(std::span<const AnswerId> answers,
                                AnswerId effective_label);

// A_k = (r_k - mean) / (std + adv_eps) with population statistics. Groups with
// identical rewards return exact zeros.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double adv_eps);

RolloutBatch make_batch(PromptId prompt_id, int epoch,
                        std::vector<AnswerId> answers,
                        std::vector<double> rewards, double adv_eps);

// Exact KL(pi_theta || pi_ref) over the finite answer space.
double kl_to_reference(const PolicyParams& params, const PolicyParams& ref_params,
                       const FeatureMap& fm, const AnswerSpace& space);

double policy_entropy(const PolicyParams& params, const FeatureMap& fm,
                      const AnswerSpace& space);

// Clipped surrogate, averaged over every rollout in `batches`, minus
// beta * KL(pi || pi_ref) plus entropy_bonus * H(pi) (both averaged with the
// same rollout weights). This is the quantity grpo_update ascends.
double surrogate_objective(const PolicyParams& params,
                           const PolicyParams& old_params,
                           const PolicyParams& ref_params, const FeatureMap& fm,
                           const Dataset& dataset,
                           std::span<const RolloutBatch> batches,
                           const UpdateConfig& cfg);

// Per-prompt share of the objective gradient, already weighted by the prompt's
// rollout share, so the full gradient is the sum of the returned vectors.
// Zero-signal prompts contribute an exact zero vector when beta and the
// entropy bonus are both 0.
std::vector<Eigen::VectorXd> gradient_contributions(
    const PolicyParams& params, const PolicyParams& old_params,
    const PolicyParams& ref_params, const FeatureMap& fm, const Dataset& dataset,
    std::span<const RolloutBatch> batches, const UpdateConfig& cfg);

Eigen::VectorXd surrogate_gradient(const PolicyParams& params,
                                   const PolicyParams& old_params,
                                   const PolicyParams& ref_params,
                                   const FeatureMap& fm, const Dataset& dataset,
                                   std::span<const RolloutBatch> batches,
                                   const UpdateConfig& cfg);

// One gradient-ascent step of size eta on surrogate_objective. Contributions
// are reduced in batch order. Throws UpdateError naming the prompt whose
// contribution is not finite.
PolicyParams grpo_update(const PolicyParams& params,
                         const PolicyParams& old_params,
                         const PolicyParams& ref_params, const FeatureMap& fm,
                         const Dataset& dataset,
                         std::span<const RolloutBatch> batches,
                         const UpdateConfig& cfg);

}  // namespace olrsim
