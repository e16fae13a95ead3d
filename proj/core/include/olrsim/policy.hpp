#pragma once

#include <vector>

#include <Eigen/Dense>

#include "olrsim/dataset.hpp"
#include "olrsim/rng.hpp"

namespace olrsim {

// Shared linear-softmax policy: pi(y | x) ∝ exp(theta · phi(x, y)).
struct PolicyParams {
  Eigen::VectorXd theta;

  static PolicyParams zeros(int dim) {
    return PolicyParams{Eigen::VectorXd::Zero(dim)};
  }
  bool all_finite() const { return theta.allFinite(); }
};

// Pretraining-style prior: theta = strength * sum of the skill directions, so
// every prompt starts with the correct answer's logit raised by about
// strength * sqrt(alpha).
PolicyParams prior_params(const FeatureMap& fm, double strength);

Eigen::VectorXd logits(const PolicyParams& params, const FeatureMap& fm,
                       const AnswerSpace& space);

// Softmax over space.answers, in that order.
Eigen::VectorXd action_probs(const PolicyParams& params, const FeatureMap& fm,
                             const AnswerSpace& space);

// Probability of a single label; exactly 0 for labels outside the space
// (including kInfeasible).
double label_prob(const PolicyParams& params, const FeatureMap& fm,
                  const AnswerSpace& space, AnswerId label);

std::vector<AnswerId> sample_rollouts(const PolicyParams& params,
                                      const FeatureMap& fm,
                                      const AnswerSpace& space, int k, Rng& rng);

// phi(x, y) - E_pi[phi(x, .)]; throws DomainError for answers outside the space.
Eigen::VectorXd log_prob_grad(const PolicyParams& params, const FeatureMap& fm,
                              const AnswerSpace& space, AnswerId answer);

}  // namespace olrsim
