#pragma once

#include <map>
#include <vector>

#include "olrsim/dataset.hpp"
#include "olrsim/policy.hpp"
#include "olrsim/rng.hpp"

namespace olrsim {

enum class ActiveMode { kStaticAtStart, kDynamicPerEpoch };

// Number of prompts that receive a noisy label: rho * n rounded to nearest,
// halves away from zero. Throws ConfigError unless rho lies in [0, 1].
int noisy_count(int n_prompts, double rho);

// Uniform choice of noisy_count(n, rho) prompt ids, returned sorted.
std::vector<PromptId> choose_noisy_prompts(const Dataset& dataset, double rho,
                                           Rng& rng);

// Replaces the label of a uniformly chosen rho-fraction of prompts with the
// infeasible sentinel. The input must be all-clean.
Dataset inject_inactive_noise(const Dataset& dataset, double rho, Rng& rng);

// Designates a rho-fraction of prompts as actively noisy and draws each label
// once from pi_theta restricted to the wrong answers. This is the whole of
// StaticAtStart and the initial assignment of DynamicPerEpoch.
Dataset inject_active_noise(const Dataset& dataset, double rho,
                            const PolicyParams& params, const FeatureMap& fm,
                            Rng& rng);

// DynamicPerEpoch refresh: every Active prompt takes the most frequent wrong
// answer among this epoch's rollouts (ties to the smallest id). If all of its
// rollouts are correct the previous label is kept. Prompts without rollouts in
// the map are left untouched.
Dataset refresh_active_noise(
    const Dataset& dataset,
    const std::map<PromptId, std::vector<AnswerId>>& rollouts);

// Definitions of rollout feasibility applied to a single label.
NoiseClass classify_label(const PolicyParams& params, const FeatureMap& fm,
                          const AnswerSpace& space, AnswerId label);

// Fraction of prompts whose effective label differs from the true answer.
// Every prompt must have an entry.
double measure_realized_noise(const Dataset& dataset,
                              const std::map<PromptId, AnswerId>& effective_labels);

}  // namespace olrsim
