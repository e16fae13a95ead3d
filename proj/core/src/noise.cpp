#include "olrsim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "olrsim/errors.hpp"

namespace olrsim {

namespace {

void require_clean(const Dataset& dataset) {
  for (const auto& p : dataset) {
    if (p.noise_class != NoiseClass::kClean) {
      throw ConfigError("noise injection expects an all-clean dataset; prompt " +
                        std::to_string(p.prompt_id) + " is already noisy");
    }
  }
}

}  // namespace

int noisy_count(int n_prompts, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw ConfigError("noise ratio rho must lie in [0, 1]");
  }
  return static_cast<int>(std::lround(rho * static_cast<double>(n_prompts)));
}

std::vector<PromptId> choose_noisy_prompts(const Dataset& dataset, double rho,
                                           Rng& rng) {
  const int count = noisy_count(static_cast<int>(dataset.size()), rho);
  std::vector<PromptId> ids;
  ids.reserve(dataset.size());
  for (const auto& p : dataset) ids.push_back(p.prompt_id);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(static_cast<std::size_t>(count));
  std::sort(ids.begin(), ids.end());
  return ids;
}

Dataset inject_inactive_noise(const Dataset& dataset, double rho, Rng& rng) {
  require_clean(dataset);
  Dataset out = dataset;
  for (PromptId id : choose_noisy_prompts(dataset, rho, rng)) {
    for (auto& p : out) {
      if (p.prompt_id != id) continue;
      p.train_label = kInfeasible;
      p.noise_class = NoiseClass::kInactive;
    }
  }
  return out;
}

Dataset inject_active_noise(const Dataset& dataset, double rho,
                            const PolicyParams& params, const FeatureMap& fm,
                            Rng& rng) {
  require_clean(dataset);
  Dataset out = dataset;
  const auto chosen = choose_noisy_prompts(dataset, rho, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (PromptId id : chosen) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const LabeledPrompt& p) { return p.prompt_id == id; });
    auto& p = *it;
    if (p.space.size() < 2) {
      throw ConfigError("prompt " + std::to_string(id) +
                        " has no wrong answer to host active noise");
    }
    const Eigen::VectorXd probs = action_probs(params, fm, p.space);
    std::vector<AnswerId> wrong;
    std::vector<double> weight;
    for (std::size_t i = 0; i < p.space.size(); ++i) {
      if (p.space.answers[i] == p.space.true_answer) continue;
      wrong.push_back(p.space.answers[i]);
      weight.push_back(probs[static_cast<Eigen::Index>(i)]);
    }
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    AnswerId label = wrong.back();
    if (total > 0.0) {
      const double u = unif(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < wrong.size(); ++i) {
        acc += weight[i];
        if (u < acc) {
          label = wrong[i];
          break;
        }
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, wrong.size() - 1);
      label = wrong[pick(rng)];
    }
    p.train_label = label;
    p.noise_class = NoiseClass::kActive;
  }
  return out;
}

Dataset refresh_active_noise(
    const Dataset& dataset,
    const std::map<PromptId, std::vector<AnswerId>>& rollouts) {
  Dataset out = dataset;
  for (auto& p : out) {
    if (p.noise_class != NoiseClass::kActive) continue;
    auto it = rollouts.find(p.prompt_id);
    if (it == rollouts.end()) continue;
    std::map<AnswerId, int> counts;
    for (AnswerId a : it->second) {
      if (a != p.space.true_answer) ++counts[a];
    }
    if (counts.empty()) continue;  // all correct: keep the previous label
    AnswerId best = counts.begin()->first;
    int best_count = counts.begin()->second;
    for (const auto& [a, c] : counts) {
      if (c > best_count) {
        best = a;
        best_count = c;
      }
    }
    p.train_label = best;
  }
  return out;
}

NoiseClass classify_label(const PolicyParams& params, const FeatureMap& fm,
                          const AnswerSpace& space, AnswerId label) {
  if (label == space.true_answer) return NoiseClass::kClean;
  if (label_prob(params, fm, space, label) > 0.0) return NoiseClass::kActive;
  return NoiseClass::kInactive;
}

double measure_realized_noise(const Dataset& dataset,
                              const std::map<PromptId, AnswerId>& effective_labels) {
  if (dataset.empty()) return 0.0;
  int wrong = 0;
  for (const auto& p : dataset) {
    auto it = effective_labels.find(p.prompt_id);
    if (it == effective_labels.end()) {
      throw DomainError("no effective label for prompt " +
                        std::to_string(p.prompt_id));
    }
    if (it->second != p.space.true_answer) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(dataset.size());
}

}  // namespace olrsim
