#include "olrsim/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "olrsim/errors.hpp"

namespace olrsim {

bool RolloutBatch::zero_signal() const {
  return std::all_of(advantages.begin(), advantages.end(),
                     [](double a) { return a == 0.0; });
}

void RolloutBatch::validate() const {
  if (answers.empty()) throw ConfigError("rollout batch is empty");
  if (rewards.size() != answers.size() || advantages.size() != answers.size()) {
    throw ConfigError("rollout batch of prompt " + std::to_string(prompt_id) +
                      " has mismatched lengths");
  }
}

void UpdateConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(clip_eps > 0.0)) throw ConfigError("clip_eps must be > 0");
  if (!(adv_eps > 0.0)) throw ConfigError("adv_eps must be > 0");
  if (!(entropy_bonus >= 0.0)) throw ConfigError("entropy bonus must be >= 0");
}

int verify_reward(AnswerId answer, AnswerId effective_label) {
  if (effective_label == kInfeasible) return 0;
  return answer == effective_label ? 1 : 0;
}

std::vector<double> rewards_for(std::span<const AnswerId> answers,
                                AnswerId effective_label) {
  std::vector<double> r;
  r.reserve(answers.size());
  for (AnswerId a : answers) r.push_back(verify_reward(a, effective_label));
  return r;
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double adv_eps) {
  if (rewards.empty()) throw ConfigError("advantage group is empty");
  if (!(adv_eps > 0.0)) throw ConfigError("adv_eps must be > 0");
  const bool all_equal =
      std::all_of(rewards.begin(), rewards.end(),
                  [&](double r) { return r == rewards.front(); });
  if (all_equal) return std::vector<double>(rewards.size(), 0.0);

  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double denom = std::sqrt(var) + adv_eps;

  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / denom);
  return out;
}

RolloutBatch make_batch(PromptId prompt_id, int epoch,
                        std::vector<AnswerId> answers,
                        std::vector<double> rewards, double adv_eps) {
  RolloutBatch b;
  b.prompt_id = prompt_id;
  b.epoch = epoch;
  b.answers = std::move(answers);
  b.rewards = std::move(rewards);
  b.advantages = group_advantages(b.rewards, adv_eps);
  b.validate();
  return b;
}

double kl_to_reference(const PolicyParams& params, const PolicyParams& ref_params,
                       const FeatureMap& fm, const AnswerSpace& space) {
  const Eigen::VectorXd p = action_probs(params, fm, space);
  const Eigen::VectorXd q = action_probs(ref_params, fm, space);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return kl;
}

double policy_entropy(const PolicyParams& params, const FeatureMap& fm,
                      const AnswerSpace& space) {
  const Eigen::VectorXd p = action_probs(params, fm, space);
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

namespace {

double total_rollouts(std::span<const RolloutBatch> batches) {
  double n = 0.0;
  for (const auto& b : batches) n += static_cast<double>(b.size());
  return n;
}

double clipped_term(double advantage, double ratio, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(advantage * ratio, advantage * clipped);
}

// Gradient of the pessimistic clipped term is A * ratio * grad log pi unless the
// clipped branch is the active minimum, where it is zero.
bool clip_passes_gradient(double advantage, double ratio, double eps) {
  if (advantage > 0.0) return ratio <= 1.0 + eps;
  if (advantage < 0.0) return ratio >= 1.0 - eps;
  return false;
}

struct PromptView {
  const AnswerSpace* space;
  Eigen::VectorXd probs;
  Eigen::VectorXd old_probs;
};

PromptView view_of(const PolicyParams& params, const PolicyParams& old_params,
                   const FeatureMap& fm, const Dataset& dataset,
                   const RolloutBatch& b) {
  const auto& space = prompt_of(dataset, b.prompt_id).space;
  return PromptView{&space, action_probs(params, fm, space),
                    action_probs(old_params, fm, space)};
}

}  // namespace

double surrogate_objective(const PolicyParams& params,
                           const PolicyParams& old_params,
                           const PolicyParams& ref_params, const FeatureMap& fm,
                           const Dataset& dataset,
                           std::span<const RolloutBatch> batches,
                           const UpdateConfig& cfg) {
  const double n = total_rollouts(batches);
  double total = 0.0;
  for (const auto& b : batches) {
    b.validate();
    const auto v = view_of(params, old_params, fm, dataset, b);
    double sum = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(v.space->index_of(b.answers[k]));
      const double ratio = v.probs[i] / v.old_probs[i];
      sum += clipped_term(b.advantages[k], ratio, cfg.clip_eps);
    }
    const double w = static_cast<double>(b.size());
    if (cfg.beta != 0.0) {
      sum -= w * cfg.beta * kl_to_reference(params, ref_params, fm, *v.space);
    }
    if (cfg.entropy_bonus != 0.0) {
      sum += w * cfg.entropy_bonus * policy_entropy(params, fm, *v.space);
    }
    total += sum;
  }
  return n > 0.0 ? total / n : 0.0;
}

std::vector<Eigen::VectorXd> gradient_contributions(
    const PolicyParams& params, const PolicyParams& old_params,
    const PolicyParams& ref_params, const FeatureMap& fm, const Dataset& dataset,
    std::span<const RolloutBatch> batches, const UpdateConfig& cfg) {
  const double n = total_rollouts(batches);
  std::vector<Eigen::VectorXd> out;
  out.reserve(batches.size());

  for (const auto& b : batches) {
    b.validate();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(params.theta.size());
    const bool needs_policy =
        !b.zero_signal() || cfg.beta != 0.0 || cfg.entropy_bonus != 0.0;
    if (!needs_policy) {
      out.push_back(std::move(g));
      continue;
    }

    const auto v = view_of(params, old_params, fm, dataset, b);
    const auto& m = fm.features(b.prompt_id);
    const Eigen::VectorXd mean_phi = m.transpose() * v.probs;

    for (std::size_t k = 0; k < b.size(); ++k) {
      const double a = b.advantages[k];
      if (a == 0.0) continue;
      const auto i = static_cast<Eigen::Index>(v.space->index_of(b.answers[k]));
      const double ratio = v.probs[i] / v.old_probs[i];
      if (!clip_passes_gradient(a, ratio, cfg.clip_eps)) continue;
      g += (a * ratio) * (m.row(i).transpose() - mean_phi);
    }

    const double w = static_cast<double>(b.size());
    if (cfg.beta != 0.0 || cfg.entropy_bonus != 0.0) {
      // d/dtheta sum_y pi_y c_y with c_y = log pi_y - log ref_y (KL) or
      // -log pi_y (entropy) is sum_y pi_y (phi_y - mean_phi) c_y.
      const Eigen::VectorXd ref = action_probs(ref_params, fm, *v.space);
      Eigen::VectorXd weights(v.probs.size());
      for (Eigen::Index y = 0; y < v.probs.size(); ++y) {
        if (v.probs[y] == 0.0) {
          weights[y] = 0.0;
          continue;
        }
        const double logp = std::log(v.probs[y]);
        weights[y] = v.probs[y] * (-cfg.beta * (logp - std::log(ref[y])) -
                                   cfg.entropy_bonus * logp);
      }
      g += w * (m.transpose() * weights - weights.sum() * mean_phi);
    }

    g /= n;
    out.push_back(std::move(g));
  }
  return out;
}

Eigen::VectorXd surrogate_gradient(const PolicyParams& params,
                                   const PolicyParams& old_params,
                                   const PolicyParams& ref_params,
                                   const FeatureMap& fm, const Dataset& dataset,
                                   std::span<const RolloutBatch> batches,
                                   const UpdateConfig& cfg) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(params.theta.size());
  for (const auto& g : gradient_contributions(params, old_params, ref_params, fm,
                                              dataset, batches, cfg)) {
    total += g;
  }
  return total;
}

PolicyParams grpo_update(const PolicyParams& params,
                         const PolicyParams& old_params,
                         const PolicyParams& ref_params, const FeatureMap& fm,
                         const Dataset& dataset,
                         std::span<const RolloutBatch> batches,
                         const UpdateConfig& cfg) {
  cfg.validate();
  if (batches.empty()) throw ConfigError("grpo_update needs at least one batch");
  const auto parts = gradient_contributions(params, old_params, ref_params, fm,
                                            dataset, batches, cfg);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(params.theta.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i].allFinite()) {
      throw UpdateError("non-finite gradient contribution from prompt " +
                            std::to_string(batches[i].prompt_id),
                        batches[i].prompt_id);
    }
    total += parts[i];
  }
  PolicyParams next{params.theta + cfg.eta * total};
  if (!next.all_finite()) {
    throw UpdateError("policy update produced non-finite parameters",
                      batches.front().prompt_id);
  }
  return next;
}

}  // namespace olrsim
