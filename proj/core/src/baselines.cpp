#include "olrsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "olrsim/errors.hpp"
#include "olrsim/olr.hpp"

namespace olrsim {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kGrpo: return "grpo";
    case Strategy::kOlr: return "olr";
    case Strategy::kTtrl: return "ttrl";
    case Strategy::kRandomSelect: return "random_select";
    case Strategy::kSmallLoss: return "small_loss";
    case Strategy::kConfPenalty: return "conf_penalty";
    case Strategy::kLabelSmooth: return "label_smooth";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view s) {
  for (auto st : {Strategy::kGrpo, Strategy::kOlr, Strategy::kTtrl,
                  Strategy::kRandomSelect, Strategy::kSmallLoss,
                  Strategy::kConfPenalty, Strategy::kLabelSmooth}) {
    if (to_string(st) == s) return st;
  }
  throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

bool is_tabular_analog(Strategy s) {
  return s == Strategy::kConfPenalty || s == Strategy::kLabelSmooth;
}

bool needs_selection_fraction(Strategy s) {
  return s == Strategy::kRandomSelect || s == Strategy::kSmallLoss;
}

AnswerId ttrl_label(std::span<const AnswerId> batch) {
  return majority_answer(batch).answer;
}

namespace {

std::size_t kept_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("selection fraction must lie in (0, 1]");
  }
  const auto k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, n == 0 ? 0 : 1, n);
}

}  // namespace

std::vector<PromptId> random_select(const Dataset& dataset, double fraction,
                                    Rng& rng) {
  const auto keep = kept_count(dataset.size(), fraction);
  std::vector<PromptId> ids;
  ids.reserve(dataset.size());
  for (const auto& p : dataset) ids.push_back(p.prompt_id);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(keep);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double surrogate_loss(const PolicyParams& params, const FeatureMap& fm,
                      const AnswerSpace& space, const RolloutBatch& batch) {
  if (batch.zero_signal()) return 0.0;
  const Eigen::VectorXd p = action_probs(params, fm, space);
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(space.index_of(batch.answers[k]));
    loss -= batch.advantages[k] * std::log(p[i]);
  }
  return loss / static_cast<double>(batch.size());
}

std::vector<std::size_t> small_loss_select(std::span<const double> losses,
                                           double fraction) {
  const auto keep = kept_count(losses.size(), fraction);
  std::vector<std::size_t> idx(losses.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(losses[a]) < std::abs(losses[b]);
  });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

RegularizerTerms entropy_regularizers(Strategy strategy, double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("regulariser coefficient must be >= 0");
  RegularizerTerms t;
  if (strategy == Strategy::kConfPenalty) t.entropy_bonus = lambda;
  if (strategy == Strategy::kLabelSmooth) {
    if (lambda > 1.0) throw ConfigError("label smoothing must lie in [0, 1]");
    t.reward_smoothing = lambda;
  }
  return t;
}

std::vector<double> smooth_rewards(std::span<const double> rewards, double lambda,
                                   std::size_t n_answers) {
  if (n_answers == 0) throw ConfigError("smoothing needs a non-empty answer space");
  std::vector<double> out;
  out.reserve(rewards.size());
  const double floor = lambda / static_cast<double>(n_answers);
  for (double r : rewards) out.push_back((1.0 - lambda) * r + floor);
  return out;
}

}  // namespace olrsim
