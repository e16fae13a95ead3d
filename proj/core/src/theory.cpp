#include "olrsim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "olrsim/errors.hpp"

namespace olrsim {

double log_ratio(const PolicyParams& params, const FeatureMap& fm,
                 const LabeledPrompt& prompt) {
  if (prompt.train_label == kInfeasible || !prompt.space.contains(prompt.train_label)) {
    throw UndefinedError("log-ratio undefined for prompt " +
                         std::to_string(prompt.prompt_id) +
                         ": its label has zero rollout probability");
  }
  // Logit difference avoids log(0) when probabilities underflow.
  const Eigen::VectorXd z = logits(params, fm, prompt.space);
  const auto i = static_cast<Eigen::Index>(prompt.space.index_of(prompt.space.true_answer));
  const auto j = static_cast<Eigen::Index>(prompt.space.index_of(prompt.train_label));
  return z[i] - z[j];
}

double reference_log_ratio(const PolicyParams& ref_params, const FeatureMap& fm,
                           const LabeledPrompt& prompt) {
  return log_ratio(ref_params, fm, prompt);
}

double measure_coupling(const PolicyParams& params, const FeatureMap& fm,
                        const Dataset& dataset, std::span<const PromptId> clean,
                        std::span<const PromptId> noisy, int n_pairs, Rng& rng) {
  if (clean.empty() || noisy.empty()) {
    throw UndefinedError("coupling needs at least one clean and one noisy prompt");
  }
  if (n_pairs < 1) throw ConfigError("coupling needs n_pairs >= 1");

  auto score = [&](PromptId id) {
    const auto& sp = prompt_of(dataset, id).space;
    return log_prob_grad(params, fm, sp, sp.true_answer);
  };
  // Gradients are cached per prompt; pairs only index into the cache.
  std::map<PromptId, Eigen::VectorXd> cache;
  auto cached = [&](PromptId id) -> const Eigen::VectorXd& {
    auto it = cache.find(id);
    if (it == cache.end()) it = cache.emplace(id, score(id)).first;
    return it->second;
  };

  std::uniform_int_distribution<std::size_t> pick_c(0, clean.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_n(0, noisy.size() - 1);
  double sum = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const PromptId c = clean[pick_c(rng)];
    const PromptId n = noisy[pick_n(rng)];
    sum += cached(c).dot(cached(n));
  }
  return sum / static_cast<double>(n_pairs);
}

AdvantageMagnitudes advantage_magnitudes(std::span<const RolloutBatch> batches,
                                         const Dataset& dataset) {
  double sum_c = 0.0;
  double sum_n = 0.0;
  int n_c = 0;
  int n_n = 0;
  for (const auto& b : batches) {
    if (b.advantages.empty()) continue;
    double m = 0.0;
    for (double a : b.advantages) m += std::abs(a);
    m /= static_cast<double>(b.advantages.size());
    if (prompt_of(dataset, b.prompt_id).is_noisy()) {
      sum_n += m;
      ++n_n;
    } else {
      sum_c += m;
      ++n_c;
    }
  }
  return {n_c > 0 ? sum_c / n_c : 0.0, n_n > 0 ? sum_n / n_n : 0.0};
}

double critical_ratio(double gamma, double G_c, double G_n) {
  if (gamma < 0.0 || G_c < 0.0 || G_n < 0.0) {
    throw UndefinedError("critical ratio needs non-negative gamma, G_c, G_n");
  }
  const double den = gamma * G_c + G_n;
  if (den == 0.0) throw UndefinedError("critical ratio has a zero denominator");
  return gamma * G_c / den;
}

KlCriticalRatio critical_ratio_kl(double gamma, double G_c, double G_n,
                                  double beta, double delta_ref) {
  const double den = G_n + gamma * G_c;
  if (!(den > 0.0)) {
    throw UndefinedError("KL critical ratio needs a positive denominator");
  }
  const double raw = (gamma * G_c - beta * delta_ref) / den;
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

double drift(double gamma, double rho, double G_c, double G_n) {
  return gamma * (1.0 - rho) * G_c - rho * G_n;
}

ToleranceReport tolerance_report(double rho, double delta_hat, double rho_c) {
  if (!(delta_hat >= 0.0 && delta_hat <= 1.0)) {
    throw ConfigError("replacement probability must lie in [0, 1]");
  }
  ToleranceReport r;
  r.rho_eff = rho * (1.0 - delta_hat);
  if (delta_hat == 1.0) {
    r.rho_c_olr = std::numeric_limits<double>::infinity();
    r.unbounded = true;
  } else {
    r.rho_c_olr = rho_c / (1.0 - delta_hat);
  }
  return r;
}

std::vector<ConcentrationRow> concentration_probe(
    const PolicyParams& params, const FeatureMap& fm, const LabeledPrompt& prompt,
    std::span<const int> k_values, int trials, Rng& rng, double adv_eps) {
  if (trials < 100) throw ConfigError("concentration probe needs >= 100 trials");
  const AnswerId label = prompt.train_label;
  const double p = label_prob(params, fm, prompt.space, label);
  const double sigma = std::sqrt(p * (1.0 - p));

  std::vector<ConcentrationRow> rows;
  for (int k : k_values) {
    if (k < 1) throw ConfigError("concentration probe needs K >= 1");
    double sum = 0.0;
    double sum_sq = 0.0;
    double count = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto answers = sample_rollouts(params, fm, prompt.space, k, rng);
      const auto r = rewards_for(answers, label);
      const auto a_hat = group_advantages(r, adv_eps);
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double exact = (r[i] - p) / (sigma + adv_eps);
        const double e = a_hat[i] - exact;
        sum += e;
        sum_sq += e * e;
        count += 1.0;
      }
    }
    const double mean = sum / count;
    const double var = std::max(0.0, sum_sq / count - mean * mean);
    rows.push_back({k, std::sqrt(var)});
  }
  return rows;
}

}  // namespace olrsim
