#pragma once

#include <map>
#include <span>
#include <vector>

#include "olrsim/dataset.hpp"
#include "olrsim/grpo.hpp"
#include "olrsim/policy.hpp"
#include "olrsim/rng.hpp"

namespace olrsim {

// Phase-boundary quantities measured on one policy snapshot. Undefined
// entries are NaN (e.g. no noisy prompts to couple with).
struct TheoryReport {
  int epoch = 0;
  double gamma = 0.0;
  double G_c = 0.0;
  double G_n = 0.0;
  double rho_c = 0.0;
  double rho_c_kl = 0.0;
  double rho_c_kl_clamped = 0.0;
  double delta_ref = 0.0;
  double drift = 0.0;
  double mean_L_t = 0.0;
  std::map<PromptId, double> log_ratios;
};

// log(pi(y*|x) / pi(label|x)) for the prompt's training label. Throws
// UndefinedError when the label has zero probability (inactive noise).
double log_ratio(const PolicyParams& params, const FeatureMap& fm,
                 const LabeledPrompt& prompt);

// Mean of grad log pi(y*|x_c) . grad log pi(y*|x_n) over `n_pairs` pairs drawn
// uniformly with replacement from clean x noisy.
double measure_coupling(const PolicyParams& params, const FeatureMap& fm,
                        const Dataset& dataset, std::span<const PromptId> clean,
                        std::span<const PromptId> noisy, int n_pairs, Rng& rng);

struct AdvantageMagnitudes {
  double clean = 0.0;  // G_c
  double noisy = 0.0;  // G_n
};

// Mean over prompts of the batch mean |A|, split by the prompt's noise class.
// A group without batches reports 0.
AdvantageMagnitudes advantage_magnitudes(std::span<const RolloutBatch> batches,
                                         const Dataset& dataset);

// gamma * G_c / (gamma * G_c + G_n). Throws UndefinedError on a zero
// denominator or negative inputs.
double critical_ratio(double gamma, double G_c, double G_n);

struct KlCriticalRatio {
  double raw = 0.0;
  double clamped = 0.0;  // raw clamped to [0, 1]
};

// (gamma * G_c - beta * delta_ref) / (G_n + gamma * G_c).
KlCriticalRatio critical_ratio_kl(double gamma, double G_c, double G_n,
                                  double beta, double delta_ref);

// Mean drift of the noisy log-ratio: gamma (1 - rho) G_c - rho G_n.
double drift(double gamma, double rho, double G_c, double G_n);

struct ToleranceReport {
  double rho_eff = 0.0;
  double rho_c_olr = 0.0;  // +inf when every noisy label is replaced
  bool unbounded = false;
};

// rho_eff = rho (1 - delta), rho_c^OLR = rho_c / (1 - delta) for a measured
// replacement probability delta in [0, 1].
ToleranceReport tolerance_report(double rho, double delta_hat, double rho_c);

// log(pi_ref(y*|x) / pi_ref(label|x)) under the reference policy.
double reference_log_ratio(const PolicyParams& ref_params, const FeatureMap& fm,
                           const LabeledPrompt& prompt);

struct ConcentrationRow {
  int k = 0;
  double error_std = 0.0;
};

// Monte-Carlo spread of the K-sample group advantage around the advantage
// computed from the exact pass probability p = pi(label|x):
//   A(r) = (r - p) / (sqrt(p (1 - p)) + adv_eps).
// Errors of every rollout in every trial are pooled.
std::vector<ConcentrationRow> concentration_probe(
    const PolicyParams& params, const FeatureMap& fm, const LabeledPrompt& prompt,
    std::span<const int> k_values, int trials, Rng& rng, double adv_eps = 1e-6);

}  // namespace olrsim
