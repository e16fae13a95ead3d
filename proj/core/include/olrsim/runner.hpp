#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "olrsim/config.hpp"
#include "olrsim/dataset.hpp"
#include "olrsim/errors.hpp"
#include "olrsim/grpo.hpp"
#include "olrsim/olr.hpp"
#include "olrsim/policy.hpp"
#include "olrsim/theory.hpp"

namespace olrsim {

// One row per epoch, measured on the rollouts drawn at that epoch, i.e. on
// the policy before that epoch's update. Rates over an empty group are NaN.
struct EpochMetrics {
  int epoch = 0;
  double clean_majority_acc = 0.0;
  double noisy_majority_acc = 0.0;
  double selection_ratio_clean = 0.0;
  double selection_ratio_noisy = 0.0;
  double selected_majority_acc = 0.0;
  double unselected_majority_acc = 0.0;
  double realized_noise = 0.0;
  double initial_noise = 0.0;
  double mean_slope = 0.0;
  double mean_L_t = 0.0;
  double mean_reward = 0.0;
};

struct EventRow {
  int epoch = 0;
  PromptId prompt_id = 0;
  AnswerId majority = 0;
  double pass_rate = 0.0;
  std::optional<double> slope;
  bool consistent = false;
  bool selected = false;
  AnswerId effective_label = 0;
  NoiseClass noise_class = NoiseClass::kClean;
};

struct RunFailure {
  ErrorCategory category = ErrorCategory::kState;
  std::string message;
  int epoch = 0;
  PromptId prompt_id = -1;  // -1 when no single prompt is to blame
};

struct RunResult {
  RunConfig config;
  FeatureMap features;
  Dataset initial_dataset;  // after noise injection
  Dataset final_dataset;
  PolicyParams reference;
  // theta_history[t] is the policy after t updates.
  std::vector<Eigen::VectorXd> theta_history;
  std::vector<EpochMetrics> metrics;
  std::vector<TheoryReport> theory;
  std::vector<EventRow> events;
  std::vector<MajorityTrajectory> trajectories;
  // Active-dynamic relabelling: (epoch, new label) per prompt.
  std::map<PromptId, std::vector<std::pair<int, AnswerId>>> label_history;
  std::optional<RunFailure> failure;

  const Eigen::VectorXd& final_theta() const { return theta_history.back(); }
  bool completed() const { return !failure.has_value(); }
};

struct RunObserver {
  // Called before each update with the batches entering the update and their
  // per-prompt gradient contributions, index-aligned.
  std::function<void(int epoch, std::span<const RolloutBatch>,
                     std::span<const Eigen::VectorXd>)>
      on_contributions;
};

// Errors raised inside the epoch loop are captured in RunResult::failure with
// everything recorded up to that point kept. Config errors still throw.
RunResult run_experiment(const RunConfig& cfg, const RunObserver* observer = nullptr);

// Mean log-ratio over prompts carrying an active noisy label; NaN if none.
double mean_log_ratio(const PolicyParams& params, const FeatureMap& fm,
                      const Dataset& dataset);

// Mean of the finite per-epoch critical ratios over the first warmup_T rows.
double warmup_critical_ratio(const RunResult& result);

struct PhaseRow {
  double rho = 0.0;
  std::uint64_t seed = 0;
  double L_0 = 0.0;
  double L_T = 0.0;
  double noisy_majority_acc = 0.0;  // final epoch
  double rho_c_hat = 0.0;           // warmup-averaged, this run
};

struct PhaseTable {
  std::vector<PhaseRow> rows;
  double rho_c_hat = 0.0;  // median over rows with a finite estimate
};

// Cells are independent and run in parallel; row order is rho-major and does
// not depend on scheduling. Runs without active noisy labels measure the
// log-ratio against each prompt's most likely wrong answer under theta_0.
PhaseTable sweep_phase_diagram(const RunConfig& base, std::span<const double> rho_values,
                               std::span<const std::uint64_t> seeds,
                               unsigned threads = 0);

// Re-runs the experiment recorded in a manifest. Throws StateError if the
// regenerated dataset differs from the recorded one.
RunResult replay(const nlohmann::json& manifest);

// Theory quantities at the final policy of a recorded run, measured on fresh
// rollouts (K per prompt) from the "probe" stream of `probe_seed`, against
// the final training labels.
TheoryReport probe_manifest(const nlohmann::json& manifest, int K,
                            std::uint64_t probe_seed);

}  // namespace olrsim
