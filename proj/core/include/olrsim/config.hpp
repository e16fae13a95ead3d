#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "olrsim/baselines.hpp"
#include "olrsim/dataset.hpp"
#include "olrsim/grpo.hpp"
#include "olrsim/noise.hpp"
#include "olrsim/olr.hpp"

namespace olrsim {

enum class NoiseType { kInactive, kActive };

std::string_view to_string(NoiseType t);
std::string_view to_string(ActiveMode m);

struct RunConfig {
  std::uint64_t seed = 0;

  // Task
  int n_prompts = 200;
  int answers_per_prompt = 5;
  int n_skills = 4;
  double coupling_alpha = 0.5;
  int dim = 32;

  // Rollouts and schedule
  int K = 8;
  int epochs = 20;

  // Noise
  NoiseType noise_type = NoiseType::kActive;
  ActiveMode active_mode = ActiveMode::kDynamicPerEpoch;
  double rho = 0.5;

  Strategy strategy = Strategy::kOlr;

  // Optimiser
  double eta = 0.5;
  double beta = 0.0;
  double clip_eps = 0.2;
  double adv_eps = 1e-6;

  // Label refinement
  double delta_slope = 0.05;
  int warmup_T = 5;
  int trajectory_window = 0;  // 0 keeps the whole history

  // Required for random_select and small_loss, unused otherwise.
  std::optional<double> selection_fraction;
  // Coefficient of conf_penalty / label_smooth.
  double reg_lambda = 0.1;

  // Initial policy theta_0 = prior_strength * sum of skill directions and
  // reference policy theta_ref = ref_scale * theta_0.
  double prior_strength = 0.0;
  double ref_scale = 1.0;

  // Monte-Carlo pairs used to estimate the coupling gamma each epoch.
  int coupling_pairs = 256;

  std::string out_dir = "out";

  void validate() const;

  TaskSpec task_spec() const;
  UpdateConfig update_config() const;
  OlrConfig olr_config() const;
};

// Every key accepted by set_config_value, in manifest order.
const std::vector<std::string>& config_keys();

// Throws ConfigError for unknown keys or unparsable values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

// Flat `key = value` lines; `#` starts a comment; blank lines are ignored.
// Later lines override earlier ones and `base`.
RunConfig parse_config_text(std::string_view text, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

}  // namespace olrsim
