#include "olrsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "olrsim/errors.hpp"
#include "olrsim/rng.hpp"

namespace olrsim {

std::string_view to_string(NoiseType t) {
  return t == NoiseType::kInactive ? "inactive" : "active";
}

std::string_view to_string(ActiveMode m) {
  return m == ActiveMode::kStaticAtStart ? "static" : "dynamic";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" +
                    std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, value);
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  const double v = parse_number<double>(key, value);
  if (!std::isfinite(v)) bad_value(key, value);
  return v;
}

std::string fmt_real(double v) {
  // Shortest form that round-trips through from_chars.
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "seed",           "n_prompts",      "answers_per_prompt", "n_skills",
      "coupling_alpha", "dim",            "K",                  "epochs",
      "noise_type",     "active_mode",    "rho",                "strategy",
      "eta",            "beta",           "clip_eps",           "adv_eps",
      "delta_slope",    "warmup_T",       "trajectory_window",  "selection_fraction",
      "reg_lambda",     "prior_strength", "ref_scale",          "coupling_pairs",
      "out_dir"};
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view raw) {
  const auto value = trim(raw);
  if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "n_prompts") cfg.n_prompts = parse_number<int>(key, value);
  else if (key == "answers_per_prompt") cfg.answers_per_prompt = parse_number<int>(key, value);
  else if (key == "n_skills") cfg.n_skills = parse_number<int>(key, value);
  else if (key == "coupling_alpha") cfg.coupling_alpha = parse_real(key, value);
  else if (key == "dim") cfg.dim = parse_number<int>(key, value);
  else if (key == "K") cfg.K = parse_number<int>(key, value);
  else if (key == "epochs") cfg.epochs = parse_number<int>(key, value);
  else if (key == "noise_type") {
    if (value == "inactive") cfg.noise_type = NoiseType::kInactive;
    else if (value == "active") cfg.noise_type = NoiseType::kActive;
    else bad_value(key, value);
  } else if (key == "active_mode") {
    if (value == "static") cfg.active_mode = ActiveMode::kStaticAtStart;
    else if (value == "dynamic") cfg.active_mode = ActiveMode::kDynamicPerEpoch;
    else bad_value(key, value);
  } else if (key == "rho") cfg.rho = parse_real(key, value);
  else if (key == "strategy") cfg.strategy = strategy_from_string(value);
  else if (key == "eta") cfg.eta = parse_real(key, value);
  else if (key == "beta") cfg.beta = parse_real(key, value);
  else if (key == "clip_eps") cfg.clip_eps = parse_real(key, value);
  else if (key == "adv_eps") cfg.adv_eps = parse_real(key, value);
  else if (key == "delta_slope") cfg.delta_slope = parse_real(key, value);
  else if (key == "warmup_T") cfg.warmup_T = parse_number<int>(key, value);
  else if (key == "trajectory_window") cfg.trajectory_window = parse_number<int>(key, value);
  else if (key == "selection_fraction") {
    if (value.empty() || value == "none") cfg.selection_fraction.reset();
    else cfg.selection_fraction = parse_real(key, value);
  } else if (key == "reg_lambda") cfg.reg_lambda = parse_real(key, value);
  else if (key == "prior_strength") cfg.prior_strength = parse_real(key, value);
  else if (key == "ref_scale") cfg.ref_scale = parse_real(key, value);
  else if (key == "coupling_pairs") cfg.coupling_pairs = parse_number<int>(key, value);
  else if (key == "out_dir") cfg.out_dir = std::string(value);
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

RunConfig parse_config_text(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

void RunConfig::validate() const {
  task_spec().validate();
  update_config().validate();
  olr_config().validate();
  if (K < 1) throw ConfigError("K must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  if (trajectory_window < 0) throw ConfigError("trajectory_window must be >= 0");
  if (trajectory_window == 1) {
    throw ConfigError("trajectory_window must be 0 (unbounded) or >= 2");
  }
  if (coupling_pairs < 1) throw ConfigError("coupling_pairs must be >= 1");
  if (!(reg_lambda >= 0.0)) throw ConfigError("reg_lambda must be >= 0");
  if (strategy == Strategy::kLabelSmooth && reg_lambda > 1.0) {
    throw ConfigError("label smoothing needs reg_lambda <= 1");
  }
  if (needs_selection_fraction(strategy)) {
    if (!selection_fraction) {
      throw ConfigError("strategy " + std::string(to_string(strategy)) +
                        " requires selection_fraction");
    }
  }
  if (selection_fraction && !(*selection_fraction > 0.0 && *selection_fraction <= 1.0)) {
    throw ConfigError("selection_fraction must lie in (0, 1]");
  }
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

TaskSpec RunConfig::task_spec() const {
  return TaskSpec{n_prompts, answers_per_prompt, n_skills, coupling_alpha, dim,
                  derive_seed(seed, "dataset")};
}

UpdateConfig RunConfig::update_config() const {
  UpdateConfig u;
  u.eta = eta;
  u.beta = beta;
  u.clip_eps = clip_eps;
  u.adv_eps = adv_eps;
  return u;
}

OlrConfig RunConfig::olr_config() const { return OlrConfig{delta_slope, warmup_T}; }

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["n_prompts"] = c.n_prompts;
  j["answers_per_prompt"] = c.answers_per_prompt;
  j["n_skills"] = c.n_skills;
  j["coupling_alpha"] = c.coupling_alpha;
  j["dim"] = c.dim;
  j["K"] = c.K;
  j["epochs"] = c.epochs;
  j["noise_type"] = std::string(to_string(c.noise_type));
  j["active_mode"] = std::string(to_string(c.active_mode));
  j["rho"] = c.rho;
  j["strategy"] = std::string(to_string(c.strategy));
  j["eta"] = c.eta;
  j["beta"] = c.beta;
  j["clip_eps"] = c.clip_eps;
  j["adv_eps"] = c.adv_eps;
  j["delta_slope"] = c.delta_slope;
  j["warmup_T"] = c.warmup_T;
  j["trajectory_window"] = c.trajectory_window;
  j["selection_fraction"] =
      c.selection_fraction ? nlohmann::json(*c.selection_fraction) : nlohmann::json(nullptr);
  j["reg_lambda"] = c.reg_lambda;
  j["prior_strength"] = c.prior_strength;
  j["ref_scale"] = c.ref_scale;
  j["coupling_pairs"] = c.coupling_pairs;
  j["out_dir"] = c.out_dir;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (v.is_null()) set_config_value(c, key, "none");
    else if (v.is_string()) set_config_value(c, key, v.get<std::string>());
    else if (v.is_number_float()) set_config_value(c, key, fmt_real(v.get<double>()));
    else set_config_value(c, key, v.dump());
  }
  return c;
}

}  // namespace olrsim
