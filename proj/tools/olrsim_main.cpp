#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "olrsim/config.hpp"
#include "olrsim/errors.hpp"
#include "olrsim/outputs.hpp"
#include "olrsim/runner.hpp"

namespace {

constexpr const char* kOutDirEnv = "OLRSIM_OUT_DIR";

struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("-c,--config", flags.config_file, "key = value config file");
  for (const auto& key : olrsim::config_keys()) {
    cmd->add_option("--" + key, flags.values[key], "override config key " + key);
  }
}

// File values, then the output-directory environment override, then flags.
olrsim::RunConfig resolve_config(CLI::App* cmd, const ConfigFlags& flags) {
  olrsim::RunConfig cfg;
  if (!flags.config_file.empty()) cfg = olrsim::load_config_file(flags.config_file);
  if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;
  for (const auto& key : olrsim::config_keys()) {
    if (cmd->count("--" + key) > 0) {
      olrsim::set_config_value(cfg, key, flags.values.at(key));
    }
  }
  cfg.validate();
  return cfg;
}

std::string out_dir_or(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return fallback;
}

std::vector<double> parse_reals(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto end = csv.find(',', pos);
    if (end == std::string::npos) end = csv.size();
    const auto item = csv.substr(pos, end - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw olrsim::ConfigError("invalid number '" + item + "' in list");
    }
    pos = end + 1;
  }
  return out;
}

// Either a comma list or a half-open range "a:b".
std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  try {
    if (auto colon = spec.find(':'); colon != std::string::npos) {
      const auto a = std::stoull(spec.substr(0, colon));
      const auto b = std::stoull(spec.substr(colon + 1));
      for (auto s = a; s < b; ++s) out.push_back(s);
    } else {
      for (double v : parse_reals(spec)) out.push_back(static_cast<std::uint64_t>(v));
    }
  } catch (const std::logic_error&) {
    throw olrsim::ConfigError("invalid seed specification '" + spec + "'");
  }
  if (out.empty()) throw olrsim::ConfigError("seed specification selects no seeds");
  return out;
}

int finish_run(const olrsim::RunResult& result, const std::string& out_dir) {
  olrsim::emit_outputs(result, out_dir);
  if (result.failure) {
    const auto& f = *result.failure;
    std::cerr << "olrsim: run aborted at epoch " << f.epoch;
    if (f.prompt_id >= 0) std::cerr << ", prompt " << f.prompt_id;
    std::cerr << " [" << olrsim::to_string(f.category) << "]: " << f.message << "\n";
    return static_cast<int>(f.category);
  }
  std::cout << "wrote " << result.metrics.size() << " epochs to " << out_dir << "\n";
  return 0;
}

nlohmann::json report_json(const olrsim::TheoryReport& t) {
  nlohmann::json j;
  auto num = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(olrsim::format_number(v));
  };
  j["epoch"] = t.epoch;
  j["gamma"] = num(t.gamma);
  j["G_c"] = num(t.G_c);
  j["G_n"] = num(t.G_n);
  j["rho_c"] = num(t.rho_c);
  j["rho_c_kl"] = num(t.rho_c_kl);
  j["rho_c_kl_clamped"] = num(t.rho_c_kl_clamped);
  j["delta_ref"] = num(t.delta_ref);
  j["drift"] = num(t.drift);
  j["mean_L_t"] = num(t.mean_L_t);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"olrsim: simulator for RL with noisy verifiable rewards"};
  app.require_subcommand(1);

  ConfigFlags run_flags;
  auto* run = app.add_subcommand("run", "run one experiment");
  add_config_flags(run, run_flags);

  ConfigFlags sweep_flags;
  std::string rhos = "0,0.25,0.5,0.75,1";
  std::string seeds = "0:20";
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "noise-ratio x seed phase sweep");
  add_config_flags(sweep, sweep_flags);
  sweep->add_option("--rhos", rhos, "comma-separated noise ratios");
  sweep->add_option("--seeds", seeds, "comma list or half-open range a:b");
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");

  std::string probe_manifest_path;
  std::string probe_out;
  int probe_k = 8;
  std::uint64_t probe_seed = 0;
  std::optional<double> probe_delta;
  auto* probe = app.add_subcommand("probe", "theory probes on a recorded run");
  probe->add_option("manifest", probe_manifest_path, "manifest.json")->required();
  probe->add_option("-o,--out", probe_out, "write probe.json here instead of stdout");
  probe->add_option("--K", probe_k, "rollouts per prompt");
  probe->add_option("--probe_seed", probe_seed, "seed for probe rollouts");
  probe->add_option("--delta", probe_delta, "measured replacement rate for the tolerance report");

  std::string replay_manifest_path;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded manifest");
  replay_cmd->add_option("manifest", replay_manifest_path, "manifest.json")->required();
  replay_cmd->add_option("--out_dir", replay_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(olrsim::ErrorCategory::kConfig);
  }

  try {
    if (run->parsed()) {
      const auto cfg = resolve_config(run, run_flags);
      return finish_run(olrsim::run_experiment(cfg), cfg.out_dir);
    }
    if (sweep->parsed()) {
      const auto cfg = resolve_config(sweep, sweep_flags);
      const auto rho_values = parse_reals(rhos);
      const auto seed_values = parse_seeds(seeds);
      const auto table = olrsim::sweep_phase_diagram(cfg, rho_values, seed_values, threads);
      std::filesystem::create_directories(cfg.out_dir);
      const auto path = std::filesystem::path(cfg.out_dir) / "phase.csv";
      olrsim::write_text_file(path, olrsim::phase_csv(table));
      std::cout << "wrote " << table.rows.size() << " rows to " << path.string()
                << " (median rho_c_hat " << olrsim::format_number(table.rho_c_hat) << ")\n";
      return 0;
    }
    if (probe->parsed()) {
      const auto manifest = olrsim::read_json_file(probe_manifest_path);
      const auto report = olrsim::probe_manifest(manifest, probe_k, probe_seed);
      auto j = report_json(report);
      if (probe_delta) {
        const double rho = manifest.at("config").at("rho").get<double>();
        const auto tol = olrsim::tolerance_report(rho, *probe_delta, report.rho_c);
        j["rho_eff"] = tol.rho_eff;
        j["rho_c_olr"] = tol.unbounded ? nlohmann::json("inf") : nlohmann::json(tol.rho_c_olr);
      }
      const std::string text = j.dump(2) + "\n";
      if (probe_out.empty()) {
        std::cout << text;
      } else {
        olrsim::write_text_file(probe_out, text);
      }
      return 0;
    }
    if (replay_cmd->parsed()) {
      const auto manifest = olrsim::read_json_file(replay_manifest_path);
      auto result = olrsim::replay(manifest);
      const auto dir = out_dir_or(replay_out, result.config.out_dir);
      return finish_run(result, dir);
    }
  } catch (const olrsim::Error& e) {
    std::cerr << "olrsim: " << olrsim::to_string(e.category()) << " error: " << e.what()
              << "\n";
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "olrsim: io error: " << e.what() << "\n";
    return static_cast<int>(olrsim::ErrorCategory::kIo);
  }
  return 0;
}
