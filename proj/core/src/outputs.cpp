#include "olrsim/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "olrsim/serialization.hpp"

#ifndef OLRSIM_VERSION
#define OLRSIM_VERSION "0.0.0"
#endif

namespace olrsim {

namespace fs = std::filesystem;
using nlohmann::json;

const char* library_version() { return OLRSIM_VERSION; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

void append_row(std::string& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
}

std::string fmt_int(long long v) { return std::to_string(v); }

}  // namespace

std::string metrics_csv(const RunResult& r) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (std::size_t i = 0; i < r.metrics.size(); ++i) {
    const auto& m = r.metrics[i];
    const auto& t = r.theory[i];
    append_row(out, {fmt_int(m.epoch), format_number(m.clean_majority_acc),
                     format_number(m.noisy_majority_acc),
                     format_number(m.selection_ratio_clean),
                     format_number(m.selection_ratio_noisy),
                     format_number(m.selected_majority_acc),
                     format_number(m.unselected_majority_acc),
                     format_number(m.realized_noise), format_number(m.initial_noise),
                     format_number(m.mean_slope), format_number(m.mean_L_t),
                     format_number(m.mean_reward), format_number(t.gamma),
                     format_number(t.G_c), format_number(t.G_n), format_number(t.rho_c),
                     format_number(t.rho_c_kl), format_number(t.drift)});
  }
  return out;
}

std::string events_csv(const RunResult& r) {
  std::string out(kEventsHeader);
  out += '\n';
  for (const auto& e : r.events) {
    append_row(out, {fmt_int(e.epoch), fmt_int(e.prompt_id), fmt_int(e.majority),
                     format_number(e.pass_rate),
                     e.slope ? format_number(*e.slope) : std::string("nan"),
                     e.consistent ? "1" : "0", e.selected ? "1" : "0",
                     label_to_string(e.effective_label),
                     std::string(to_string(e.noise_class))});
  }
  return out;
}

json build_manifest(const RunResult& r) {
  json m;
  m["library"] = {{"name", "olrsim"}, {"version", library_version()}};
  m["config"] = config_to_json(r.config);
  m["strategy_is_tabular_analog"] = is_tabular_analog(r.config.strategy);
  m["dataset"] = dataset_to_json(r.initial_dataset);
  m["features"] = features_to_json(r.features);

  json noise = json::array();
  for (std::size_t i = 0; i < r.initial_dataset.size(); ++i) {
    const auto& p0 = r.initial_dataset[i];
    if (!p0.is_noisy()) continue;
    json history = json::array();
    if (auto it = r.label_history.find(p0.prompt_id); it != r.label_history.end()) {
      for (const auto& [epoch, label] : it->second) history.push_back({epoch, label});
    }
    const auto& pf = i < r.final_dataset.size() ? r.final_dataset[i] : p0;
    noise.push_back({{"prompt_id", p0.prompt_id},
                     {"noise_class", std::string(to_string(p0.noise_class))},
                     {"initial_label", label_to_string(p0.train_label)},
                     {"final_label", label_to_string(pf.train_label)},
                     {"relabels", std::move(history)}});
  }
  m["noise_assignment"] = std::move(noise);

  json trajs = json::array();
  for (const auto& t : r.trajectories) trajs.push_back(trajectory_to_json(t));
  m["trajectories"] = std::move(trajs);

  m["reference_theta"] = params_to_json(r.reference);
  m["initial_theta"] = vector_to_json(r.theta_history.front());
  m["final_theta"] = vector_to_json(r.final_theta());
  m["epochs_completed"] = static_cast<int>(r.theta_history.size()) - 1;
  if (r.failure) {
    m["failure"] = {{"category", to_string(r.failure->category)},
                    {"message", r.failure->message},
                    {"epoch", r.failure->epoch},
                    {"prompt_id", r.failure->prompt_id}};
  } else {
    m["failure"] = nullptr;
  }
  return m;
}

std::string phase_csv(const PhaseTable& table) {
  std::string out(kPhaseHeader);
  out += '\n';
  for (const auto& row : table.rows) {
    append_row(out, {format_number(row.rho), std::to_string(row.seed),
                     format_number(row.L_0), format_number(row.L_T),
                     row.L_T > row.L_0 ? "1" : "0",
                     format_number(row.noisy_majority_acc), format_number(row.rho_c_hat),
                     format_number(table.rho_c_hat)});
  }
  return out;
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void emit_outputs(const RunResult& result, const fs::path& out_dir) {
  const std::string metrics = metrics_csv(result);
  const std::string events = events_csv(result);
  const std::string manifest = build_manifest(result).dump(2) + "\n";

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string());
  }
  // Probe writability without touching any of the real output files.
  const fs::path probe = out_dir / ".olrsim_write_probe";
  {
    std::ofstream p(probe, std::ios::binary | std::ios::trunc);
    if (!p) throw IoError("output directory " + out_dir.string() + " is not writable");
  }
  fs::remove(probe, ec);

  write_text_file(out_dir / "metrics.csv", metrics);
  write_text_file(out_dir / "events.csv", events);
  write_text_file(out_dir / "manifest.json", manifest);
}

}  // namespace olrsim
