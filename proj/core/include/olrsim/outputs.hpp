#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "olrsim/runner.hpp"

namespace olrsim {

inline constexpr std::string_view kMetricsHeader =
    "epoch,clean_majority_acc,noisy_majority_acc,selection_ratio_clean,"
    "selection_ratio_noisy,selected_majority_acc,unselected_majority_acc,"
    "realized_noise,initial_noise,mean_slope,mean_L_t,mean_reward,gamma,G_c,G_n,"
    "rho_c,rho_c_kl,drift";

inline constexpr std::string_view kEventsHeader =
    "epoch,prompt_id,majority,pass_rate,slope,consistent,selected,effective_label,"
    "noise_class";

inline constexpr std::string_view kPhaseHeader =
    "rho,seed,L_0,L_T,L_T_above_L_0,noisy_majority_acc,rho_c_hat,rho_c_hat_median";

const char* library_version();

// Decimal with 9 significant digits; NaN and infinities print as nan/inf/-inf.
std::string format_number(double v);

std::string metrics_csv(const RunResult& result);
std::string events_csv(const RunResult& result);
nlohmann::json build_manifest(const RunResult& result);
std::string phase_csv(const PhaseTable& table);

// Writes metrics.csv, events.csv and manifest.json into out_dir, creating it
// if needed. Everything is rendered first and the directory is checked for
// writability, so an IoError leaves no partial file behind.
void emit_outputs(const RunResult& result, const std::filesystem::path& out_dir);

void write_text_file(const std::filesystem::path& path, std::string_view text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace olrsim
