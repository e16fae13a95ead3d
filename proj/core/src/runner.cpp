#include "olrsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "olrsim/baselines.hpp"
#include "olrsim/noise.hpp"
#include "olrsim/rng.hpp"
#include "olrsim/serialization.hpp"

namespace olrsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(int num, int den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : kNaN;
}

double finite_mean(std::span<const double> xs) {
  double sum = 0.0;
  int n = 0;
  for (double x : xs) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  return n > 0 ? sum / n : kNaN;
}

double noisy_fraction(const Dataset& d) {
  int n = 0;
  for (const auto& p : d) n += p.is_noisy() ? 1 : 0;
  return ratio(n, static_cast<int>(d.size()));
}

// Per-epoch theory quantities at the current policy. Quantities whose
// preconditions fail (no noisy prompts, negative coupling) are NaN.
TheoryReport measure_theory(int epoch, const PolicyParams& params,
                            const PolicyParams& ref, const FeatureMap& fm,
                            const Dataset& data, std::span<const RolloutBatch> batches,
                            const RunConfig& cfg) {
  TheoryReport t;
  t.epoch = epoch;
  std::vector<PromptId> clean;
  std::vector<PromptId> noisy;
  for (const auto& p : data) (p.is_noisy() ? noisy : clean).push_back(p.prompt_id);

  if (!clean.empty() && !noisy.empty()) {
    Rng rng = make_stream(cfg.seed, "coupling", static_cast<std::uint64_t>(epoch));
    t.gamma = measure_coupling(params, fm, data, clean, noisy, cfg.coupling_pairs, rng);
  } else {
    t.gamma = kNaN;
  }
  const auto g = advantage_magnitudes(batches, data);
  t.G_c = g.clean;
  t.G_n = g.noisy;

  double ref_sum = 0.0;
  int n_active = 0;
  for (const auto& p : data) {
    if (p.noise_class != NoiseClass::kActive) continue;
    t.log_ratios[p.prompt_id] = log_ratio(params, fm, p);
    ref_sum += reference_log_ratio(ref, fm, p);
    ++n_active;
  }
  t.delta_ref = n_active > 0 ? ref_sum / n_active : 0.0;
  {
    double s = 0.0;
    for (const auto& [id, l] : t.log_ratios) s += l;
    t.mean_L_t = n_active > 0 ? s / n_active : kNaN;
  }

  t.rho_c = kNaN;
  t.rho_c_kl = kNaN;
  t.rho_c_kl_clamped = kNaN;
  t.drift = kNaN;
  if (std::isfinite(t.gamma)) {
    try {
      t.rho_c = critical_ratio(t.gamma, t.G_c, t.G_n);
    } catch (const UndefinedError&) {
    }
    try {
      const auto kl = critical_ratio_kl(t.gamma, t.G_c, t.G_n, cfg.beta, t.delta_ref);
      t.rho_c_kl = kl.raw;
      t.rho_c_kl_clamped = kl.clamped;
    } catch (const UndefinedError&) {
    }
    t.drift = drift(t.gamma, noisy_fraction(data), t.G_c, t.G_n);
  }
  return t;
}

}  // namespace

double mean_log_ratio(const PolicyParams& params, const FeatureMap& fm,
                      const Dataset& dataset) {
  double s = 0.0;
  int n = 0;
  for (const auto& p : dataset) {
    if (p.noise_class != NoiseClass::kActive) continue;
    s += log_ratio(params, fm, p);
    ++n;
  }
  return n > 0 ? s / n : kNaN;
}

RunResult run_experiment(const RunConfig& cfg, const RunObserver* observer) {
  cfg.validate();
  RunResult res;
  res.config = cfg;

  Task task = generate_dataset(cfg.task_spec());
  res.features = std::move(task.features);
  const FeatureMap& fm = res.features;
  const int n = static_cast<int>(task.dataset.size());

  const PolicyParams theta0 = prior_params(fm, cfg.prior_strength);
  res.reference = PolicyParams{cfg.ref_scale * theta0.theta};
  const PolicyParams& ref = res.reference;

  Dataset data;
  {
    Rng noise_rng = make_stream(cfg.seed, "noise");
    data = cfg.noise_type == NoiseType::kInactive
               ? inject_inactive_noise(task.dataset, cfg.rho, noise_rng)
               : inject_active_noise(task.dataset, cfg.rho, theta0, fm, noise_rng);
  }
  res.initial_dataset = data;
  const double initial_noise = noisy_fraction(data);

  UpdateConfig ucfg = cfg.update_config();
  const RegularizerTerms reg = entropy_regularizers(cfg.strategy, cfg.reg_lambda);
  ucfg.entropy_bonus = reg.entropy_bonus;
  const OlrConfig ocfg = cfg.olr_config();

  std::vector<Rng> rollout_rng;
  rollout_rng.reserve(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    rollout_rng.push_back(make_stream(cfg.seed, "rollout", static_cast<std::uint64_t>(p)));
  }
  Rng select_rng = make_stream(cfg.seed, "select");

  for (int p = 0; p < n; ++p) {
    res.trajectories.emplace_back(p, static_cast<std::size_t>(cfg.trajectory_window));
  }

  PolicyParams theta = theta0;
  res.theta_history.push_back(theta.theta);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    PromptId current = -1;
    try {
      std::vector<std::vector<AnswerId>> rollouts(static_cast<std::size_t>(n));
      for (int p = 0; p < n; ++p) {
        current = p;
        rollouts[p] = sample_rollouts(theta, fm, data[p].space, cfg.K, rollout_rng[p]);
      }
      current = -1;

      if (cfg.noise_type == NoiseType::kActive &&
          cfg.active_mode == ActiveMode::kDynamicPerEpoch) {
        std::map<PromptId, std::vector<AnswerId>> noisy_rollouts;
        for (const auto& p : data) {
          if (p.is_noisy()) noisy_rollouts.emplace(p.prompt_id, rollouts[p.prompt_id]);
        }
        Dataset refreshed = refresh_active_noise(data, noisy_rollouts);
        for (int p = 0; p < n; ++p) {
          if (refreshed[p].train_label != data[p].train_label) {
            res.label_history[p].emplace_back(epoch, refreshed[p].train_label);
          }
        }
        data = std::move(refreshed);
      }

      std::vector<EventRow> rows(static_cast<std::size_t>(n));
      std::vector<RolloutBatch> batches;
      batches.reserve(static_cast<std::size_t>(n));
      std::map<PromptId, AnswerId> effective;
      double reward_sum = 0.0;
      for (int p = 0; p < n; ++p) {
        current = p;
        auto& traj = res.trajectories[p];
        traj = update_trajectory(std::move(traj), epoch, rollouts[p]);
        const auto decision = refine_label(traj, data[p].train_label, epoch, ocfg);

        EventRow& row = rows[p];
        row.epoch = epoch;
        row.prompt_id = p;
        row.majority = traj.latest().majority;
        row.pass_rate = traj.latest().pass_rate;
        row.slope = decision.slope;
        row.consistent = decision.consistent;
        row.noise_class = data[p].noise_class;
        switch (cfg.strategy) {
          case Strategy::kOlr:
            row.effective_label = decision.label;
            row.selected = decision.replaced;
            break;
          case Strategy::kTtrl:
            row.effective_label = ttrl_label(rollouts[p]);
            row.selected = true;
            break;
          default:
            row.effective_label = data[p].train_label;
            row.selected = false;
            break;
        }
        effective[p] = row.effective_label;

        auto rewards = rewards_for(rollouts[p], row.effective_label);
        for (double r : rewards) reward_sum += r;
        if (reg.reward_smoothing > 0.0) {
          rewards = smooth_rewards(rewards, reg.reward_smoothing, data[p].space.size());
        }
        batches.push_back(make_batch(p, epoch, rollouts[p], std::move(rewards), cfg.adv_eps));
      }
      current = -1;

      std::vector<RolloutBatch> update_batches;
      if (cfg.strategy == Strategy::kRandomSelect) {
        for (PromptId id : random_select(data, *cfg.selection_fraction, select_rng)) {
          rows[id].selected = true;
          update_batches.push_back(batches[id]);
        }
      } else if (cfg.strategy == Strategy::kSmallLoss) {
        std::vector<double> losses;
        losses.reserve(batches.size());
        for (const auto& b : batches) {
          losses.push_back(surrogate_loss(theta, fm, data[b.prompt_id].space, b));
        }
        for (std::size_t i : small_loss_select(losses, *cfg.selection_fraction)) {
          rows[i].selected = true;
          update_batches.push_back(batches[i]);
        }
      } else {
        update_batches = batches;
      }

      // Metrics at the pre-update policy.
      EpochMetrics m;
      m.epoch = epoch;
      int clean_n = 0, clean_hit = 0, noisy_n = 0, noisy_hit = 0;
      int clean_sel = 0, noisy_sel = 0;
      int sel_n = 0, sel_hit = 0, unsel_n = 0, unsel_hit = 0;
      std::vector<double> slopes;
      for (int p = 0; p < n; ++p) {
        const bool hit = rows[p].majority == data[p].space.true_answer;
        if (data[p].is_noisy()) {
          ++noisy_n;
          noisy_hit += hit;
          noisy_sel += rows[p].selected;
        } else {
          ++clean_n;
          clean_hit += hit;
          clean_sel += rows[p].selected;
        }
        if (rows[p].selected) {
          ++sel_n;
          sel_hit += hit;
        } else {
          ++unsel_n;
          unsel_hit += hit;
        }
        if (rows[p].slope) slopes.push_back(*rows[p].slope);
      }
      m.clean_majority_acc = ratio(clean_hit, clean_n);
      m.noisy_majority_acc = ratio(noisy_hit, noisy_n);
      m.selection_ratio_clean = ratio(clean_sel, clean_n);
      m.selection_ratio_noisy = ratio(noisy_sel, noisy_n);
      m.selected_majority_acc = ratio(sel_hit, sel_n);
      m.unselected_majority_acc = ratio(unsel_hit, unsel_n);
      m.realized_noise = measure_realized_noise(data, effective);
      m.initial_noise = initial_noise;
      m.mean_slope = finite_mean(slopes);
      m.mean_reward = reward_sum / (static_cast<double>(n) * cfg.K);

      TheoryReport t = measure_theory(epoch, theta, ref, fm, data, batches, cfg);
      m.mean_L_t = t.mean_L_t;

      const auto contributions =
          gradient_contributions(theta, theta, ref, fm, data, update_batches, ucfg);
      if (observer && observer->on_contributions) {
        observer->on_contributions(epoch, update_batches, contributions);
      }

      res.metrics.push_back(m);
      res.theory.push_back(std::move(t));
      res.events.insert(res.events.end(), rows.begin(), rows.end());

      theta = grpo_update(theta, theta, ref, fm, data, update_batches, ucfg);
      res.theta_history.push_back(theta.theta);
    } catch (const UpdateError& e) {
      res.failure = RunFailure{e.category(), e.what(), epoch, e.prompt_id()};
      break;
    } catch (const Error& e) {
      res.failure = RunFailure{e.category(), e.what(), epoch, current};
      break;
    }
  }

  res.final_dataset = std::move(data);
  return res;
}

double warmup_critical_ratio(const RunResult& result) {
  std::vector<double> xs;
  const auto T = static_cast<std::size_t>(result.config.warmup_T);
  for (std::size_t i = 0; i < result.theory.size() && i < T; ++i) {
    xs.push_back(result.theory[i].rho_c);
  }
  return finite_mean(xs);
}

namespace {

// Log-ratio against each prompt's strongest wrong answer under theta_0; used
// when a run has no active noisy label to measure against.
double shadow_log_ratio(const PolicyParams& theta0, const PolicyParams& params,
                        const FeatureMap& fm, const Dataset& dataset) {
  double s = 0.0;
  for (const auto& p : dataset) {
    const Eigen::VectorXd z0 = logits(theta0, fm, p.space);
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < z0.size(); ++i) {
      if (p.space.answers[static_cast<std::size_t>(i)] == p.space.true_answer) continue;
      if (best < 0 || z0[i] > z0[best]) best = i;
    }
    if (best < 0) continue;
    LabeledPrompt shadow = p;
    shadow.train_label = p.space.answers[static_cast<std::size_t>(best)];
    s += log_ratio(params, fm, shadow);
  }
  return dataset.empty() ? kNaN : s / static_cast<double>(dataset.size());
}

PhaseRow phase_cell(const RunConfig& base, double rho, std::uint64_t seed) {
  RunConfig cfg = base;
  cfg.rho = rho;
  cfg.seed = seed;
  const RunResult r = run_experiment(cfg);
  if (r.failure) {
    throw StateError("phase cell rho=" + std::to_string(rho) + " seed=" +
                     std::to_string(seed) + " failed: " + r.failure->message);
  }
  PhaseRow row;
  row.rho = rho;
  row.seed = seed;
  const PolicyParams th0{r.theta_history.front()};
  const PolicyParams thT{r.final_theta()};
  row.L_0 = mean_log_ratio(th0, r.features, r.initial_dataset);
  if (std::isnan(row.L_0)) {
    row.L_0 = shadow_log_ratio(th0, th0, r.features, r.initial_dataset);
    row.L_T = shadow_log_ratio(th0, thT, r.features, r.final_dataset);
  } else {
    row.L_T = mean_log_ratio(thT, r.features, r.final_dataset);
  }
  row.noisy_majority_acc = r.metrics.empty() ? kNaN : r.metrics.back().noisy_majority_acc;
  row.rho_c_hat = warmup_critical_ratio(r);
  return row;
}

}  // namespace

PhaseTable sweep_phase_diagram(const RunConfig& base, std::span<const double> rho_values,
                               std::span<const std::uint64_t> seeds, unsigned threads) {
  if (rho_values.empty() || seeds.empty()) {
    throw ConfigError("phase sweep needs non-empty rho and seed lists");
  }
  base.validate();
  const std::size_t cells = rho_values.size() * seeds.size();
  PhaseTable table;
  table.rows.resize(cells);
  std::vector<std::exception_ptr> errors(cells);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) {
      try {
        table.rows[i] = phase_cell(base, rho_values[i / seeds.size()], seeds[i % seeds.size()]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> est;
  for (const auto& r : table.rows) {
    if (std::isfinite(r.rho_c_hat)) est.push_back(r.rho_c_hat);
  }
  if (est.empty()) {
    table.rho_c_hat = kNaN;
  } else {
    std::sort(est.begin(), est.end());
    const std::size_t m = est.size() / 2;
    table.rho_c_hat = est.size() % 2 ? est[m] : 0.5 * (est[m - 1] + est[m]);
  }
  return table;
}

RunResult replay(const nlohmann::json& manifest) {
  if (!manifest.is_object() || !manifest.contains("config")) {
    throw IoError("manifest has no config section");
  }
  RunResult r = run_experiment(config_from_json(manifest.at("config")));
  if (manifest.contains("dataset") &&
      dataset_to_json(r.initial_dataset) != manifest.at("dataset")) {
    throw StateError("replayed dataset differs from the manifest");
  }
  return r;
}

TheoryReport probe_manifest(const nlohmann::json& manifest, int K,
                            std::uint64_t probe_seed) {
  if (K < 1) throw ConfigError("probe needs K >= 1");
  RunConfig cfg;
  FeatureMap fm;
  Dataset data;
  PolicyParams theta;
  PolicyParams ref;
  try {
    cfg = config_from_json(manifest.at("config"));
    fm = features_from_json(manifest.at("features"));
    data = dataset_from_json(manifest.at("dataset"));
    theta = params_from_json(manifest.at("final_theta"));
    ref = params_from_json(manifest.at("reference_theta"));
    for (const auto& e : manifest.at("noise_assignment")) {
      const auto id = e.at("prompt_id").get<PromptId>();
      if (id < 0 || id >= static_cast<PromptId>(data.size())) {
        throw IoError("noise assignment names an unknown prompt");
      }
      const auto& lbl = e.at("final_label");
      data[id].train_label = lbl.is_string() && lbl.get<std::string>() == "infeasible"
                                 ? kInfeasible
                                 : std::stoi(lbl.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw IoError("malformed label in manifest noise assignment");
  }
  if (theta.theta.size() != fm.dim() || ref.theta.size() != fm.dim()) {
    throw IoError("manifest policy dimension does not match its features");
  }
  if (fm.n_prompts() != data.size()) {
    throw IoError("manifest features and dataset disagree on prompt count");
  }

  std::vector<RolloutBatch> batches;
  for (const auto& p : data) {
    Rng rng = make_stream(probe_seed, "probe", static_cast<std::uint64_t>(p.prompt_id));
    auto answers = sample_rollouts(theta, fm, p.space, K, rng);
    auto rewards = rewards_for(answers, p.train_label);
    batches.push_back(make_batch(p.prompt_id, 0, std::move(answers), std::move(rewards),
                                 cfg.adv_eps));
  }
  cfg.seed = probe_seed;
  const int epochs = manifest.value("epochs_completed", 0);
  return measure_theory(epochs, theta, ref, fm, data, batches, cfg);
}

}  // namespace olrsim
