#include "olrsim/olr.hpp"

#include <cmath>
#include <map>
#include <string>

#include "olrsim/errors.hpp"

namespace olrsim {

MajorityVote majority_answer(std::span<const AnswerId> batch) {
  if (batch.empty()) throw ConfigError("majority vote over an empty batch");
  std::map<AnswerId, int> counts;
  for (AnswerId a : batch) ++counts[a];
  // std::map iterates in increasing id order, so strict > keeps the smallest id.
  MajorityVote best{counts.begin()->first, 0.0};
  int best_count = 0;
  for (const auto& [a, c] : counts) {
    if (c > best_count) {
      best.answer = a;
      best_count = c;
    }
  }
  best.pass_rate = static_cast<double>(best_count) / static_cast<double>(batch.size());
  return best;
}

void MajorityTrajectory::append(const TrajectoryEntry& entry) {
  if (!entries_.empty() && entry.epoch <= entries_.back().epoch) {
    throw StateError("trajectory of prompt " + std::to_string(prompt_id_) +
                     ": epoch " + std::to_string(entry.epoch) +
                     " does not follow epoch " +
                     std::to_string(entries_.back().epoch));
  }
  if (!(entry.pass_rate > 0.0 && entry.pass_rate <= 1.0)) {
    throw ConfigError("majority pass rate must lie in (0, 1]");
  }
  entries_.push_back(entry);
  if (window_ != 0 && entries_.size() > window_) entries_.pop_front();
}

void OlrConfig::validate() const {
  if (warmup_T < 2) throw ConfigError("warmup_T must be >= 2");
  if (!std::isfinite(delta_slope)) throw ConfigError("delta_slope must be finite");
}

std::optional<double> slope(const MajorityTrajectory& traj) {
  const auto& e = traj.entries();
  if (e.size() < 2) return std::nullopt;
  const double n = static_cast<double>(e.size());
  double t_bar = 0.0;
  double p_bar = 0.0;
  for (const auto& x : e) {
    t_bar += static_cast<double>(x.epoch);
    p_bar += x.pass_rate;
  }
  t_bar /= n;
  p_bar /= n;
  double num = 0.0;
  double den = 0.0;
  for (const auto& x : e) {
    const double dt = static_cast<double>(x.epoch) - t_bar;
    num += dt * (x.pass_rate - p_bar);
    den += dt * dt;
  }
  return num / den;
}

AnswerId historical_majority(const MajorityTrajectory& traj) {
  if (traj.empty()) throw StateError("historical majority of an empty trajectory");
  std::map<AnswerId, int> counts;
  std::map<AnswerId, int> last_seen;
  for (const auto& x : traj.entries()) {
    ++counts[x.majority];
    last_seen[x.majority] = x.epoch;
  }
  AnswerId best = counts.begin()->first;
  for (const auto& [a, c] : counts) {
    const int bc = counts[best];
    if (c > bc || (c == bc && last_seen[a] > last_seen[best])) best = a;
  }
  return best;
}

bool consistency(const MajorityTrajectory& traj) {
  if (traj.empty()) throw StateError("consistency of an empty trajectory");
  return traj.latest().majority == historical_majority(traj);
}

RefinementDecision refine_label(const MajorityTrajectory& traj,
                                AnswerId train_label, int epoch,
                                const OlrConfig& cfg) {
  RefinementDecision d;
  d.label = train_label;
  if (traj.empty()) return d;
  d.slope = slope(traj);
  d.consistent = consistency(traj);
  if (epoch <= cfg.warmup_T) return d;
  if (d.slope && *d.slope > cfg.delta_slope && d.consistent) {
    d.label = traj.latest().majority;
    d.replaced = true;
  }
  return d;
}

MajorityTrajectory update_trajectory(MajorityTrajectory traj, int epoch,
                                     std::span<const AnswerId> batch) {
  const auto vote = majority_answer(batch);
  traj.append(TrajectoryEntry{epoch, vote.answer, vote.pass_rate});
  return traj;
}

}  // namespace olrsim
