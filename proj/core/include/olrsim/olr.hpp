#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>

#include "olrsim/types.hpp"

namespace olrsim {

struct MajorityVote {
  AnswerId answer = 0;
  double pass_rate = 0.0;
};

// Most frequent answer and its share of the batch; ties go to the smallest id.
MajorityVote majority_answer(std::span<const AnswerId> batch);

struct TrajectoryEntry {
  int epoch = 0;
  AnswerId majority = 0;
  double pass_rate = 0.0;

  friend bool operator==(const TrajectoryEntry&, const TrajectoryEntry&) = default;
};

// Per-prompt history of (epoch, majority answer, majority pass rate).
// `window == 0` keeps every entry; otherwise only the newest `window` entries
// are retained.
class MajorityTrajectory {
 public:
  MajorityTrajectory() = default;
  explicit MajorityTrajectory(PromptId prompt_id, std::size_t window = 0)
      : prompt_id_(prompt_id), window_(window) {}

  PromptId prompt_id() const { return prompt_id_; }
  std::size_t window() const { return window_; }
  const std::deque<TrajectoryEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const TrajectoryEntry& latest() const { return entries_.back(); }

  // Throws StateError unless `entry.epoch` is greater than the last epoch,
  // and ConfigError for pass rates outside (0, 1].
  void append(const TrajectoryEntry& entry);

 private:
  PromptId prompt_id_ = 0;
  std::size_t window_ = 0;
  std::deque<TrajectoryEntry> entries_;
};

struct OlrConfig {
  double delta_slope = 0.05;
  int warmup_T = 5;

  void validate() const;
};

// Least-squares slope of pass rate against epoch, centred two-pass form:
//   sum (t - t_bar)(p - p_bar) / sum (t - t_bar)^2.
// nullopt (not ready) with fewer than two entries.
std::optional<double> slope(const MajorityTrajectory& traj);

// Answer that was the majority most often. Ties go to the holder of the most
// recent entry among the tied answers, then to the smallest id.
AnswerId historical_majority(const MajorityTrajectory& traj);

// Latest majority equals the historical majority.
bool consistency(const MajorityTrajectory& traj);

struct RefinementDecision {
  AnswerId label = 0;
  bool replaced = false;
  std::optional<double> slope;
  bool consistent = false;
};

// Label used for reward computation at `epoch`: the training label during
// warmup (epoch <= warmup_T), afterwards the latest majority answer when the
// slope exceeds delta_slope and the majority is historically consistent.
// Evaluated afresh every epoch, so a replacement can lapse.
RefinementDecision refine_label(const MajorityTrajectory& traj,
                                AnswerId train_label, int epoch,
                                const OlrConfig& cfg);

inline AnswerId effective_label(const MajorityTrajectory& traj,
                                AnswerId train_label, int epoch,
                                const OlrConfig& cfg) {
  return refine_label(traj, train_label, epoch, cfg).label;
}

// Appends this epoch's majority vote; returns the updated trajectory.
MajorityTrajectory update_trajectory(MajorityTrajectory traj, int epoch,
                                     std::span<const AnswerId> batch);

}  // namespace olrsim
