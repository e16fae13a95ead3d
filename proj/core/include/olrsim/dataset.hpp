#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "olrsim/types.hpp"

namespace olrsim {

struct AnswerSpace {
  PromptId prompt_id = 0;
  std::vector<AnswerId> answers;
  AnswerId true_answer = 0;

  bool contains(AnswerId a) const;
  // Position of `a` in `answers`; throws DomainError if absent.
  std::size_t index_of(AnswerId a) const;
  std::size_t size() const { return answers.size(); }
  // Throws ConfigError when the invariants (distinct, >= 2, truth present)
  // do not hold.
  void validate() const;
};

struct LabeledPrompt {
  PromptId prompt_id = 0;
  AnswerSpace space;
  AnswerId train_label = 0;
  NoiseClass noise_class = NoiseClass::kClean;

  bool is_noisy() const { return noise_class != NoiseClass::kClean; }
  // Checks that noise_class agrees with train_label.
  void validate() const;
};

// Prompts are stored so that dataset[i].prompt_id == i.
using Dataset = std::vector<LabeledPrompt>;

const LabeledPrompt& prompt_of(const Dataset& dataset, PromptId id);

// Frozen per-(prompt, answer) feature vectors plus the skill geometry that
// produced them. Rows of `features(p)` follow the order of the prompt's
// AnswerSpace::answers.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int dim, double coupling_alpha, std::vector<int> skill_of,
             std::vector<Eigen::VectorXd> skill_directions,
             std::vector<Eigen::MatrixXd> features);

  int dim() const { return dim_; }
  double coupling_alpha() const { return coupling_alpha_; }
  int n_skills() const { return static_cast<int>(skill_directions_.size()); }
  std::size_t n_prompts() const { return features_.size(); }

  int skill_of(PromptId p) const;
  const Eigen::VectorXd& skill_direction(int s) const;
  const Eigen::MatrixXd& features(PromptId p) const;
  Eigen::VectorXd phi(const AnswerSpace& space, AnswerId a) const;

  const std::vector<int>& skills() const { return skill_of_; }
  const std::vector<Eigen::VectorXd>& skill_directions() const {
    return skill_directions_;
  }

 private:
  int dim_ = 0;
  double coupling_alpha_ = 0.0;
  std::vector<int> skill_of_;
  std::vector<Eigen::VectorXd> skill_directions_;
  std::vector<Eigen::MatrixXd> features_;
};

struct TaskSpec {
  int n_prompts = 200;
  int answers_per_prompt = 5;
  int n_skills = 4;
  double coupling_alpha = 0.5;
  int dim = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Task {
  Dataset dataset;
  FeatureMap features;
};

// Synthetic task family. Each prompt draws a skill uniformly; the correct
// answer's feature is normalize(sqrt(a) * u_skill + sqrt(1 - a) * g) and every
// wrong answer's feature is an independent random unit vector g. Answer ids
// are 0..answers_per_prompt-1 with the true answer drawn uniformly, and every
// label starts clean.
Task generate_dataset(const TaskSpec& spec);

}  // namespace olrsim
