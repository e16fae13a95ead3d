#include "olrsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "olrsim/errors.hpp"
#include "olrsim/rng.hpp"

namespace olrsim {

bool AnswerSpace::contains(AnswerId a) const {
  return std::find(answers.begin(), answers.end(), a) != answers.end();
}

std::size_t AnswerSpace::index_of(AnswerId a) const {
  auto it = std::find(answers.begin(), answers.end(), a);
  if (it == answers.end()) {
    throw DomainError("answer " + label_to_string(a) +
                      " is not in the answer space of prompt " +
                      std::to_string(prompt_id));
  }
  return static_cast<std::size_t>(it - answers.begin());
}

void AnswerSpace::validate() const {
  if (answers.size() < 2) {
    throw ConfigError("prompt " + std::to_string(prompt_id) +
                      " needs at least two answers");
  }
  std::set<AnswerId> seen(answers.begin(), answers.end());
  if (seen.size() != answers.size()) {
    throw ConfigError("prompt " + std::to_string(prompt_id) +
                      " has duplicate answers");
  }
  if (seen.count(kInfeasible) != 0) {
    throw ConfigError("the infeasible sentinel cannot be an answer");
  }
  if (!contains(true_answer)) {
    throw ConfigError("true answer of prompt " + std::to_string(prompt_id) +
                      " is not in its answer space");
  }
}

void LabeledPrompt::validate() const {
  space.validate();
  bool ok = false;
  switch (noise_class) {
    case NoiseClass::kClean:
      ok = train_label == space.true_answer;
      break;
    case NoiseClass::kInactive:
      ok = train_label == kInfeasible;
      break;
    case NoiseClass::kActive:
      ok = train_label != space.true_answer && space.contains(train_label);
      break;
  }
  if (!ok) {
    throw ConfigError("prompt " + std::to_string(prompt_id) + ": label " +
                      label_to_string(train_label) + " inconsistent with class " +
                      std::string(to_string(noise_class)));
  }
}

const LabeledPrompt& prompt_of(const Dataset& dataset, PromptId id) {
  if (id >= 0 && static_cast<std::size_t>(id) < dataset.size() &&
      dataset[static_cast<std::size_t>(id)].prompt_id == id) {
    return dataset[static_cast<std::size_t>(id)];
  }
  for (const auto& p : dataset) {
    if (p.prompt_id == id) return p;
  }
  throw DomainError("unknown prompt id " + std::to_string(id));
}

FeatureMap::FeatureMap(int dim, double coupling_alpha, std::vector<int> skill_of,
                       std::vector<Eigen::VectorXd> skill_directions,
                       std::vector<Eigen::MatrixXd> features)
    : dim_(dim),
      coupling_alpha_(coupling_alpha),
      skill_of_(std::move(skill_of)),
      skill_directions_(std::move(skill_directions)),
      features_(std::move(features)) {
  if (skill_of_.size() != features_.size()) {
    throw ConfigError("feature map: skill table and feature table disagree");
  }
  for (const auto& m : features_) {
    if (m.cols() != dim_) throw ConfigError("feature map: wrong feature width");
  }
  for (const auto& u : skill_directions_) {
    if (u.size() != dim_) throw ConfigError("feature map: wrong skill width");
  }
}

int FeatureMap::skill_of(PromptId p) const {
  if (p < 0 || static_cast<std::size_t>(p) >= skill_of_.size()) {
    throw DomainError("no features for prompt " + std::to_string(p));
  }
  return skill_of_[static_cast<std::size_t>(p)];
}

const Eigen::VectorXd& FeatureMap::skill_direction(int s) const {
  if (s < 0 || s >= n_skills()) {
    throw DomainError("unknown skill " + std::to_string(s));
  }
  return skill_directions_[static_cast<std::size_t>(s)];
}

const Eigen::MatrixXd& FeatureMap::features(PromptId p) const {
  if (p < 0 || static_cast<std::size_t>(p) >= features_.size()) {
    throw DomainError("no features for prompt " + std::to_string(p));
  }
  return features_[static_cast<std::size_t>(p)];
}

Eigen::VectorXd FeatureMap::phi(const AnswerSpace& space, AnswerId a) const {
  const auto& m = features(space.prompt_id);
  const auto row = space.index_of(a);
  if (static_cast<Eigen::Index>(row) >= m.rows()) {
    throw DomainError("no feature row for answer " + std::to_string(a));
  }
  return m.row(static_cast<Eigen::Index>(row)).transpose();
}

void TaskSpec::validate() const {
  if (n_prompts < 1) throw ConfigError("n_prompts must be >= 1");
  if (answers_per_prompt < 2) throw ConfigError("answers_per_prompt must be >= 2");
  if (n_skills < 1 || n_skills > n_prompts) {
    throw ConfigError("n_skills must lie in [1, n_prompts]");
  }
  if (!(coupling_alpha >= 0.0 && coupling_alpha <= 1.0)) {
    throw ConfigError("coupling_alpha must lie in [0, 1]");
  }
  if (dim < n_skills + 1) {
    throw ConfigError("dim " + std::to_string(dim) + " cannot host " +
                      std::to_string(n_skills) +
                      " orthonormal skill directions plus idiosyncratic room");
  }
}

namespace {

Eigen::VectorXd random_unit(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

std::vector<Eigen::VectorXd> orthonormal_directions(int dim, int count, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, count);
  for (int c = 0; c < count; ++c) {
    for (int r = 0; r < dim; ++r) g(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, count);
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) out.emplace_back(q.col(c));
  return out;
}

}  // namespace

Task generate_dataset(const TaskSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  auto skills = orthonormal_directions(spec.dim, spec.n_skills, rng);
  std::uniform_int_distribution<int> pick_skill(0, spec.n_skills - 1);
  std::uniform_int_distribution<int> pick_answer(0, spec.answers_per_prompt - 1);

  const double a = spec.coupling_alpha;
  const double w_skill = std::sqrt(a);
  const double w_own = std::sqrt(1.0 - a);

  Task task;
  std::vector<int> skill_of;
  std::vector<Eigen::MatrixXd> features;
  task.dataset.reserve(static_cast<std::size_t>(spec.n_prompts));

  for (PromptId p = 0; p < spec.n_prompts; ++p) {
    const int s = pick_skill(rng);
    const AnswerId truth = pick_answer(rng);

    LabeledPrompt lp;
    lp.prompt_id = p;
    lp.space.prompt_id = p;
    for (AnswerId y = 0; y < spec.answers_per_prompt; ++y) {
      lp.space.answers.push_back(y);
    }
    lp.space.true_answer = truth;
    lp.train_label = truth;
    lp.noise_class = NoiseClass::kClean;

    Eigen::MatrixXd m(spec.answers_per_prompt, spec.dim);
    for (AnswerId y = 0; y < spec.answers_per_prompt; ++y) {
      Eigen::VectorXd g = random_unit(spec.dim, rng);
      if (y == truth) {
        Eigen::VectorXd v = w_skill * skills[static_cast<std::size_t>(s)] + w_own * g;
        // The mix can only vanish when g = -u exactly at a = 1/2.
        g = v.norm() > 1e-12 ? Eigen::VectorXd(v / v.norm()) : g;
      }
      m.row(y) = g.transpose();
    }

    skill_of.push_back(s);
    features.push_back(std::move(m));
    task.dataset.push_back(std::move(lp));
  }

  task.features = FeatureMap(spec.dim, spec.coupling_alpha, std::move(skill_of),
                             std::move(skills), std::move(features));
  return task;
}

}  // namespace olrsim
