#include "olrsim/policy.hpp"

#include <random>

#include "olrsim/errors.hpp"

namespace olrsim {

PolicyParams prior_params(const FeatureMap& fm, double strength) {
  PolicyParams p = PolicyParams::zeros(fm.dim());
  for (const auto& u : fm.skill_directions()) p.theta += strength * u;
  return p;
}

Eigen::VectorXd logits(const PolicyParams& params, const FeatureMap& fm,
                       const AnswerSpace& space) {
  const auto& m = fm.features(space.prompt_id);
  if (m.rows() != static_cast<Eigen::Index>(space.size())) {
    throw DomainError("feature rows do not match the answer space of prompt " +
                      std::to_string(space.prompt_id));
  }
  if (params.theta.size() != m.cols()) {
    throw DomainError("parameter dimension does not match feature dimension");
  }
  return m * params.theta;
}

Eigen::VectorXd action_probs(const PolicyParams& params, const FeatureMap& fm,
                             const AnswerSpace& space) {
  Eigen::VectorXd z = logits(params, fm, space);
  z.array() -= z.maxCoeff();
  Eigen::VectorXd e = z.array().exp();
  return e / e.sum();
}

double label_prob(const PolicyParams& params, const FeatureMap& fm,
                  const AnswerSpace& space, AnswerId label) {
  if (!space.contains(label)) return 0.0;
  return action_probs(params, fm, space)[static_cast<Eigen::Index>(space.index_of(label))];
}

std::vector<AnswerId> sample_rollouts(const PolicyParams& params,
                                      const FeatureMap& fm,
                                      const AnswerSpace& space, int k, Rng& rng) {
  if (k < 1) throw ConfigError("rollout count K must be >= 1");
  const Eigen::VectorXd p = action_probs(params, fm, space);
  std::discrete_distribution<std::size_t> pick(p.data(), p.data() + p.size());
  std::vector<AnswerId> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(space.answers[pick(rng)]);
  return out;
}

Eigen::VectorXd log_prob_grad(const PolicyParams& params, const FeatureMap& fm,
                              const AnswerSpace& space, AnswerId answer) {
  const auto row = static_cast<Eigen::Index>(space.index_of(answer));
  const auto& m = fm.features(space.prompt_id);
  const Eigen::VectorXd p = action_probs(params, fm, space);
  return m.row(row).transpose() - m.transpose() * p;
}

}  // namespace olrsim
