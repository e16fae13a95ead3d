#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "olrsim/dataset.hpp"
#include "olrsim/policy.hpp"
#include "olrsim/rng.hpp"

namespace olrsim::testing {

// A dataset of independent prompts whose feature rows are given directly.
// Answer ids are 0..rows-1 and answer 0 is correct.
struct Fixture {
  FeatureMap fm;
  Dataset dataset;
};

inline Fixture make_fixture(const std::vector<Eigen::MatrixXd>& rows) {
  const int dim = static_cast<int>(rows.front().cols());
  Dataset d;
  std::vector<int> skills;
  for (std::size_t p = 0; p < rows.size(); ++p) {
    LabeledPrompt lp;
    lp.prompt_id = static_cast<PromptId>(p);
    lp.space.prompt_id = lp.prompt_id;
    for (Eigen::Index a = 0; a < rows[p].rows(); ++a) {
      lp.space.answers.push_back(static_cast<AnswerId>(a));
    }
    lp.space.true_answer = 0;
    lp.train_label = 0;
    d.push_back(lp);
    skills.push_back(0);
  }
  std::vector<Eigen::VectorXd> dirs{Eigen::VectorXd::Unit(dim, 0)};
  return {FeatureMap(dim, 0.0, skills, dirs, rows), d};
}

inline Fixture single_prompt(const Eigen::MatrixXd& rows) { return make_fixture({rows}); }

inline Eigen::VectorXd gaussian(int dim, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v;
}

inline Eigen::MatrixXd random_rows(int answers, int dim, Rng& rng) {
  Eigen::MatrixXd m(answers, dim);
  for (int a = 0; a < answers; ++a) m.row(a) = gaussian(dim, rng).normalized().transpose();
  return m;
}

inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / scale;
}

}  // namespace olrsim::testing
