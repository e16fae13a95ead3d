#include "olrsim/serialization.hpp"

#include <string>

#include "olrsim/errors.hpp"

namespace olrsim {

using nlohmann::json;

namespace {

// nlohmann's own exceptions are rethrown as IoError so callers see one
// category for every malformed manifest.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ") + what + ": " + e.what());
  }
}

json label_to_json(AnswerId a) {
  return a == kInfeasible ? json("infeasible") : json(a);
}

AnswerId label_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "infeasible") return kInfeasible;
    throw IoError("unknown label string '" + j.get<std::string>() + "'");
  }
  return j.get<AnswerId>();
}

}  // namespace

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  return guarded("vector", [&] {
    if (!j.is_array()) throw IoError("expected a numeric array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
  });
}

json dataset_to_json(const Dataset& dataset) {
  json out = json::array();
  for (const auto& p : dataset) {
    out.push_back({{"prompt_id", p.prompt_id},
                   {"answers", p.space.answers},
                   {"true_answer", p.space.true_answer},
                   {"train_label", label_to_json(p.train_label)},
                   {"noise_class", std::string(to_string(p.noise_class))}});
  }
  return out;
}

Dataset dataset_from_json(const json& j) {
  return guarded("dataset", [&] {
    if (!j.is_array()) throw IoError("dataset must be an array");
    Dataset d;
    d.reserve(j.size());
    for (const auto& e : j) {
      LabeledPrompt p;
      p.prompt_id = e.at("prompt_id").get<PromptId>();
      p.space.prompt_id = p.prompt_id;
      p.space.answers = e.at("answers").get<std::vector<AnswerId>>();
      p.space.true_answer = e.at("true_answer").get<AnswerId>();
      p.train_label = label_from_json(e.at("train_label"));
      p.noise_class = noise_class_from_string(e.at("noise_class").get<std::string>());
      if (p.prompt_id != static_cast<PromptId>(d.size())) {
        throw IoError("dataset prompt ids must be 0..N-1 in order");
      }
      try {
        p.validate();
      } catch (const Error& err) {
        throw IoError(std::string("invalid prompt in dataset: ") + err.what());
      }
      d.push_back(std::move(p));
    }
    return d;
  });
}

json features_to_json(const FeatureMap& fm) {
  json dirs = json::array();
  for (const auto& u : fm.skill_directions()) dirs.push_back(vector_to_json(u));
  json phi = json::array();
  for (std::size_t p = 0; p < fm.n_prompts(); ++p) {
    const auto& m = fm.features(static_cast<PromptId>(p));
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      rows.push_back(vector_to_json(m.row(r).transpose()));
    }
    phi.push_back(std::move(rows));
  }
  return {{"dim", fm.dim()},
          {"coupling_alpha", fm.coupling_alpha()},
          {"skill_of", fm.skills()},
          {"skill_directions", std::move(dirs)},
          {"phi", std::move(phi)}};
}

FeatureMap features_from_json(const json& j) {
  return guarded("features", [&] {
    const int dim = j.at("dim").get<int>();
    const double alpha = j.at("coupling_alpha").get<double>();
    auto skill_of = j.at("skill_of").get<std::vector<int>>();
    std::vector<Eigen::VectorXd> dirs;
    for (const auto& u : j.at("skill_directions")) dirs.push_back(vector_from_json(u));
    std::vector<Eigen::MatrixXd> phi;
    for (const auto& rows : j.at("phi")) {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), dim);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::VectorXd row = vector_from_json(rows[r]);
        if (row.size() != dim) throw IoError("feature row has the wrong dimension");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
      phi.push_back(std::move(m));
    }
    try {
      return FeatureMap(dim, alpha, std::move(skill_of), std::move(dirs), std::move(phi));
    } catch (const Error& err) {
      throw IoError(std::string("invalid feature map: ") + err.what());
    }
  });
}

json trajectory_to_json(const MajorityTrajectory& traj) {
  json entries = json::array();
  for (const auto& e : traj.entries()) {
    entries.push_back({e.epoch, e.majority, e.pass_rate});
  }
  return {{"prompt_id", traj.prompt_id()},
          {"window", traj.window()},
          {"entries", std::move(entries)}};
}

MajorityTrajectory trajectory_from_json(const json& j) {
  return guarded("trajectory", [&] {
    MajorityTrajectory t(j.at("prompt_id").get<PromptId>(),
                         j.at("window").get<std::size_t>());
    for (const auto& e : j.at("entries")) {
      try {
        t.append({e.at(0).get<int>(), e.at(1).get<AnswerId>(), e.at(2).get<double>()});
      } catch (const Error& err) {
        throw IoError(std::string("invalid trajectory entry: ") + err.what());
      }
    }
    return t;
  });
}

json params_to_json(const PolicyParams& p) { return vector_to_json(p.theta); }

PolicyParams params_from_json(const json& j) { return PolicyParams{vector_from_json(j)}; }

}  // namespace olrsim
