#pragma once

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "olrsim/dataset.hpp"
#include "olrsim/olr.hpp"
#include "olrsim/policy.hpp"

namespace olrsim {

// JSON encodings used by the run manifest. Decoders validate their input and
// throw IoError on malformed documents.

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j);

nlohmann::json features_to_json(const FeatureMap& fm);
FeatureMap features_from_json(const nlohmann::json& j);

nlohmann::json trajectory_to_json(const MajorityTrajectory& traj);
MajorityTrajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const PolicyParams& p);
PolicyParams params_from_json(const nlohmann::json& j);

}  // namespace olrsim
