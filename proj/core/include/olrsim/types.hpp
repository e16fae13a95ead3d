#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace olrsim {

using PromptId = std::int32_t;
using AnswerId = std::int32_t;

// Label that lies outside every answer space. A policy can never roll it out.
inline constexpr AnswerId kInfeasible = -1;

enum class NoiseClass { kClean, kInactive, kActive };

std::string_view to_string(NoiseClass c);
NoiseClass noise_class_from_string(std::string_view s);

// "infeasible" for the sentinel, the decimal id otherwise.
std::string label_to_string(AnswerId label);

}  // namespace olrsim
