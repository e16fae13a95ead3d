#include "olrsim/rng.hpp"

#include "olrsim/errors.hpp"
#include "olrsim/types.hpp"

namespace olrsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ fnv1a(tag)) ^ index);
}

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kDomain: return "domain";
    case ErrorCategory::kUpdate: return "update";
    case ErrorCategory::kState: return "state";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kUndefined: return "undefined";
  }
  return "unknown";
}

std::string_view to_string(NoiseClass c) {
  switch (c) {
    case NoiseClass::kClean: return "clean";
    case NoiseClass::kInactive: return "inactive";
    case NoiseClass::kActive: return "active";
  }
  return "unknown";
}

NoiseClass noise_class_from_string(std::string_view s) {
  if (s == "clean") return NoiseClass::kClean;
  if (s == "inactive") return NoiseClass::kInactive;
  if (s == "active") return NoiseClass::kActive;
  throw ConfigError("unknown noise class '" + std::string(s) + "'");
}

std::string label_to_string(AnswerId label) {
  return label == kInfeasible ? std::string("infeasible") : std::to_string(label);
}

}  // namespace olrsim
