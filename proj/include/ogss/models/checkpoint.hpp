#pragma once

#include <filesystem>
#include <string>

#include "ogss/models/blunder.hpp"
#include "ogss/models/policy.hpp"

namespace ogss::models {

// File layout:
//   ogss-checkpoint <version>
//   arch <descriptor>
//   tensors <count>
//   <name> <d0>,<d1>,...        (one line per tensor, in parameter order)
//   payload <bytes>
//   <little-endian float32 values of every tensor, in order>
inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public Error {
 public:
  enum class Kind { Io, Format, Version, Arch, Shape, Truncated };
  CheckpointError(Kind kind, const std::string& operation, const std::string& message)
      : Error("models", operation, message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

void save_checkpoint(const PolicyModel& model, const std::filesystem::path& path);
void save_checkpoint(const BlunderModel& model, const std::filesystem::path& path);

PolicyModel load_policy_checkpoint(const std::filesystem::path& path);
BlunderModel load_blunder_checkpoint(const std::filesystem::path& path);

}  // namespace ogss::models
