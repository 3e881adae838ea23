#pragma once

// Agent checkpoints: a JSON document holding the run configuration, the
// training position, and every network and optimizer array. Reals are written
// in shortest round-trip form, so load(save(x)) is bit-identical.

#include <cstdint>
#include <string>

#include "goats/config.hpp"
#include "goats/sac.hpp"

namespace goats {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointVersion;
  RunConfig config;
  int episode = 0;
  long env_steps = 0;
  std::uint64_t seed = 0;
  SacAgent agent;
};

std::string checkpoint_to_string(const Checkpoint& ckpt);
/// Throws Error(Version) on a format mismatch and Error(Io) on malformed input.
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace goats
