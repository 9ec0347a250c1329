#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "egs/optimizer.hpp"

namespace egs {

// Sidecar metadata stored in the checkpoint's META block. `extra` keys are
// written as `META <key> <value>` lines (sorted) and carry enough of the run
// configuration to rebuild the policy without the original config file.
struct CheckpointMeta {
  std::uint64_t step{0};
  std::uint64_t seed{0};
  std::string config_hash;  // hex
  std::map<std::string, std::string> extra;
};

// Text format, exact round-trip:
//   EGS-CKPT v1
//   PARAM <name> <ndim> <dims...>
//   <row-major shortest round-trip decimals, one row per line>
//   META
//   step <n> / seed <n> / config_hash <hex> / <key> <value>...
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store,
                     const CheckpointMeta& meta);

CheckpointMeta load_checkpoint(const std::filesystem::path& path, ParameterStore& store);

}  // namespace egs
