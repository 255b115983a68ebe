#pragma once

#include <string>

#include "hoie/numerics/parameters.hpp"

namespace hoie::train {

// `<path>.json` lists names, shapes and offsets plus the config echo and seed;
// `<path>.bin` holds the float64 values back to back.
void save_checkpoint(const std::string& path, const num::ParameterStore& store, const std::string& config_json,
                     std::uint64_t seed);

struct CheckpointInfo {
  std::string config_json;
  std::uint64_t seed = 0;
};

// Reads a manifest without touching any parameters.
CheckpointInfo read_checkpoint_info(const std::string& path);
// Fills every parameter of `store` by name. Throws std::runtime_error on a
// missing name, a shape mismatch or a truncated blob.
CheckpointInfo load_checkpoint(const std::string& path, num::ParameterStore& store);

}  // namespace hoie::train
