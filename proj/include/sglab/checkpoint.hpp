#pragma once

#include <string>
#include <vector>

#include "sglab/nn.hpp"

namespace sglab {

// Parameter checkpoint, magic "SGNN1". Layout (all integers 32-bit little
// endian, floats IEEE-754 little endian):
//   "SGNN1"
//   u32 record_count
//   per record:
//     u32 tag_length, tag bytes
//     u32 ndim, ndim x u32 dims
//     numel x f32 payload
// Save/load round-trips are bitwise exact; load validates tags and shapes
// against the receiving parameter registry.
void save_checkpoint(const std::string& path, const std::vector<nn::ParamRef>& params);
void load_checkpoint(const std::string& path, std::vector<nn::ParamRef>& params);

}  // namespace sglab
