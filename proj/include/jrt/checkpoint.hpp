#pragma once

#include <string>

#include "jrt/tensor.hpp"

namespace jrt {

// Checkpoint files: a "JRTCKPT v1" line, one manifest line per tensor
// (`name dims... byte_offset`), a blank line, then the concatenated raw
// little-endian float32 payloads. Offsets are relative to the payload start.

void save_checkpoint(const ParamSet& params, const std::string& path);
ParamSet load_checkpoint(const std::string& path);

/// Raw bytes of a file; used by freezing-protocol checks.
std::string file_bytes(const std::string& path);

}  // namespace jrt
