#pragma once

#include <string>
#include <vector>

#include "spkret/features.hpp"

namespace spkret {

/// SPKFTR1 feature file:
///   8-byte magic "SPKFTR1\0", then little-endian:
///   u32 N, u32 D, N*D IEEE-754 32-bit floats row-major,
///   u32 byte length of the UTF-8 segment id, id bytes.
/// Frame times are not part of the format; loaded matrices have none.
void save_features(const std::string& path, const FrameMatrix& fm);
FrameMatrix load_features(const std::string& path);

/// Loads every feature file in a directory (files ending in .spkftr),
/// sorted by filename for a stable segment order.
std::vector<FrameMatrix> load_feature_dir(const std::string& dir);

}  // namespace spkret
