#pragma once

#include <cstdint>
#include <string>

#include "comatcher/core/param_store.h"

namespace comatcher {

// Binary checkpoint layout, all integers little-endian uint32:
//   "CMK1" | version | descriptor dim | layer count | head count | #params
//   then per parameter: name length | name bytes | rows | cols |
//   rows*cols float64 little-endian values in row-major order.
inline constexpr char kCheckpointMagic[4] = {'C', 'M', 'K', '1'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  uint32_t dim = 0;
  uint32_t layers = 0;
  uint32_t heads = 0;
};

void WriteCheckpoint(const std::string& path, const CheckpointHeader& header,
                     const ParamStore& params);

// Throws Error("bad-magic"), Error("bad-version") or Error("truncated-file").
ParamStore ReadCheckpoint(const std::string& path, CheckpointHeader* header);

std::string SerializeCheckpoint(const CheckpointHeader& header,
                                const ParamStore& params);
ParamStore DeserializeCheckpoint(const std::string& bytes,
                                 CheckpointHeader* header);

}  // namespace comatcher
