#include "comatcher/core/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "comatcher/core/error.h"

namespace comatcher {
namespace {

template <typename T>
T ToLittleEndian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

void PutU32(std::string* out, uint32_t value) {
  value = ToLittleEndian(value);
  out->append(reinterpret_cast<const char*>(&value), sizeof(value));
}

void PutF64(std::string* out, double value) {
  uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  bits = ToLittleEndian(bits);
  out->append(reinterpret_cast<const char*>(&bits), sizeof(bits));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  void Take(void* dst, size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw DataError("truncated-file", "checkpoint ends early");
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  uint32_t U32() {
    uint32_t v;
    Take(&v, sizeof(v));
    return ToLittleEndian(v);
  }
  double F64() {
    uint64_t bits;
    Take(&bits, sizeof(bits));
    bits = ToLittleEndian(bits);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string String(size_t n) {
    std::string s(n, '\0');
    Take(s.data(), n);
    return s;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const CheckpointHeader& header,
                                const ParamStore& params) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutU32(&out, kCheckpointVersion);
  PutU32(&out, header.dim);
  PutU32(&out, header.layers);
  PutU32(&out, header.heads);
  const auto names = params.Names();
  PutU32(&out, static_cast<uint32_t>(names.size()));
  for (const std::string& name : names) {
    const Tensor2& value = params.value(name);
    PutU32(&out, static_cast<uint32_t>(name.size()));
    out.append(name);
    PutU32(&out, static_cast<uint32_t>(value.rows()));
    PutU32(&out, static_cast<uint32_t>(value.cols()));
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      PutF64(&out, static_cast<double>(value.data()[k]));
    }
  }
  return out;
}

ParamStore DeserializeCheckpoint(const std::string& bytes,
                                 CheckpointHeader* header) {
  Reader reader(bytes);
  char magic[4];
  if (bytes.size() < sizeof(magic)) {
    throw DataError("bad-magic", "file too short");
  }
  reader.Take(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError("bad-magic");
  }
  const uint32_t version = reader.U32();
  if (version != kCheckpointVersion) {
    throw DataError("bad-version", std::to_string(version));
  }
  CheckpointHeader h;
  h.dim = reader.U32();
  h.layers = reader.U32();
  h.heads = reader.U32();
  const uint32_t count = reader.U32();
  ParamStore params;
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = reader.String(reader.U32());
    const uint32_t rows = reader.U32();
    const uint32_t cols = reader.U32();
    Tensor2 value(rows, cols);
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      value.data()[k] = static_cast<Scalar>(reader.F64());
    }
    params.Add(name, std::move(value));
  }
  if (!reader.AtEnd()) {
    throw DataError("trailing-bytes", "checkpoint has extra data");
  }
  if (header != nullptr) {
    *header = h;
  }
  return params;
}

void WriteCheckpoint(const std::string& path, const CheckpointHeader& header,
                     const ParamStore& params) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw DataError("io-error", "cannot write " + path);
  }
  const std::string bytes = SerializeCheckpoint(header, params);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) {
    throw DataError("io-error", "failed writing " + path);
  }
}

ParamStore ReadCheckpoint(const std::string& path, CheckpointHeader* header) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw DataError("io-error", "cannot read " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return DeserializeCheckpoint(buffer.str(), header);
}

}  // namespace comatcher
