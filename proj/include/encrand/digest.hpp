// FNV-1a digests and the canonical little-endian byte writer.
//
// Every digest in the library (packet checksums, payload digests in the
// trace, the transcript digest, the combined selection seed) is FNV-1a
// over a canonical little-endian serialization, so replays compare
// bit-exactly across platforms.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace encrand {

inline constexpr uint32_t kFnv32Basis = 0x811c9dc5u;
inline constexpr uint32_t kFnv32Prime = 0x01000193u;
inline constexpr uint64_t kFnv64Basis = 0xcbf29ce484222325ull;
inline constexpr uint64_t kFnv64Prime = 0x00000100000001b3ull;

inline uint32_t fnv1a32(std::span<const uint8_t> bytes,
                        uint32_t state = kFnv32Basis) {
  for (uint8_t b : bytes) {
    state ^= b;
    state *= kFnv32Prime;
  }
  return state;
}

inline uint64_t fnv1a64(std::span<const uint8_t> bytes,
                        uint64_t state = kFnv64Basis) {
  for (uint8_t b : bytes) {
    state ^= b;
    state *= kFnv64Prime;
  }
  return state;
}

// Appends integers little-endian and length-prefixes variable payloads,
// so a byte stream decodes to exactly one field sequence.
class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  void bytes(std::span<const uint8_t> v) {
    u64(v.size());
    out_.insert(out_.end(), v.begin(), v.end());
  }

  void str(std::string_view v) {
    u64(v.size());
    out_.insert(out_.end(), v.begin(), v.end());
  }

  std::span<const uint8_t> view() const { return out_; }
  std::vector<uint8_t> take() { return std::move(out_); }
  uint32_t digest32() const { return fnv1a32(out_); }
  uint64_t digest64() const { return fnv1a64(out_); }

 private:
  std::vector<uint8_t> out_;
};

}  // namespace encrand
