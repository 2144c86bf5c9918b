// Data blocks and their split into fixed-size packets.
//
// Serialized block layout: an 8-byte little-endian byte-length prefix,
// the 64-bit values little-endian, then zero padding up to exactly
// X * packet_size bytes. The prefix makes depacketize unambiguous in
// the presence of padding.

#pragma once

#include <cstdint>
#include <vector>

#include "encrand/errors.hpp"
#include "encrand/packet.hpp"

namespace encrand {

struct DataBlock {
  std::vector<uint64_t> values;

  bool operator==(const DataBlock&) const = default;
};

inline std::vector<uint8_t> serialize_block(const DataBlock& block, uint32_t packets_per_party,
                                            uint32_t packet_size) {
  const uint64_t data_len = 8ull * block.values.size();
  const uint64_t capacity = static_cast<uint64_t>(packets_per_party) * packet_size;
  if (8 + data_len > capacity) {
    throw BlockOverflow("serialized block does not fit " +
                        std::to_string(packets_per_party) + " packets of " +
                        std::to_string(packet_size) + " bytes");
  }
  std::vector<uint8_t> out;
  out.reserve(capacity);
  ByteWriter w;
  w.u64(data_len);
  for (uint64_t v : block.values) w.u64(v);
  out = w.take();
  out.resize(capacity, 0);
  return out;
}

inline DataBlock deserialize_block(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 8) throw CorruptBlock("block shorter than its length prefix");
  uint64_t data_len = 0;
  for (int i = 0; i < 8; ++i) data_len |= static_cast<uint64_t>(bytes[i]) << (8 * i);
  if (data_len > bytes.size() - 8) throw CorruptBlock("length prefix exceeds available bytes");
  if (data_len % 8 != 0) throw CorruptBlock("length prefix is not a whole number of values");
  DataBlock block;
  block.values.resize(data_len / 8);
  for (size_t v = 0; v < block.values.size(); ++v) {
    uint64_t word = 0;
    for (int i = 0; i < 8; ++i) {
      word |= static_cast<uint64_t>(bytes[8 + 8 * v + i]) << (8 * i);
    }
    block.values[v] = word;
  }
  return block;
}

/// Splits a block into exactly `packets_per_party` packets of
/// `packet_size` bytes, indices 0..X-1, all under one block tag.
inline std::vector<Packet> packetize(const DataBlock& block, uint32_t packets_per_party,
                                     uint32_t packet_size, uint64_t block_tag) {
  if (packets_per_party == 0) throw ConfigError("need at least one packet per party");
  if (packet_size == 0) throw ConfigError("packet size must be positive");
  std::vector<uint8_t> bytes = serialize_block(block, packets_per_party, packet_size);
  std::vector<Packet> packets;
  packets.reserve(packets_per_party);
  for (uint32_t i = 0; i < packets_per_party; ++i) {
    std::vector<uint8_t> payload(bytes.begin() + static_cast<size_t>(i) * packet_size,
                                 bytes.begin() + static_cast<size_t>(i + 1) * packet_size);
    packets.push_back(make_packet(block_tag, i, std::move(payload)));
  }
  return packets;
}

/// Inverse of packetize: concatenates payloads in index order, strips
/// the padding, returns the block.
inline DataBlock depacketize(const std::vector<Packet>& packets) {
  if (packets.empty()) throw IncompleteBlock("no packets to reassemble");
  const uint64_t tag = packets.front().block_tag;
  const size_t count = packets.size();
  std::vector<const Packet*> by_index(count, nullptr);
  for (const auto& p : packets) {
    if (p.block_tag != tag) throw IncompleteBlock("packets from different blocks");
    if (p.packet_index >= count || by_index[p.packet_index] != nullptr) {
      throw IncompleteBlock("packet indices do not cover the block exactly once");
    }
    by_index[p.packet_index] = &p;
  }
  std::vector<uint8_t> bytes;
  for (const Packet* p : by_index) {
    bytes.insert(bytes.end(), p->payload.begin(), p->payload.end());
  }
  return deserialize_block(bytes);
}

}  // namespace encrand
