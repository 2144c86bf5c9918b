// Packet and EncryptedPacket value types.
//
// Header fields (block_tag, packet_index, checksum) are the only
// cleartext a packet carries. Nothing in either type names a party or
// a pool function; the schema tests pin that down.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "encrand/digest.hpp"
#include "encrand/errors.hpp"

namespace encrand {

/// 32-bit plaintext checksum carried in the clear; the computing party
/// uses it to recognize which pool function decodes a packet.
inline uint32_t payload_checksum(std::span<const uint8_t> payload) {
  return fnv1a32(payload);
}

struct Packet {
  uint64_t block_tag = 0;
  uint32_t packet_index = 0;
  std::vector<uint8_t> payload;
  uint32_t checksum = 0;

  bool operator==(const Packet&) const = default;
};

inline Packet make_packet(uint64_t block_tag, uint32_t packet_index,
                          std::vector<uint8_t> payload) {
  Packet p;
  p.block_tag = block_tag;
  p.packet_index = packet_index;
  p.checksum = payload_checksum(payload);
  p.payload = std::move(payload);
  return p;
}

struct EncryptedPacket {
  uint64_t block_tag = 0;
  uint32_t packet_index = 0;
  std::vector<uint8_t> masked_payload;
  uint32_t checksum = 0;  // checksum of the plaintext payload

  bool operator==(const EncryptedPacket&) const = default;
};

inline std::vector<uint8_t> canonical_bytes(const Packet& p) {
  ByteWriter w;
  w.u64(p.block_tag);
  w.u32(p.packet_index);
  w.u32(p.checksum);
  w.bytes(p.payload);
  return w.take();
}

inline std::vector<uint8_t> canonical_bytes(const EncryptedPacket& e) {
  ByteWriter w;
  w.u64(e.block_tag);
  w.u32(e.packet_index);
  w.u32(e.checksum);
  w.bytes(e.masked_payload);
  return w.take();
}

inline uint64_t packet_digest(const EncryptedPacket& e) {
  return fnv1a64(canonical_bytes(e));
}

namespace detail {

inline std::string to_hex(std::span<const uint8_t> bytes) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

inline std::vector<uint8_t> from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw CorruptBlock("invalid hex digit in payload");
  };
  if (hex.size() % 2 != 0) throw CorruptBlock("odd hex payload length");
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace detail

// The wire form of an encrypted packet. These four fields are the whole
// schema; adding one would hand a linkage channel to every holder.
inline void to_json(nlohmann::json& j, const EncryptedPacket& e) {
  j = nlohmann::json{{"block_tag", e.block_tag},
                     {"packet_index", e.packet_index},
                     {"checksum", e.checksum},
                     {"masked_payload", detail::to_hex(e.masked_payload)}};
}

inline void from_json(const nlohmann::json& j, EncryptedPacket& e) {
  j.at("block_tag").get_to(e.block_tag);
  j.at("packet_index").get_to(e.packet_index);
  j.at("checksum").get_to(e.checksum);
  e.masked_payload = detail::from_hex(j.at("masked_payload").get<std::string>());
}

}  // namespace encrand
