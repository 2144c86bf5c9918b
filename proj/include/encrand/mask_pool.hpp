// The pool of encrypting functions, blind draws, and additive masking.
//
// A mask function is a seed for a deterministic byte stream keyed by
// (function seed, block_tag, packet_index). Encryption adds the stream
// to the payload bytewise mod 256; decryption subtracts it. Every
// computing node holds an identical copy of the pool and recognizes the
// right function by trial decryption against the cleartext checksum, so
// parties never have to announce which function they drew.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "encrand/digest.hpp"
#include "encrand/errors.hpp"
#include "encrand/packet.hpp"
#include "encrand/rng.hpp"

namespace encrand {

struct MaskFunction {
  uint32_t id = 0;     // position in the pool
  uint64_t seed = 0;   // keys the mask stream

  bool operator==(const MaskFunction&) const = default;
};

struct FunctionPool {
  uint64_t master_seed = 0;
  std::vector<MaskFunction> functions;

  size_t size() const { return functions.size(); }

  bool operator==(const FunctionPool&) const = default;
};

/// Builds a pool of `size` functions with pairwise-distinct seeds. Pure
/// in (size, master_seed): every node rebuilds the identical pool.
inline FunctionPool build_pool(size_t size, uint64_t master_seed) {
  if (size == 0) throw ConfigError("function pool must not be empty");
  FunctionPool pool;
  pool.master_seed = master_seed;
  pool.functions.reserve(size);
  std::set<uint64_t> used;
  uint64_t salt = 0;
  for (uint32_t id = 0; id < size; ++id) {
    uint64_t seed = derive_seed(master_seed, "pool-fn", id, salt);
    while (!used.insert(seed).second) {
      seed = derive_seed(master_seed, "pool-fn", id, ++salt);
    }
    pool.functions.push_back(MaskFunction{id, seed});
  }
  return pool;
}

inline uint64_t pool_digest(const FunctionPool& pool) {
  ByteWriter w;
  w.u64(pool.master_seed);
  w.u64(pool.functions.size());
  for (const auto& fn : pool.functions) {
    w.u32(fn.id);
    w.u64(fn.seed);
  }
  return w.digest64();
}

/// Blind draw: uniform over the ids not yet taken. The caller sees only
/// the returned function, never the remaining pool contents.
inline MaskFunction draw_function(const FunctionPool& pool, uint64_t draw_seed,
                                  const std::set<uint32_t>& already_drawn) {
  std::vector<uint32_t> remaining;
  remaining.reserve(pool.size());
  for (const auto& fn : pool.functions) {
    if (!already_drawn.contains(fn.id)) remaining.push_back(fn.id);
  }
  if (remaining.empty()) throw PoolExhausted("every pool function is already drawn");
  SplitMix64 rng(derive_seed(draw_seed, "blind-draw"));
  uint32_t id = remaining[rng.below(remaining.size())];
  return pool.functions[id];
}

/// Deterministic pseudorandom mask bytes for one packet position.
inline std::vector<uint8_t> mask_values(const MaskFunction& fn, uint64_t block_tag,
                                        uint32_t packet_index, size_t len) {
  ByteWriter key;
  key.u64(fn.seed);
  key.u64(block_tag);
  key.u32(packet_index);
  key.str("mask-stream");
  SplitMix64 stream(key.digest64());
  std::vector<uint8_t> mask(len);
  size_t i = 0;
  while (i < len) {
    uint64_t word = stream.next();
    for (int b = 0; b < 8 && i < len; ++b, ++i) {
      mask[i] = static_cast<uint8_t>(word >> (8 * b));
    }
  }
  return mask;
}

/// masked[i] = (payload[i] + mask[i]) mod 256; header fields copied.
inline EncryptedPacket encrypt_packet(const MaskFunction& fn, const Packet& p) {
  std::vector<uint8_t> mask = mask_values(fn, p.block_tag, p.packet_index, p.payload.size());
  EncryptedPacket e;
  e.block_tag = p.block_tag;
  e.packet_index = p.packet_index;
  e.checksum = p.checksum;
  e.masked_payload.resize(p.payload.size());
  for (size_t i = 0; i < p.payload.size(); ++i) {
    e.masked_payload[i] = static_cast<uint8_t>(p.payload[i] + mask[i]);
  }
  return e;
}

namespace detail {

inline std::optional<Packet> try_decrypt(const MaskFunction& fn, const EncryptedPacket& e) {
  std::vector<uint8_t> mask = mask_values(fn, e.block_tag, e.packet_index, e.masked_payload.size());
  Packet p;
  p.block_tag = e.block_tag;
  p.packet_index = e.packet_index;
  p.checksum = e.checksum;
  p.payload.resize(e.masked_payload.size());
  for (size_t i = 0; i < e.masked_payload.size(); ++i) {
    p.payload[i] = static_cast<uint8_t>(e.masked_payload[i] - mask[i]);
  }
  if (payload_checksum(p.payload) != e.checksum) return std::nullopt;
  return p;
}

}  // namespace detail

inline Packet decrypt_packet(const MaskFunction& fn, const EncryptedPacket& e) {
  auto p = detail::try_decrypt(fn, e);
  if (!p) throw WrongFunction("recovered payload fails the packet checksum");
  return *p;
}

/// Tries every pool function and returns the unique match. Collisions
/// abort rather than guess; with a 32-bit checksum the expected
/// ambiguity rate is about pool_size / 2^32 per packet for payloads of
/// at least a few bytes (shorter payloads leave the checksum less room
/// to discriminate).
inline std::pair<uint32_t, Packet> trial_decrypt(const FunctionPool& pool,
                                                 const EncryptedPacket& e) {
  std::optional<std::pair<uint32_t, Packet>> found;
  for (const auto& fn : pool.functions) {
    if (auto p = detail::try_decrypt(fn, e)) {
      if (found) throw AmbiguousDecrypt("checksum matches more than one pool function");
      found.emplace(fn.id, std::move(*p));
    }
  }
  if (!found) throw NoCandidate("no pool function decodes the packet");
  return *found;
}

}  // namespace encrand
