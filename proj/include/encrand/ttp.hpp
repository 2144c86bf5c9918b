// The computing-node layer: runtime selection, packet collection,
// pool-driven reassembly and the announced aggregate.
//
// Selection reduces a digest of all party seeds plus a session nonce,
// so no single entity can predict or steer which node computes. The
// chosen node recognizes each packet's function by trial decryption,
// groups by block tag, and returns blocks in tag order; party order is
// unavailable to it by construction.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "encrand/block.hpp"
#include "encrand/config.hpp"
#include "encrand/errors.hpp"
#include "encrand/mask_pool.hpp"
#include "encrand/rng.hpp"

namespace encrand {

struct TtpNode {
  uint32_t ttp_id = 0;
  FunctionPool pool;  // identical copy on every node
  // Session shape, fixed by the computing layer for all parties.
  uint32_t n = 0;
  uint32_t packets_per_party = 0;
  uint32_t packet_size = 0;
  std::vector<EncryptedPacket> inbox;

  bool operator==(const TtpNode&) const = default;
};

struct PublicResult {
  AggregateKind aggregate_kind = AggregateKind::kSum;
  std::vector<uint64_t> values;
  uint32_t n_blocks = 0;
  bool announced = false;

  bool operator==(const PublicResult&) const = default;
};

/// Digest of all party seeds plus the session nonce; computable only
/// once every party has contributed its share.
inline uint64_t combine_party_seeds(std::span<const uint64_t> party_seeds, uint64_t nonce) {
  ByteWriter w;
  w.str("select-ttp");
  w.u64(party_seeds.size());
  for (uint64_t s : party_seeds) w.u64(s);
  w.u64(nonce);
  return w.digest64();
}

/// Deterministic uniform index in [0, m) from the combined seed.
inline uint32_t select_ttp(uint32_t m, uint64_t combined_seed) {
  if (m == 0) throw ConfigError("computing-node pool must not be empty");
  SplitMix64 rng(combined_seed);
  return static_cast<uint32_t>(rng.below(m));
}

inline TtpNode make_ttp(uint32_t ttp_id, FunctionPool pool, uint32_t n,
                        uint32_t packets_per_party, uint32_t packet_size) {
  TtpNode ttp;
  ttp.ttp_id = ttp_id;
  ttp.pool = std::move(pool);
  ttp.n = n;
  ttp.packets_per_party = packets_per_party;
  ttp.packet_size = packet_size;
  return ttp;
}

/// Takes delivery of the full packet set. Storage is unbounded; the
/// count and the fixed packet size are checked, nothing else.
inline TtpNode collect(TtpNode ttp, std::vector<EncryptedPacket> packets) {
  const uint64_t expected = static_cast<uint64_t>(ttp.n) * ttp.packets_per_party;
  if (packets.size() != expected) {
    throw IncompleteCollection("expected " + std::to_string(expected) + " packets, got " +
                               std::to_string(packets.size()));
  }
  for (const auto& packet : packets) {
    if (packet.masked_payload.size() != ttp.packet_size) {
      throw ConfigError("assumption 9: packet sizes must be equal (got " +
                            std::to_string(packet.masked_payload.size()) + ", expected " +
                            std::to_string(ttp.packet_size) + ")",
                        9);
    }
  }
  ttp.inbox = std::move(packets);
  return ttp;
}

/// Decodes the inbox against the pool and reassembles the blocks,
/// returned in block_tag order. Any party-correlated ordering would
/// itself be a linkage channel.
inline std::vector<DataBlock> reassemble(const TtpNode& ttp) {
  std::map<uint64_t, std::vector<const EncryptedPacket*>> groups;
  for (const auto& packet : ttp.inbox) groups[packet.block_tag].push_back(&packet);

  std::vector<DataBlock> blocks;
  blocks.reserve(groups.size());
  for (auto& [tag, group] : groups) {
    if (group.size() > ttp.packets_per_party) {
      throw TagCollision("block tag " + std::to_string(tag) + " carries " +
                         std::to_string(group.size()) + " packets; two blocks collided");
    }
    if (group.size() < ttp.packets_per_party) {
      throw IncompleteBlock("block tag " + std::to_string(tag) + " is missing packets");
    }
    // Arrival order must not matter; canonicalize before decoding.
    std::sort(group.begin(), group.end(), [](const EncryptedPacket* a, const EncryptedPacket* b) {
      return a->packet_index < b->packet_index;
    });
    std::vector<Packet> plain;
    plain.reserve(group.size());
    for (const EncryptedPacket* packet : group) {
      plain.push_back(trial_decrypt(ttp.pool, *packet).second);
    }
    blocks.push_back(depacketize(plain));
  }
  return blocks;
}

namespace detail {

inline uint64_t checked_add(uint64_t a, uint64_t b) {
  uint64_t sum = a + b;
  if (sum < a) throw OverflowError("64-bit sum overflow while aggregating");
  return sum;
}

}  // namespace detail

/// Elementwise SUM / MEAN (floor) / MIN / MAX across the blocks.
inline PublicResult compute_aggregate(const std::vector<DataBlock>& blocks,
                                      AggregateKind kind) {
  if (blocks.empty()) throw ShapeError("no blocks to aggregate");
  const size_t width = blocks.front().values.size();
  for (const auto& block : blocks) {
    if (block.values.size() != width) {
      throw ShapeError("blocks carry value vectors of different lengths");
    }
  }

  PublicResult result;
  result.aggregate_kind = kind;
  result.n_blocks = static_cast<uint32_t>(blocks.size());
  result.values.assign(width, 0);
  for (size_t i = 0; i < width; ++i) {
    uint64_t acc = blocks.front().values[i];
    for (size_t b = 1; b < blocks.size(); ++b) {
      uint64_t v = blocks[b].values[i];
      switch (kind) {
        case AggregateKind::kSum:
        case AggregateKind::kMean:
          acc = detail::checked_add(acc, v);
          break;
        case AggregateKind::kMin:
          acc = std::min(acc, v);
          break;
        case AggregateKind::kMax:
          acc = std::max(acc, v);
          break;
      }
    }
    if (kind == AggregateKind::kMean) acc /= blocks.size();
    result.values[i] = acc;
  }
  result.announced = true;
  return result;
}

inline std::vector<uint8_t> canonical_bytes(const PublicResult& result) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(result.aggregate_kind));
  w.u32(result.n_blocks);
  w.u8(result.announced ? 1 : 0);
  w.u64(result.values.size());
  for (uint64_t v : result.values) w.u64(v);
  return w.take();
}

}  // namespace encrand
