// Session state and the synchronized random dissemination rounds.
//
// Each round reassigns every held packet to an independently uniform
// destination party (self allowed), so after one round possession
// carries no information about origin. The whole trajectory is a pure
// function of (config, blocks, master_seed): one shared round seed
// stands in for the runtime-initiated random function the parties
// would synchronize on.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "encrand/block.hpp"
#include "encrand/config.hpp"
#include "encrand/mask_pool.hpp"
#include "encrand/packet.hpp"
#include "encrand/rng.hpp"

namespace encrand {

struct PartyState {
  uint32_t party_id = 0;
  DataBlock block;              // the party's private input
  MaskFunction drawn_function;  // known only to this party
  uint64_t block_tag = 0;
  std::vector<EncryptedPacket> held;  // packets currently in possession

  bool operator==(const PartyState&) const = default;
};

struct SessionState {
  SessionConfig config;
  std::vector<PartyState> parties;
  uint32_t round = 0;           // completed dissemination rounds
  uint64_t rng_round_seed = 0;  // shared seed all parties shuffle from

  bool operator==(const SessionState&) const = default;

  // Omniscient simulator view; never reachable from any message.
  std::map<uint64_t, uint32_t> origin_by_tag() const {
    std::map<uint64_t, uint32_t> origins;
    for (const auto& party : parties) origins[party.block_tag] = party.party_id;
    return origins;
  }
};

/// Called for every packet movement a round makes; lets the session
/// driver mirror movements onto its channel layer.
using MoveObserver =
    std::function<void(uint32_t from, uint32_t to, const EncryptedPacket&)>;

/// Sets up a session: every party blind-draws a distinct function,
/// tags its block with a fresh random tag, and holds its own encrypted
/// packets. `rig_tags` overrides the derived tags (test scaffolding for
/// forced tag collisions).
inline SessionState init_session(const SessionConfig& config,
                                 const std::vector<DataBlock>& blocks,
                                 const std::vector<uint64_t>* rig_tags = nullptr) {
  if (blocks.size() != config.n) {
    throw ConfigError("expected " + std::to_string(config.n) + " data blocks, got " +
                      std::to_string(blocks.size()));
  }
  if (rig_tags && rig_tags->size() != config.n) {
    throw ConfigError("tag override must name one tag per party");
  }

  FunctionPool pool = build_pool(config.effective_pool_size(),
                                 derive_seed(config.master_seed, "pool"));

  SessionState state;
  state.config = config;
  state.round = 0;
  state.rng_round_seed = derive_seed(config.master_seed, "rounds");
  state.parties.reserve(config.n);

  std::set<uint32_t> drawn;
  for (uint32_t i = 0; i < config.n; ++i) {
    PartyState party;
    party.party_id = i;
    party.block = blocks[i];
    party.drawn_function =
        draw_function(pool, derive_seed(config.master_seed, "draw", i), drawn);
    drawn.insert(party.drawn_function.id);

    if (rig_tags) {
      party.block_tag = (*rig_tags)[i];
    } else {
      SplitMix64 tag_rng(derive_seed(config.master_seed, "tag", i));
      party.block_tag = tag_rng.next();
    }

    std::vector<Packet> packets = packetize(party.block, config.packets_per_party,
                                            config.packet_size, party.block_tag);
    party.held.reserve(packets.size());
    for (const Packet& p : packets) {
      party.held.push_back(encrypt_packet(party.drawn_function, p));
    }
    state.parties.push_back(std::move(party));
  }
  return state;
}

/// One synchronized round: every held packet moves to an independently
/// uniform destination. Packet multiset is conserved; the round counter
/// advances.
inline SessionState shuffle_round(SessionState state, const MoveObserver& observer = {}) {
  const uint32_t n = static_cast<uint32_t>(state.parties.size());
  SplitMix64 rng(derive_seed(state.rng_round_seed, "round", state.round));
  std::vector<std::vector<EncryptedPacket>> next(n);
  for (uint32_t from = 0; from < n; ++from) {
    for (EncryptedPacket& packet : state.parties[from].held) {
      uint32_t to = static_cast<uint32_t>(rng.below(n));
      if (observer) observer(from, to, packet);
      next[to].push_back(std::move(packet));
    }
  }
  for (uint32_t i = 0; i < n; ++i) state.parties[i].held = std::move(next[i]);
  state.round += 1;
  return state;
}

inline SessionState run_dissemination(SessionState state, uint32_t rounds,
                                      const MoveObserver& observer = {}) {
  for (uint32_t r = 0; r < rounds; ++r) state = shuffle_round(std::move(state), observer);
  return state;
}

/// Union of all parties' held packets, in holder order.
inline std::vector<EncryptedPacket> all_held_packets(const SessionState& state) {
  std::vector<EncryptedPacket> packets;
  for (const auto& party : state.parties) {
    packets.insert(packets.end(), party.held.begin(), party.held.end());
  }
  return packets;
}

inline uint64_t state_digest(const SessionState& state) {
  ByteWriter w;
  config_bytes(w, state.config);
  w.u32(state.round);
  w.u64(state.rng_round_seed);
  for (const auto& party : state.parties) {
    w.u32(party.party_id);
    w.u64(party.block_tag);
    w.u32(party.drawn_function.id);
    w.u64(party.drawn_function.seed);
    w.u64(party.block.values.size());
    for (uint64_t v : party.block.values) w.u64(v);
    w.u64(party.held.size());
    for (const auto& packet : party.held) w.u64(packet_digest(packet));
  }
  return w.digest64();
}

}  // namespace encrand
