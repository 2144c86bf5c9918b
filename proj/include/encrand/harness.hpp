// End-to-end protocol driver: orchestrates one session over the secure
// bus, records the transcript, and emits analysis artifacts.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "encrand/block.hpp"
#include "encrand/bus.hpp"
#include "encrand/config.hpp"
#include "encrand/dissemination.hpp"
#include "encrand/errors.hpp"
#include "encrand/transcript.hpp"
#include "encrand/ttp.hpp"

namespace encrand {

// Fault injection for induced-failure tests. Faults rig the session,
// not the checks: the protocol must notice on its own.
enum class FaultKind : uint8_t {
  kNone,
  kDropPacketBeforeCollection,
  kDuplicatePacketBeforeCollection,
  kSharedBlockTag,
};

struct RunOptions {
  FaultKind fault = FaultKind::kNone;
};

struct RunResult {
  Transcript transcript;
  std::optional<PublicResult> result;
  SessionState final_state;
  uint32_t selected_ttp = 0;
  SecureBus bus;
  bool ok = false;
};

/// Deterministic per-party input blocks sized to fill the configured
/// packet budget. Values stay below 2^32 so aggregate sums cannot
/// overflow at simulated party counts.
inline std::vector<DataBlock> synthetic_blocks(const SessionConfig& config) {
  const uint64_t capacity =
      static_cast<uint64_t>(config.packets_per_party) * config.packet_size;
  const uint64_t values_per_block = capacity < 8 ? 0 : (capacity - 8) / 8;
  std::vector<DataBlock> blocks(config.n);
  for (uint32_t i = 0; i < config.n; ++i) {
    SplitMix64 rng(derive_seed(config.master_seed, "block", i));
    blocks[i].values.resize(values_per_block);
    for (uint64_t& v : blocks[i].values) v = rng.below(1ull << 32);
  }
  return blocks;
}

/// The oracle side of every end-to-end check: the aggregate computed
/// directly on the plaintext inputs, no protocol involved.
inline PublicResult plaintext_aggregate(const std::vector<DataBlock>& blocks,
                                        AggregateKind kind) {
  return compute_aggregate(blocks, kind);
}

/// Runs the protocol end to end. Module errors abort the session and
/// are recorded in the transcript with the failing step; configuration
/// errors throw before anything runs.
inline RunResult run_protocol(const SessionConfig& raw_config,
                              const std::vector<DataBlock>& blocks,
                              const RunOptions& options = {}) {
  const SessionConfig config = validate_config(raw_config);

  RunResult rr;
  rr.transcript.config = config;
  auto phase = [&rr](uint32_t step, const std::string& actor, uint64_t digest,
                     const std::string& detail) {
    rr.transcript.events.push_back({step, "phase", actor, digest, 0, detail});
  };

  uint32_t current_step = 1;
  try {
    // Step 1: the party layer.
    {
      ByteWriter w;
      w.u32(config.n);
      phase(1, Actor::coordinator().str(), w.digest64(),
            std::to_string(config.n) + " parties");
    }

    // Step 2: the function pool, replicated on every computing node.
    current_step = 2;
    FunctionPool pool =
        build_pool(config.effective_pool_size(), derive_seed(config.master_seed, "pool"));
    phase(2, Actor::pool().str(), pool_digest(pool),
          std::to_string(pool.size()) + " functions");

    // Steps 3 and 4: blind draws, packetize, mask. init_session does the
    // state work; the bus carries the draw round trips.
    current_step = 3;
    std::optional<std::vector<uint64_t>> rig_tags;
    if (options.fault == FaultKind::kSharedBlockTag) {
      std::vector<uint64_t> tags(config.n);
      for (uint32_t i = 0; i < config.n; ++i) {
        SplitMix64 tag_rng(derive_seed(config.master_seed, "tag", i));
        tags[i] = tag_rng.next();
      }
      if (config.n >= 2) tags[1] = tags[0];
      rig_tags = std::move(tags);
    }
    SessionState state = init_session(config, blocks, rig_tags ? &*rig_tags : nullptr);

    {
      ByteWriter draws;
      for (uint32_t i = 0; i < config.n; ++i) {
        uint64_t req = derive_seed(config.master_seed, "draw", i);
        uint64_t id = rr.bus.send(Actor::party(i), Actor::pool(), MessageKind::kDrawRequest, req);
        rr.bus.deliver(id, Actor::pool());
        ByteWriter fn_bytes;
        fn_bytes.u32(state.parties[i].drawn_function.id);
        fn_bytes.u64(state.parties[i].drawn_function.seed);
        uint64_t resp = rr.bus.send(Actor::pool(), Actor::party(i), MessageKind::kDrawResponse,
                                    fn_bytes.digest64());
        rr.bus.deliver(resp, Actor::party(i));
        draws.u64(fn_bytes.digest64());
      }
      phase(3, Actor::pool().str(), draws.digest64(), "functions assigned");
    }
    current_step = 4;
    {
      ByteWriter masked;
      for (const auto& party : state.parties) {
        for (const auto& packet : party.held) masked.u64(packet_digest(packet));
      }
      phase(4, "parties", masked.digest64(), "blocks packetized and masked");
    }

    // Steps 5 and 6: the dissemination rounds.
    current_step = 5;
    const uint32_t rounds = config.effective_rounds();
    {
      ByteWriter w;
      w.u32(rounds);
      phase(5, "parties", w.digest64(), "dissemination of " + std::to_string(rounds) + " rounds");
    }
    for (uint32_t r = 0; r < rounds; ++r) {
      ByteWriter moves;
      MoveObserver observer = [&](uint32_t from, uint32_t to, const EncryptedPacket& packet) {
        uint64_t digest = packet_digest(packet);
        uint64_t id = rr.bus.send(Actor::party(from), Actor::party(to),
                                  MessageKind::kPacketForward, digest);
        rr.bus.deliver(id, Actor::party(to));
        moves.u32(from);
        moves.u32(to);
        moves.u64(digest);
      };
      state = shuffle_round(std::move(state), observer);
      rr.transcript.events.push_back(
          {5, "round", "parties", moves.digest64(), state.round, ""});
    }
    current_step = 6;
    phase(6, "parties", state_digest(state), "dissemination complete");

    // Step 7: runtime selection of the computing node.
    current_step = 7;
    std::vector<uint64_t> party_seeds(config.n);
    for (uint32_t i = 0; i < config.n; ++i) {
      party_seeds[i] = derive_seed(config.master_seed, "party-seed", i);
    }
    const uint64_t nonce = derive_seed(config.master_seed, "session-nonce");
    const uint64_t combined = combine_party_seeds(party_seeds, nonce);
    rr.selected_ttp = select_ttp(config.m, combined);
    {
      ByteWriter w;
      w.u32(rr.selected_ttp);
      for (uint32_t i = 0; i < config.n; ++i) {
        uint64_t id = rr.bus.send(Actor::coordinator(), Actor::party(i),
                                  MessageKind::kTtpAnnouncement, w.digest64());
        rr.bus.deliver(id, Actor::party(i));
      }
      phase(7, Actor::coordinator().str(), w.digest64(),
            "selected ttp:" + std::to_string(rr.selected_ttp));
    }

    // Step 8: every party forwards what it holds to the selected node.
    current_step = 8;
    TtpNode ttp = make_ttp(rr.selected_ttp, pool, config.n, config.packets_per_party,
                           config.packet_size);
    std::vector<EncryptedPacket> packets;
    {
      for (const auto& party : state.parties) {
        for (const auto& packet : party.held) {
          uint64_t id = rr.bus.send(Actor::party(party.party_id), Actor::ttp(rr.selected_ttp),
                                    MessageKind::kPacketDelivery, packet_digest(packet));
          rr.bus.deliver(id, Actor::ttp(rr.selected_ttp));
          packets.push_back(packet);
        }
      }
      if (options.fault == FaultKind::kDropPacketBeforeCollection && !packets.empty()) {
        packets.pop_back();
      }
      if (options.fault == FaultKind::kDuplicatePacketBeforeCollection && !packets.empty()) {
        packets.push_back(packets.front());
      }
      ByteWriter w;
      for (const auto& packet : packets) w.u64(packet_digest(packet));
      ttp = collect(std::move(ttp), std::move(packets));
      phase(8, Actor::ttp(rr.selected_ttp).str(), w.digest64(),
            std::to_string(ttp.inbox.size()) + " packets collected");
    }

    // Step 9: decode and reassemble.
    current_step = 9;
    std::vector<DataBlock> reassembled = reassemble(ttp);
    {
      ByteWriter w;
      for (const auto& block : reassembled) {
        w.u64(block.values.size());
        for (uint64_t v : block.values) w.u64(v);
      }
      phase(9, Actor::ttp(rr.selected_ttp).str(), w.digest64(),
            std::to_string(reassembled.size()) + " blocks reassembled");
    }

    // Step 10: compute and announce.
    current_step = 10;
    PublicResult result = compute_aggregate(reassembled, config.aggregate);
    {
      uint64_t digest = fnv1a64(canonical_bytes(result));
      for (uint32_t i = 0; i < config.n; ++i) {
        uint64_t id = rr.bus.send(Actor::ttp(rr.selected_ttp), Actor::party(i),
                                  MessageKind::kResultAnnouncement, digest);
        rr.bus.deliver(id, Actor::party(i));
      }
      phase(10, Actor::ttp(rr.selected_ttp).str(), digest,
            "result announced (" + aggregate_name(result.aggregate_kind) + ")");
      rr.result = std::move(result);
    }

    rr.final_state = std::move(state);
    rr.ok = true;
  } catch (const Error& e) {
    rr.transcript.aborted = true;
    rr.transcript.abort_reason = e.what();
    rr.transcript.events.push_back(
        {current_step, "abort", Actor::coordinator().str(), 0, 0, e.what()});
    rr.ok = false;
  }
  return rr;
}

/// True iff the protocol result equals the aggregate computed directly
/// on the plaintext blocks. Failures leave the diff in the transcript.
inline bool verify_against_oracle(const SessionConfig& config,
                                  const std::vector<DataBlock>& blocks,
                                  const RunOptions& options = {},
                                  RunResult* out = nullptr) {
  RunResult rr = run_protocol(config, blocks, options);
  bool ok = rr.ok;
  if (ok) {
    PublicResult expected = plaintext_aggregate(blocks, config.aggregate);
    ok = rr.result.has_value() && rr.result->values == expected.values &&
         rr.result->n_blocks == expected.n_blocks;
    if (!ok) {
      rr.transcript.events.push_back({10, "abort", Actor::coordinator().str(), 0, 0,
                                      "protocol result differs from the plaintext aggregate"});
    }
  }
  if (out) *out = std::move(rr);
  return ok;
}

struct CurvePoint {
  uint32_t n = 0;
  uint32_t m = 0;
  uint32_t x = 0;
  uint32_t r = 0;
  double analytic = 0.0;
  std::optional<double> empirical;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

namespace detail {

inline std::string format_probability(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", p);
  return buf;
}

}  // namespace detail

inline std::string format_curve(const std::vector<CurvePoint>& points) {
  std::ostringstream out;
  out << "n,m,x,r,analytic,empirical,ci_low,ci_high\n";
  for (const CurvePoint& p : points) {
    out << p.n << ',' << p.m << ',' << p.x << ',' << p.r << ','
        << detail::format_probability(p.analytic) << ',';
    if (p.empirical) out << detail::format_probability(*p.empirical);
    out << ',';
    if (p.ci_low) out << detail::format_probability(*p.ci_low);
    out << ',';
    if (p.ci_high) out << detail::format_probability(*p.ci_high);
    out << '\n';
  }
  return out.str();
}

/// Writes the curve CSV: header plus one row per point, probabilities
/// with 10 significant digits, empirical columns empty when Monte
/// Carlo was not requested.
inline void emit_curve(const std::vector<CurvePoint>& points,
                       const std::filesystem::path& path) {
  if (points.empty()) throw ConfigError("refusing to emit an empty curve");
  std::string text = format_curve(points);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("writing " + path.string() + " failed");
}

inline std::vector<CurvePoint> parse_curve_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "n,m,x,r,analytic,empirical,ci_low,ci_high") {
    throw IoError("curve file is missing the expected header");
  }
  std::vector<CurvePoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 8) throw IoError("curve row with " + std::to_string(fields.size()) + " fields");
    CurvePoint p;
    p.n = detail::parse_u32("n", fields[0]);
    p.m = detail::parse_u32("m", fields[1]);
    p.x = detail::parse_u32("x", fields[2]);
    p.r = detail::parse_u32("r", fields[3]);
    p.analytic = std::stod(fields[4]);
    if (!fields[5].empty()) p.empirical = std::stod(fields[5]);
    if (!fields[6].empty()) p.ci_low = std::stod(fields[6]);
    if (!fields[7].empty()) p.ci_high = std::stod(fields[7]);
    points.push_back(p);
  }
  return points;
}

inline std::vector<CurvePoint> parse_curve(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open curve file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_curve_text(buf.str());
}

}  // namespace encrand
