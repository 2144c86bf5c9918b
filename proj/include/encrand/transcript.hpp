// The transcript: a digest-stamped record of one protocol session,
// sufficient for bit-exact replay comparison.
//
// A successful session logs ten phase events, one per protocol step,
// plus one movement event per dissemination round. Payloads never
// appear in events; only their digests do.

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "encrand/config.hpp"
#include "encrand/digest.hpp"
#include "encrand/errors.hpp"

namespace encrand {

struct TranscriptEvent {
  uint32_t step = 0;           // protocol step 1..10
  std::string kind;            // "phase", "round" or "abort"
  std::string actor;
  uint64_t payload_digest = 0;
  uint32_t round = 0;          // set on "round" events
  std::string detail;

  bool operator==(const TranscriptEvent&) const = default;
};

struct Transcript {
  SessionConfig config;
  std::vector<TranscriptEvent> events;
  bool aborted = false;
  std::string abort_reason;

  bool operator==(const Transcript&) const = default;

  /// 64-bit digest of the canonical serialization. Pure in
  /// (config, blocks, master_seed): replays compare equal.
  uint64_t digest() const {
    ByteWriter w;
    config_bytes(w, config);
    w.u64(events.size());
    for (const TranscriptEvent& event : events) {
      w.u32(event.step);
      w.str(event.kind);
      w.str(event.actor);
      w.u64(event.payload_digest);
      w.u32(event.round);
      w.str(event.detail);
    }
    w.u8(aborted ? 1 : 0);
    w.str(abort_reason);
    return w.digest64();
  }
};

inline nlohmann::json trace_record(const TranscriptEvent& event) {
  nlohmann::json j{{"step", event.step},
                   {"kind", event.kind},
                   {"actor", event.actor},
                   {"payload_digest", event.payload_digest}};
  if (event.kind == "round") j["round"] = event.round;
  if (!event.detail.empty()) j["detail"] = event.detail;
  return j;
}

/// One self-describing record per line. Payloads are digested, never
/// dumped; a trace leaks nothing a wiretap would want.
inline void write_trace(const Transcript& transcript, std::ostream& out) {
  for (const TranscriptEvent& event : transcript.events) {
    out << trace_record(event).dump() << "\n";
  }
  if (!out) throw IoError("writing trace failed");
}

}  // namespace encrand
