// Trusted in-process message bus with an access log.
//
// Channels are assumed secure: delivery is reliable, in order, and
// unobservable to third parties. The bus makes that assumption testable
// instead of silent. Every send and every read is logged; the channel
// contract (each message delivered exactly once, read by its receiver
// and nobody else) is checked over the log after the fact. The log
// carries payload digests only, never payloads.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "encrand/digest.hpp"

namespace encrand {

struct Actor {
  enum class Kind : uint8_t { kParty, kTtp, kPool, kCoordinator };

  Kind kind = Kind::kCoordinator;
  uint32_t index = 0;

  static Actor party(uint32_t i) { return {Kind::kParty, i}; }
  static Actor ttp(uint32_t i) { return {Kind::kTtp, i}; }
  static Actor pool() { return {Kind::kPool, 0}; }
  static Actor coordinator() { return {Kind::kCoordinator, 0}; }

  std::string str() const {
    switch (kind) {
      case Kind::kParty: return "party:" + std::to_string(index);
      case Kind::kTtp: return "ttp:" + std::to_string(index);
      case Kind::kPool: return "pool";
      case Kind::kCoordinator: return "coordinator";
    }
    return "?";
  }

  bool operator==(const Actor&) const = default;
};

enum class MessageKind : uint8_t {
  kDrawRequest,
  kDrawResponse,
  kPacketForward,
  kTtpAnnouncement,
  kPacketDelivery,
  kResultAnnouncement,
};

struct BusRecord {
  uint64_t msg_id = 0;
  Actor sender;
  Actor receiver;
  MessageKind kind = MessageKind::kPacketForward;
  uint64_t payload_digest = 0;
  uint32_t deliveries = 0;
  std::vector<Actor> readers;  // everyone who read the message
};

class SecureBus {
 public:
  uint64_t send(Actor sender, Actor receiver, MessageKind kind, uint64_t payload_digest) {
    BusRecord record;
    record.msg_id = records_.size();
    record.sender = sender;
    record.receiver = receiver;
    record.kind = kind;
    record.payload_digest = payload_digest;
    records_.push_back(record);
    return record.msg_id;
  }

  // Records who actually read the message. The contract check below is
  // where off-channel reads surface.
  void deliver(uint64_t msg_id, Actor reader) {
    BusRecord& record = records_.at(msg_id);
    record.deliveries += 1;
    record.readers.push_back(reader);
  }

  /// Delivers every pending message to its receiver, in send order.
  void deliver_all() {
    for (BusRecord& record : records_) {
      if (record.deliveries == 0) {
        record.deliveries = 1;
        record.readers.push_back(record.receiver);
      }
    }
  }

  /// Channel contract: every message delivered exactly once, and no
  /// entity outside {sender, receiver} ever read it.
  bool contract_holds() const {
    for (const BusRecord& record : records_) {
      if (record.deliveries != 1) return false;
      for (const Actor& reader : record.readers) {
        if (!(reader == record.receiver) && !(reader == record.sender)) return false;
      }
    }
    return true;
  }

  const std::vector<BusRecord>& records() const { return records_; }

  size_t count(MessageKind kind) const {
    size_t total = 0;
    for (const BusRecord& record : records_) {
      if (record.kind == kind) ++total;
    }
    return total;
  }

 private:
  std::vector<BusRecord> records_;
};

}  // namespace encrand
