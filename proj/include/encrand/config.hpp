// Session configuration: the knobs every run is a pure function of,
// their validation against the protocol assumptions, and the flat
// key-value file format.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "encrand/digest.hpp"
#include "encrand/errors.hpp"

namespace encrand {

enum class AggregateKind { kSum, kMean, kMin, kMax };

inline std::string aggregate_name(AggregateKind kind) {
  switch (kind) {
    case AggregateKind::kSum: return "sum";
    case AggregateKind::kMean: return "mean";
    case AggregateKind::kMin: return "min";
    case AggregateKind::kMax: return "max";
  }
  throw ConfigError("unknown aggregate kind");
}

inline AggregateKind parse_aggregate(std::string_view name) {
  if (name == "sum") return AggregateKind::kSum;
  if (name == "mean") return AggregateKind::kMean;
  if (name == "min") return AggregateKind::kMin;
  if (name == "max") return AggregateKind::kMax;
  throw ConfigError("unknown aggregate '" + std::string(name) +
                    "' (expected sum, mean, min or max)");
}

struct SessionConfig {
  uint32_t n = 0;                  // party count
  uint32_t m = 1;                  // computing-node pool size
  uint32_t packets_per_party = 1;  // X, fixed for every party
  uint32_t packet_size = 8;        // bytes, fixed for every party
  std::optional<uint32_t> rounds;  // dissemination rounds; defaults to n
  std::optional<uint32_t> pool_size;  // mask functions; defaults to n
  AggregateKind aggregate = AggregateKind::kSum;
  uint64_t master_seed = 0;
  uint64_t trials = 0;  // Monte-Carlo trials, analysis runs only

  uint32_t effective_rounds() const { return rounds.value_or(n); }
  uint32_t effective_pool_size() const { return pool_size.value_or(n); }

  bool operator==(const SessionConfig&) const = default;
};

/// Checks the stipulated protocol assumptions and returns the config
/// unchanged. Each violation names the assumption it breaks.
inline SessionConfig validate_config(const SessionConfig& raw) {
  if (raw.n < 3) {
    throw ConfigError("assumption 7: at least three parties must be involved (n = " +
                          std::to_string(raw.n) + ")",
                      7);
  }
  if (raw.m < 1) throw ConfigError("at least one computing node is required");
  if (raw.packets_per_party < 1) {
    throw ConfigError("assumption 8: every party must contribute at least one packet", 8);
  }
  if (raw.packet_size < 1) {
    throw ConfigError("assumption 9: packet size must be positive", 9);
  }
  if (raw.effective_pool_size() < raw.n) {
    throw ConfigError("assumption 6: pool of " + std::to_string(raw.effective_pool_size()) +
                          " functions cannot give " + std::to_string(raw.n) +
                          " parties distinct functions",
                      6);
  }
  const uint64_t capacity =
      static_cast<uint64_t>(raw.packets_per_party) * raw.packet_size;
  if (capacity < 8) {
    throw ConfigError("block capacity " + std::to_string(capacity) +
                      " bytes cannot hold the length prefix; "
                      "increase packets_per_party or packet_size");
  }
  return raw;
}

namespace detail {

inline uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
    uint64_t v = std::stoull(value, &pos, 0);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an integer");
  }
}

inline uint32_t parse_u32(const std::string& key, const std::string& value) {
  uint64_t v = parse_u64(key, value);
  if (v > UINT32_MAX) throw ConfigError("key '" + key + "': value out of range");
  return static_cast<uint32_t>(v);
}

}  // namespace detail

// Flat `key = value` format. `#` starts a comment. Unknown keys are
// errors: a misspelled knob must not silently fall back to a default.
inline SessionConfig parse_config_text(std::string_view text) {
  SessionConfig config;
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string stripped = trim(line);
    if (stripped.empty()) continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
  }

  std::map<std::string, std::string> pending = kv;
  auto take = [&pending](const std::string& key) -> std::optional<std::string> {
    auto it = pending.find(key);
    if (it == pending.end()) return std::nullopt;
    std::string v = it->second;
    pending.erase(it);
    return v;
  };

  auto require = [&take](const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigError("missing required config key '" + key + "'");
    return *v;
  };

  config.n = detail::parse_u32("n", require("n"));
  config.m = detail::parse_u32("m", require("m"));
  config.packets_per_party =
      detail::parse_u32("packets_per_party", require("packets_per_party"));
  config.packet_size = detail::parse_u32("packet_size", require("packet_size"));
  config.master_seed = detail::parse_u64("master_seed", require("master_seed"));
  if (auto v = take("rounds")) config.rounds = detail::parse_u32("rounds", *v);
  if (auto v = take("pool_size")) config.pool_size = detail::parse_u32("pool_size", *v);
  if (auto v = take("aggregate")) config.aggregate = parse_aggregate(*v);
  if (auto v = take("trials")) config.trials = detail::parse_u64("trials", *v);

  if (!pending.empty()) {
    throw ConfigError("unknown config key '" + pending.begin()->first + "'");
  }
  return config;
}

inline SessionConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline std::string format_config(const SessionConfig& config) {
  std::ostringstream out;
  out << "n = " << config.n << "\n";
  out << "m = " << config.m << "\n";
  out << "packets_per_party = " << config.packets_per_party << "\n";
  out << "packet_size = " << config.packet_size << "\n";
  if (config.rounds) out << "rounds = " << *config.rounds << "\n";
  if (config.pool_size) out << "pool_size = " << *config.pool_size << "\n";
  out << "aggregate = " << aggregate_name(config.aggregate) << "\n";
  out << "master_seed = " << config.master_seed << "\n";
  if (config.trials != 0) out << "trials = " << config.trials << "\n";
  return out.str();
}

inline void config_bytes(ByteWriter& w, const SessionConfig& config) {
  w.u32(config.n);
  w.u32(config.m);
  w.u32(config.packets_per_party);
  w.u32(config.packet_size);
  w.u32(config.effective_rounds());
  w.u32(config.effective_pool_size());
  w.u8(static_cast<uint8_t>(config.aggregate));
  w.u64(config.master_seed);
  w.u64(config.trials);
}

}  // namespace encrand
