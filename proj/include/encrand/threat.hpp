// Adversary simulations and closed-form leakage probabilities, checked
// against each other by Monte Carlo.
//
// The leak model is a product of independent factors: the chance the
// acting parties are malicious (r/n), the fraction of packets their
// functions can decrypt (rX / nX), and the chance the runtime-selected
// computing node is the compromised one (1/m). With equal packet counts
// the product is r^2 / (m n^2), which at r = 1 reduces to the
// single-actor closed form 1 / (m n^2).
//
// A literal reading of the coalition fraction would multiply in an
// extra factor of r, giving r^3 / (m n^2); both readings agree at
// r = 1, where the closed form cannot separate them. This module uses
// the r^2 form: the decryptable fraction of a coalition holding r of n
// equal-sized inputs is rX / nX, with no second multiplicity.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "encrand/dissemination.hpp"
#include "encrand/errors.hpp"
#include "encrand/mask_pool.hpp"
#include "encrand/ttp.hpp"

namespace encrand {

/// P(a given party turns malicious) = 1/n, equal for all parties.
inline double p_party_malicious(uint32_t n) {
  if (n == 0) throw ConfigError("party count must be positive");
  return 1.0 / static_cast<double>(n);
}

/// Fraction of all packets one party's function decrypts:
/// own packets / total packets.
inline double single_party_decrypt_fraction(uint64_t packets_of_party,
                                            uint64_t total_packets) {
  if (total_packets == 0) throw ConfigError("total packet count must be positive");
  if (packets_of_party == 0 || packets_of_party > total_packets) {
    throw ConfigError("party packet count must lie in [1, total]");
  }
  return static_cast<double>(packets_of_party) / static_cast<double>(total_packets);
}

/// Total leak probability for a coalition of r of n parties against m
/// computing nodes: (r/n) * (rX / nX) * (1/m).
inline double total_leak_probability(uint32_t n, uint32_t m, uint32_t r, uint32_t x) {
  if (n == 0) throw ConfigError("party count must be positive");
  if (m == 0) throw ConfigError("computing-node count must be positive");
  if (x == 0) throw ConfigError("packets per party must be positive");
  if (r < 1 || r > n) {
    throw ConfigError("coalition size must lie in [1, n], got " + std::to_string(r));
  }
  const double p_actor = static_cast<double>(r) / static_cast<double>(n);
  const double fraction = static_cast<double>(static_cast<uint64_t>(r) * x) /
                          static_cast<double>(static_cast<uint64_t>(n) * x);
  const double p_node = 1.0 / static_cast<double>(m);
  return (p_actor * fraction) * p_node;
}

/// Pointwise leak probability over a party-count range. Strictly
/// decreasing in n and tending to zero.
inline std::vector<std::pair<uint32_t, double>> leak_curve(uint32_t n_min, uint32_t n_max,
                                                           uint32_t m, uint32_t x,
                                                           uint32_t r) {
  if (n_min < 3) {
    throw ConfigError("assumption 7: the curve starts at three parties", 7);
  }
  if (n_min > n_max) throw ConfigError("empty party-count range");
  std::vector<std::pair<uint32_t, double>> points;
  points.reserve(n_max - n_min + 1);
  for (uint32_t n = n_min; n <= n_max; ++n) {
    points.emplace_back(n, total_leak_probability(n, m, r, x));
  }
  return points;
}

// What a coalition actually gets to see: its own drawn functions plus
// every packet any member held at any round boundary. Never the pool,
// never another party's function.
struct AdversaryModel {
  std::set<uint32_t> coalition;
  std::optional<uint32_t> compromised_ttp;
  std::vector<MaskFunction> known_functions;
  std::vector<EncryptedPacket> observed_packets;

  // Knowledge hygiene: every known function belongs to a coalition
  // member. Violations are implementation bugs, not protocol events.
  void check_knowledge(const SessionState& state) const {
    for (const auto& fn : known_functions) {
      bool owned = false;
      for (uint32_t member : coalition) {
        if (state.parties.at(member).drawn_function == fn) {
          owned = true;
          break;
        }
      }
      if (!owned) {
        throw std::logic_error("adversary knowledge contains a non-coalition function");
      }
    }
  }
};

/// Replays the session trajectory and accumulates exactly what the
/// coalition observes: its functions at draw time, its own packets at
/// creation, and whatever lands in members' hands each round.
inline AdversaryModel observe_session(const SessionState& state,
                                      const std::set<uint32_t>& coalition) {
  for (uint32_t member : coalition) {
    if (member >= state.parties.size()) {
      throw ConfigError("coalition names party " + std::to_string(member) +
                        " outside the session");
    }
  }

  std::vector<DataBlock> blocks;
  std::vector<uint64_t> tags;
  blocks.reserve(state.parties.size());
  for (const auto& party : state.parties) {
    blocks.push_back(party.block);
    tags.push_back(party.block_tag);
  }
  SessionState replay = init_session(state.config, blocks, &tags);

  AdversaryModel adversary;
  adversary.coalition = coalition;

  std::set<std::pair<uint64_t, uint32_t>> seen;
  auto absorb = [&](const SessionState& snapshot) {
    for (uint32_t member : coalition) {
      for (const auto& packet : snapshot.parties[member].held) {
        if (seen.emplace(packet.block_tag, packet.packet_index).second) {
          adversary.observed_packets.push_back(packet);
        }
      }
    }
  };

  for (uint32_t member : coalition) {
    adversary.known_functions.push_back(replay.parties[member].drawn_function);
  }
  adversary.check_knowledge(state);

  absorb(replay);
  for (uint32_t r = 0; r < state.round; ++r) {
    replay = shuffle_round(std::move(replay));
    absorb(replay);
    adversary.check_knowledge(state);
  }
  return adversary;
}

/// Mechanistic coalition attack: try every observed packet against
/// every coalition function. Succeeds exactly on packets originating
/// from coalition members; possession of other packets does not help
/// because their functions stay unknown and the pool is blind.
inline std::vector<Packet> simulate_coalition(const SessionState& state,
                                              const std::set<uint32_t>& coalition) {
  AdversaryModel adversary = observe_session(state, coalition);
  std::map<std::pair<uint64_t, uint32_t>, Packet> decrypted;
  for (const auto& packet : adversary.observed_packets) {
    for (const auto& fn : adversary.known_functions) {
      if (auto plain = detail::try_decrypt(fn, packet)) {
        decrypted.emplace(std::make_pair(packet.block_tag, packet.packet_index),
                          std::move(*plain));
        break;
      }
    }
  }
  std::vector<Packet> result;
  result.reserve(decrypted.size());
  for (auto& [key, packet] : decrypted) result.push_back(std::move(packet));
  return result;
}

struct BlockPosterior {
  uint64_t block_tag = 0;
  std::vector<double> posterior;  // over originating parties, sums to 1
  double max_posterior = 0.0;
};

struct LinkabilityReport {
  std::vector<BlockPosterior> blocks;  // in block_tag order
  double mean_max_posterior = 0.0;
};

/// Per-round holder transition matrix of the shuffle rule raised to the
/// given power: row = current holder, column = next holder. The rule
/// sends each packet to an independently uniform party, self included.
inline std::vector<std::vector<double>> holder_distribution(uint32_t n, uint32_t rounds) {
  std::vector<std::vector<double>> power(n, std::vector<double>(n, 0.0));
  for (uint32_t i = 0; i < n; ++i) power[i][i] = 1.0;
  std::vector<std::vector<double>> step(n, std::vector<double>(n, 1.0 / n));
  for (uint32_t r = 0; r < rounds; ++r) {
    std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
    for (uint32_t i = 0; i < n; ++i) {
      for (uint32_t k = 0; k < n; ++k) {
        if (power[i][k] == 0.0) continue;
        for (uint32_t j = 0; j < n; ++j) next[i][j] += power[i][k] * step[k][j];
      }
    }
    power = std::move(next);
  }
  return power;
}

/// What a compromised computing node can infer. Its observables are the
/// reassembled blocks, the pool, and which party forwarded each packet
/// (the holder at collection time). The posterior over origins comes
/// from the exact forward chain of the shuffle rule.
inline LinkabilityReport simulate_malicious_ttp(const SessionState& state) {
  const uint32_t n = static_cast<uint32_t>(state.parties.size());
  const auto chain = holder_distribution(n, state.round);

  // Final holder of every packet, keyed by block tag.
  std::map<uint64_t, std::vector<uint32_t>> holders_by_tag;
  for (const auto& party : state.parties) {
    for (const auto& packet : party.held) {
      holders_by_tag[packet.block_tag].push_back(party.party_id);
    }
  }

  LinkabilityReport report;
  report.blocks.reserve(holders_by_tag.size());
  double max_sum = 0.0;
  for (const auto& [tag, holders] : holders_by_tag) {
    BlockPosterior block;
    block.block_tag = tag;
    block.posterior.assign(n, 0.0);
    double total = 0.0;
    for (uint32_t origin = 0; origin < n; ++origin) {
      double likelihood = 1.0 / n;  // uniform prior over origins
      for (uint32_t holder : holders) likelihood *= chain[origin][holder];
      block.posterior[origin] = likelihood;
      total += likelihood;
    }
    if (total <= 0.0) {
      // The observed holders are impossible under the chain; only a
      // rigged state can get here. Fall back to the prior.
      block.posterior.assign(n, 1.0 / n);
      total = 1.0;
    } else {
      for (double& p : block.posterior) p /= total;
    }
    block.max_posterior = *std::max_element(block.posterior.begin(), block.posterior.end());
    max_sum += block.max_posterior;
    report.blocks.push_back(std::move(block));
  }
  report.mean_max_posterior = report.blocks.empty() ? 0.0 : max_sum / report.blocks.size();
  return report;
}

struct LeakEstimate {
  double analytic = 0.0;
  double empirical = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal approximation
  uint64_t trials = 0;
};

/// Monte-Carlo estimate of the leak probability. Per trial: the
/// coalition forms with probability r/n, one of the m computing nodes
/// is compromised and the leak needs the runtime selection to pick it,
/// and on both successes the score is the decryptable fraction measured
/// mechanistically from an actual session replay.
inline LeakEstimate monte_carlo_leak(uint32_t n, uint32_t m, uint32_t r, uint32_t x,
                                     uint64_t trials, uint64_t seed) {
  if (trials < 1) throw ConfigError("at least one trial is required");
  const double analytic = total_leak_probability(n, m, r, x);

  // Decryptable fraction of a size-r coalition, measured once from a
  // real session. Equal packet counts make it the same for every trial.
  SessionConfig config;
  config.n = n;
  config.m = m;
  config.packets_per_party = x;
  config.packet_size = 8;
  config.pool_size = std::max(n, 1u);
  config.master_seed = derive_seed(seed, "mc-session");
  std::vector<DataBlock> blocks(n);
  for (uint32_t i = 0; i < n; ++i) blocks[i].values = {};
  SessionState session = init_session(config, blocks);
  std::set<uint32_t> coalition;
  for (uint32_t i = 0; i < r; ++i) coalition.insert(i);
  const uint64_t total_packets = static_cast<uint64_t>(n) * x;
  const double fraction = static_cast<double>(simulate_coalition(session, coalition).size()) /
                          static_cast<double>(total_packets);

  const uint32_t compromised_node = 0;
  uint64_t hits = 0;
  for (uint64_t t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_seed(seed, "trial", t));
    const bool coalition_forms = rng.below(n) < r;
    const uint64_t combined_seed = rng.next();
    const bool node_hit = select_ttp(m, combined_seed) == compromised_node;
    if (coalition_forms && node_hit) ++hits;
  }

  LeakEstimate estimate;
  estimate.analytic = analytic;
  estimate.trials = trials;
  estimate.empirical = fraction * static_cast<double>(hits) / static_cast<double>(trials);
  if (trials > 1) {
    // Scores are 0 or `fraction`; sample variance in closed form.
    const double p_hit = static_cast<double>(hits) / static_cast<double>(trials);
    const double var = fraction * fraction * p_hit * (1.0 - p_hit) *
                       (static_cast<double>(trials) / static_cast<double>(trials - 1));
    estimate.ci_halfwidth = 1.959963984540054 * std::sqrt(var / static_cast<double>(trials));
  }
  return estimate;
}

}  // namespace encrand
