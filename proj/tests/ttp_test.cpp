#include "encrand/ttp.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "encrand/dissemination.hpp"
#include "test_util.hpp"

namespace encrand {
namespace {

struct Rig {
  SessionConfig config;
  SessionState state;
  std::vector<DataBlock> blocks;
  FunctionPool pool;
};

Rig make_rig(uint32_t n, uint32_t x, uint64_t seed, uint32_t rounds,
             const std::vector<uint64_t>* rig_tags = nullptr) {
  Rig rig;
  rig.config = testutil::small_config(n, x, seed);
  SplitMix64 rng(seed ^ 0xabcddcba);
  for (uint32_t i = 0; i < n; ++i) {
    rig.blocks.push_back(testutil::random_fitting_block(rng, x, rig.config.packet_size));
  }
  rig.state = run_dissemination(init_session(rig.config, rig.blocks, rig_tags), rounds);
  rig.pool = build_pool(rig.config.effective_pool_size(),
                        derive_seed(rig.config.master_seed, "pool"));
  return rig;
}

TtpNode collected_ttp(const Rig& rig) {
  TtpNode ttp = make_ttp(0, rig.pool, rig.config.n, rig.config.packets_per_party,
                         rig.config.packet_size);
  return collect(std::move(ttp), all_held_packets(rig.state));
}

TEST(SelectTtp, SingleNodeAlwaysZero) {
  SplitMix64 rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(select_ttp(1, rng.next()), 0u);
}

TEST(SelectTtp, DeterministicPerSeed) {
  EXPECT_EQ(select_ttp(7, 123456789), select_ttp(7, 123456789));
}

TEST(SelectTtp, ZeroNodesRejected) {
  EXPECT_THROW(select_ttp(0, 5), ConfigError);
}

TEST(SelectTtp, UniformOverSeeds) {
  std::vector<uint64_t> counts(4, 0);
  SplitMix64 rng(777);
  for (int i = 0; i < 100000; ++i) counts[select_ttp(4, rng.next())] += 1;
  EXPECT_GT(testutil::chi_square_uniform_pvalue(counts), 0.001);
}

TEST(SelectTtp, MarginalUniformWithOnePartySeedFixed) {
  // One party pinning its own seed must not gain any predictive power
  // over the selection.
  std::vector<uint64_t> counts(4, 0);
  SplitMix64 rng(888);
  const uint64_t fixed_seed = 0xdeadbeef12345678ull;
  for (int i = 0; i < 100000; ++i) {
    std::vector<uint64_t> seeds{fixed_seed, rng.next(), rng.next(), rng.next()};
    counts[select_ttp(4, combine_party_seeds(seeds, rng.next()))] += 1;
  }
  EXPECT_GT(testutil::chi_square_uniform_pvalue(counts), 0.001);
}

TEST(PoolReplication, AllNodesHoldIdenticalPools) {
  FunctionPool pool = build_pool(8, derive_seed(42, "pool"));
  std::vector<TtpNode> nodes;
  for (uint32_t i = 0; i < 4; ++i) nodes.push_back(make_ttp(i, pool, 3, 4, 16));
  for (const auto& node : nodes) {
    EXPECT_EQ(pool_digest(node.pool), pool_digest(nodes[0].pool));
  }
}

TEST(Collect, AcceptsFullPacketSet) {
  Rig rig = make_rig(3, 4, 11, 3);
  TtpNode ttp = collected_ttp(rig);
  EXPECT_EQ(ttp.inbox.size(), 12u);
}

TEST(Collect, WithheldPacketDetected) {
  Rig rig = make_rig(3, 4, 12, 3);
  auto packets = all_held_packets(rig.state);
  packets.pop_back();
  TtpNode ttp = make_ttp(0, rig.pool, 3, 4, rig.config.packet_size);
  EXPECT_THROW(collect(std::move(ttp), packets), IncompleteCollection);
}

TEST(Collect, DuplicatePacketDetected) {
  Rig rig = make_rig(3, 4, 13, 3);
  auto packets = all_held_packets(rig.state);
  packets.push_back(packets.front());
  TtpNode ttp = make_ttp(0, rig.pool, 3, 4, rig.config.packet_size);
  EXPECT_THROW(collect(std::move(ttp), packets), IncompleteCollection);
}

TEST(Collect, RaggedPacketSizesRejected) {
  Rig rig = make_rig(3, 4, 14, 3);
  auto packets = all_held_packets(rig.state);
  packets[5].masked_payload.push_back(0);
  TtpNode ttp = make_ttp(0, rig.pool, 3, 4, rig.config.packet_size);
  try {
    collect(std::move(ttp), packets);
    FAIL() << "ragged packet sizes must be rejected";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.assumption(), 9);
  }
}

TEST(Reassemble, RecoversAllBlocksAsMultiset) {
  Rig rig = make_rig(3, 4, 15, 3);
  std::vector<DataBlock> out = reassemble(collected_ttp(rig));
  auto expected = rig.blocks;
  auto sort_blocks = [](std::vector<DataBlock>& blocks) {
    std::sort(blocks.begin(), blocks.end(),
              [](const DataBlock& a, const DataBlock& b) { return a.values < b.values; });
  };
  sort_blocks(out);
  sort_blocks(expected);
  EXPECT_EQ(out, expected);
}

TEST(Reassemble, OutputOrderedByBlockTag) {
  Rig rig = make_rig(5, 2, 16, 5);
  std::vector<DataBlock> out = reassemble(collected_ttp(rig));
  // Rebuild the expected order from the omniscient origin map.
  auto origins = rig.state.origin_by_tag();
  std::vector<DataBlock> expected;
  for (const auto& [tag, party] : origins) expected.push_back(rig.blocks[party]);
  EXPECT_EQ(out, expected);
}

TEST(Reassemble, ArrivalOrderDoesNotMatter) {
  Rig rig = make_rig(4, 3, 17, 4);
  TtpNode ttp = collected_ttp(rig);
  TtpNode shuffled = ttp;
  SplitMix64 rng(18);
  for (size_t i = shuffled.inbox.size(); i > 1; --i) {
    std::swap(shuffled.inbox[i - 1], shuffled.inbox[rng.below(i)]);
  }
  EXPECT_EQ(reassemble(ttp), reassemble(shuffled));
}

TEST(Reassemble, TamperedPacketHasNoCandidate) {
  Rig rig = make_rig(3, 4, 19, 3);
  TtpNode ttp = collected_ttp(rig);
  ttp.inbox[7].masked_payload[0] ^= 0x01;
  EXPECT_THROW(reassemble(ttp), NoCandidate);
}

TEST(Reassemble, SharedBlockTagAborts) {
  // Two parties rigged onto one tag: the merged group exceeds X.
  std::vector<uint64_t> tags{100, 100, 200};
  Rig rig = make_rig(3, 4, 20, 3, &tags);
  EXPECT_THROW(reassemble(collected_ttp(rig)), TagCollision);
}

TEST(Reassemble, MissingGroupMemberIsIncomplete) {
  Rig rig = make_rig(3, 4, 21, 3);
  TtpNode ttp = collected_ttp(rig);
  // Swap one packet for a duplicate of another tag's packet so counts
  // stay right but one group runs short.
  uint64_t victim_tag = ttp.inbox[0].block_tag;
  size_t donor = 0;
  for (size_t i = 0; i < ttp.inbox.size(); ++i) {
    if (ttp.inbox[i].block_tag != victim_tag) {
      donor = i;
      break;
    }
  }
  for (auto& packet : ttp.inbox) {
    if (packet.block_tag == victim_tag && packet.packet_index == 0) {
      packet = ttp.inbox[donor];
      packet.packet_index = 99;  // stays in the donor group, overfills it
      break;
    }
  }
  EXPECT_THROW(reassemble(ttp), Error);
}

TEST(ComputeAggregate, ElementwiseExamples) {
  std::vector<DataBlock> blocks{{{1, 2, 3}}, {{4, 5, 6}}, {{7, 8, 9}}};
  EXPECT_EQ(compute_aggregate(blocks, AggregateKind::kSum).values,
            (std::vector<uint64_t>{12, 15, 18}));
  EXPECT_EQ(compute_aggregate(blocks, AggregateKind::kMean).values,
            (std::vector<uint64_t>{4, 5, 6}));
  EXPECT_EQ(compute_aggregate(blocks, AggregateKind::kMin).values,
            (std::vector<uint64_t>{1, 2, 3}));
  EXPECT_EQ(compute_aggregate(blocks, AggregateKind::kMax).values,
            (std::vector<uint64_t>{7, 8, 9}));
}

TEST(ComputeAggregate, MeanUsesFloorDivision) {
  std::vector<DataBlock> blocks{{{1}}, {{2}}, {{4}}};
  EXPECT_EQ(compute_aggregate(blocks, AggregateKind::kMean).values,
            (std::vector<uint64_t>{2}));  // 7 / 3
}

TEST(ComputeAggregate, MetadataFilledIn) {
  std::vector<DataBlock> blocks{{{1}}, {{2}}, {{3}}};
  PublicResult result = compute_aggregate(blocks, AggregateKind::kSum);
  EXPECT_EQ(result.n_blocks, 3u);
  EXPECT_TRUE(result.announced);
  EXPECT_EQ(result.aggregate_kind, AggregateKind::kSum);
}

TEST(ComputeAggregate, RaggedLengthsRejected) {
  std::vector<DataBlock> blocks{{{1, 2}}, {{3}}};
  EXPECT_THROW(compute_aggregate(blocks, AggregateKind::kSum), ShapeError);
}

TEST(ComputeAggregate, SumOverflowDetected) {
  std::vector<DataBlock> blocks{{{UINT64_MAX}}, {{1}}, {{0}}};
  EXPECT_THROW(compute_aggregate(blocks, AggregateKind::kSum), OverflowError);
  EXPECT_THROW(compute_aggregate(blocks, AggregateKind::kMean), OverflowError);
  EXPECT_EQ(compute_aggregate(blocks, AggregateKind::kMax).values.front(), UINT64_MAX);
}

TEST(ComputeAggregate, EmptyInputRejected) {
  EXPECT_THROW(compute_aggregate({}, AggregateKind::kSum), ShapeError);
}

TEST(EndToEnd, ProtocolIsIdentityOnTheAggregate) {
  SplitMix64 rng(313);
  for (int i = 0; i < 50; ++i) {
    uint32_t n = 3 + static_cast<uint32_t>(rng.below(6));
    uint32_t x = 1 + static_cast<uint32_t>(rng.below(4));
    Rig rig;
    rig.config = testutil::small_config(n, x, rng.next());
    SplitMix64 block_rng(rng.next());
    rig.blocks = testutil::random_equal_blocks(block_rng, n, x, rig.config.packet_size,
                                               1ull << 32);
    rig.state = run_dissemination(init_session(rig.config, rig.blocks), n);
    rig.pool = build_pool(rig.config.effective_pool_size(),
                          derive_seed(rig.config.master_seed, "pool"));
    std::vector<DataBlock> out = reassemble(collected_ttp(rig));
    for (AggregateKind kind : {AggregateKind::kSum, AggregateKind::kMean,
                               AggregateKind::kMin, AggregateKind::kMax}) {
      EXPECT_EQ(compute_aggregate(out, kind).values,
                compute_aggregate(rig.blocks, kind).values);
    }
  }
}

TEST(Unlinkability, TtpDeliverableMessagesCarryNoPartyId) {
  // The only message type a computing node ever receives is the
  // encrypted packet; its schema is the four anonymous fields.
  Rig rig = make_rig(4, 2, 23, 4);
  for (const auto& packet : all_held_packets(rig.state)) {
    nlohmann::json j = packet;
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    ASSERT_EQ(keys, (std::set<std::string>{"block_tag", "packet_index", "checksum",
                                           "masked_payload"}));
  }
}

}  // namespace
}  // namespace encrand
