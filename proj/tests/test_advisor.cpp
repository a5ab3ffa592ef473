#include "fedload/advisor.hpp"

#include "fixtures.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

namespace fedload {
namespace {

using testing::fixture_a;

const std::vector<MechanismSpec> kCandidates{FullMesh{}, Hub{}, SpanningTree{2}};

Rational at(const RoomCost& c, const char* server) {
  for (std::size_t i = 0; i < c.servers.size(); ++i) {
    if (c.servers[i] == EntityId(server)) return c.tx[i];
  }
  throw std::out_of_range(server);
}

Rational rx_at(const RoomCost& c, const char* server) {
  for (std::size_t i = 0; i < c.servers.size(); ++i) {
    if (c.servers[i] == EntityId(server)) return c.rx[i];
  }
  throw std::out_of_range(server);
}

TEST(ExpectedRoomCost, FixtureAFullMeshR1) {
  const StructureIndex idx(fixture_a());
  const auto c = expected_room_cost(idx, ModelParams(), EntityId("r1"), FullMesh{});
  EXPECT_EQ(at(c, "a"), Rational(1, 2));
  EXPECT_EQ(at(c, "b"), Rational(1));
  EXPECT_EQ(rx_at(c, "a"), Rational(1));
  EXPECT_EQ(rx_at(c, "b"), Rational(1, 2));
  EXPECT_EQ(c.event_rate, Rational(3, 2));
  EXPECT_FALSE(c.estimated);
}

TEST(ExpectedRoomCost, LocalRoomRejected) {
  auto s = fixture_a();
  s.add_room(EntityId("local"), {EntityId("u2")});
  EXPECT_THROW(expected_room_cost(StructureIndex(s), ModelParams(), EntityId("local"), FullMesh{}),
               InvalidArgumentError);
}

TEST(ExpectedRoomCost, TwoServerRoomSameForAllMechanisms) {
  const StructureIndex idx(fixture_a());
  const auto mesh = expected_room_cost(idx, ModelParams(), EntityId("r2"), FullMesh{});
  for (const MechanismSpec& m : {MechanismSpec(Hub{}), MechanismSpec(Hub{HubRule::first_id}),
                                 MechanismSpec(SpanningTree{2}), MechanismSpec(SpanningTree{5}),
                                 MechanismSpec(Gossip{1, 0})}) {
    const auto c = expected_room_cost(idx, ModelParams(), EntityId("r2"), m);
    EXPECT_EQ(c.tx, mesh.tx) << m.to_string();
    EXPECT_EQ(c.rx, mesh.rx) << m.to_string();
    EXPECT_EQ(c.peak_event_load, mesh.peak_event_load) << m.to_string();
  }
}

TEST(ExpectedRoomCost, TreeTotalIsEdgeCountTimesRate) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StructureIndex idx(testing::random_structure(seed));
    for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
      if (!idx.is_federated(r)) continue;
      const auto n = static_cast<long long>(idx.servers_of_room(r).size());
      for (std::uint32_t k : {2u, 3u}) {
        const auto c = expected_room_cost(idx, ModelParams(), idx.rooms()[r], SpanningTree{k});
        EXPECT_EQ(c.total_tx, (n - 1) * c.event_rate);
      }
    }
  }
}

TEST(ExpectedRoomCost, GossipIsSeededEstimate) {
  const StructureIndex idx(testing::single_room(12));
  const auto one = expected_room_cost(idx, ModelParams(), EntityId("room"), Gossip{2, 0});
  const auto two = expected_room_cost(idx, ModelParams(), EntityId("room"), Gossip{2, 0});
  EXPECT_TRUE(one.estimated);
  EXPECT_EQ(one.total_tx, two.total_tx);
  EXPECT_GT(one.total_tx_ci95, 0.0);
  EXPECT_GE(one.total_tx, 11 * one.event_rate);
  // Symmetric room: every server carries the same estimated load.
  for (std::size_t i = 1; i < one.tx.size(); ++i) EXPECT_EQ(one.tx[i], one.tx[0]);
}

TEST(Recommend, ThreeServerTieGoesToListOrder) {
  const StructureIndex idx(testing::single_room(3));
  const auto a = recommend(idx, ModelParams(), {}, {FullMesh{}, SpanningTree{2}}, Objective::min_max_server_load);
  ASSERT_EQ(a.details.size(), 1u);
  EXPECT_EQ(a.details[0].scores[0].objective, a.details[0].scores[1].objective);
  EXPECT_TRUE(a.rooms.at(EntityId("room")).is<FullMesh>());
}

TEST(Recommend, LargeRoomPrefersTree) {
  const StructureIndex idx(testing::single_room(100));
  const auto a = recommend(idx, ModelParams(), {}, {FullMesh{}, SpanningTree{2}}, Objective::min_max_server_load);
  EXPECT_TRUE(a.rooms.at(EntityId("room")).is<SpanningTree>());
  const auto& scores = a.details[0].scores;
  EXPECT_EQ(scores[0].objective, 99);
  EXPECT_EQ(scores[1].objective, 3);
}

TEST(Recommend, SingleCandidateIsForced) {
  const StructureIndex idx(testing::random_structure(5));
  const auto a = recommend(idx, ModelParams(), {}, {Hub{}}, Objective::min_total_transactions);
  for (const auto& [room, mech] : a.rooms) EXPECT_TRUE(mech.is<Hub>());
}

TEST(Recommend, EmptyCandidatesRejected) {
  EXPECT_THROW(recommend(StructureIndex(fixture_a()), ModelParams(), {}, {}, Objective::min_max_server_load),
               InvalidArgumentError);
}

TEST(Recommend, OnlyFederatedRoomsByDefault) {
  auto s = fixture_a();
  s.add_room(EntityId("local"), {EntityId("u2")});
  const auto a = recommend(StructureIndex(s), ModelParams(), {}, kCandidates, Objective::min_max_server_load);
  EXPECT_EQ(a.rooms.size(), 2u);
  EXPECT_FALSE(a.rooms.contains(EntityId("local")));
}

TEST(Objective, ParseAndPrint) {
  for (auto o : {Objective::min_max_server_load, Objective::min_total_transactions}) {
    EXPECT_EQ(parse_objective(to_string(o)), o);
  }
  EXPECT_THROW(parse_objective("fairness"), InvalidArgumentError);
}

class AdvisorProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(AdvisorProperties, ChosenIsOptimal) {
  const StructureIndex idx(testing::random_structure(GetParam()));
  for (auto objective : {Objective::min_max_server_load, Objective::min_total_transactions}) {
    const auto a = recommend(idx, ModelParams(), {}, kCandidates, objective);
    for (const auto& rec : a.details) {
      for (const auto& sc : rec.scores) EXPECT_LE(rec.best().objective, sc.objective);
    }
  }
}

TEST_P(AdvisorProperties, AddingCandidatesNeverHurts) {
  const StructureIndex idx(testing::random_structure(GetParam()));
  const auto few = recommend(idx, ModelParams(), {}, {FullMesh{}}, Objective::min_max_server_load);
  const auto more = recommend(idx, ModelParams(), {}, kCandidates, Objective::min_max_server_load);
  ASSERT_EQ(few.details.size(), more.details.size());
  for (std::size_t i = 0; i < few.details.size(); ++i) {
    EXPECT_LE(more.details[i].best().objective, few.details[i].best().objective);
  }
}

TEST_P(AdvisorProperties, FullMeshSumsToLoadProfile) {
  const StructureIndex idx(testing::random_structure(GetParam()));
  const ModelParams params(Rational(5, 4));
  const auto profile = load_profile(idx, params);
  std::vector<Rational> tx(idx.server_count(), 0), rx(idx.server_count(), 0);
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
    if (!idx.is_federated(r)) continue;
    const auto c = expected_room_cost(idx, params, idx.rooms()[r], FullMesh{});
    for (std::size_t i = 0; i < c.servers.size(); ++i) {
      const auto s = idx.server_index(c.servers[i]);
      tx[s] += c.tx[i];
      rx[s] += c.rx[i];
    }
  }
  for (std::size_t s = 0; s < idx.server_count(); ++s) {
    EXPECT_EQ(tx[s], profile.servers[s].tx);
    EXPECT_EQ(rx[s], profile.servers[s].rx);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, AdvisorProperties, ::testing::Range<std::uint64_t>(0, 30));

}  // namespace
}  // namespace fedload
