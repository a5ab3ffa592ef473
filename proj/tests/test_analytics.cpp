#include "fedload/analytics.hpp"

#include "fixtures.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace fedload {
namespace {

using testing::fixture_a;

std::vector<std::string> ids_of(const RankTable& t) {
  std::vector<std::string> out;
  for (const auto& r : t) out.push_back(r.id.str());
  return out;
}

TEST(RankTable, ServersFixtureA) {
  const auto t = server_rank_table(StructureIndex(fixture_a()));
  EXPECT_EQ(ids_of(t), (std::vector<std::string>{"b", "c", "a"}));
  EXPECT_EQ(t[0].primary, 1u);
  EXPECT_EQ(t[0].secondary, 1u);
  EXPECT_EQ(t[2].secondary, 2u);
  EXPECT_EQ(t[2].rank, 3u);
}

TEST(RankTable, RoomsFixtureA) {
  const auto t = room_rank_table(StructureIndex(fixture_a()));
  EXPECT_EQ(ids_of(t), (std::vector<std::string>{"r1", "r2"}));
  for (const auto& r : t) {
    EXPECT_EQ(r.primary, 2u);
    EXPECT_EQ(r.secondary, 2u);
  }
}

TEST(RankTable, EmptyAndLocal) {
  EXPECT_TRUE(server_rank_table(StructureIndex(NetworkStructure{})).empty());
  NetworkStructure s;
  s.add_server(EntityId("x"));
  IdSet members;
  for (int i = 0; i < 4; ++i) {
    s.add_user(EntityId("u" + std::to_string(i)), EntityId("x"));
    members.insert(EntityId("u" + std::to_string(i)));
  }
  s.add_room(EntityId("r"), members);
  const auto t = room_rank_table(StructureIndex(s));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].primary, 1u);
  EXPECT_EQ(t[0].secondary, 4u);
}

TEST(Histogram, HalfDecadeBins) {
  const auto h = log_histogram({1, 2, 3, 9, 10, 31, 32});
  ASSERT_EQ(h.bins.size(), 4u);
  const std::vector<std::uint64_t> counts{3, 1, 2, 1};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(h.bins[k].count, counts[k]);
    EXPECT_DOUBLE_EQ(h.bins[k].lower, std::pow(10.0, k / 2.0));
    EXPECT_DOUBLE_EQ(h.bins[k].upper, std::pow(10.0, (k + 1) / 2.0));
  }
}

TEST(Histogram, EdgesAreLowerInclusive) {
  EXPECT_EQ(log_histogram({10}).bins.back().k, 2);
  EXPECT_EQ(log_histogram({3}).bins.back().k, 0);
  EXPECT_EQ(log_histogram({4}).bins.back().k, 1);
  EXPECT_EQ(log_histogram({100}).bins.back().k, 4);
  EXPECT_EQ(log_histogram({99}).bins.back().k, 3);
  EXPECT_EQ(log_histogram({316}).bins.back().k, 4);
  EXPECT_EQ(log_histogram({317}).bins.back().k, 5);
}

TEST(Histogram, RejectsZero) {
  EXPECT_THROW(log_histogram({1, 0}), InvalidArgumentError);
  EXPECT_EQ(log_histogram_positive({0, 0, 5}).total(), 1u);
  EXPECT_TRUE(log_histogram({}).bins.empty());
}

// Bin membership agrees with floating-point evaluation away from the edges.
TEST(Histogram, CountsSumToInputSize) {
  std::vector<std::uint64_t> values;
  for (std::uint64_t v = 1; v < 5000; v = v * 3 / 2 + 1) values.push_back(v);
  const auto h = log_histogram(values);
  EXPECT_EQ(h.total(), values.size());
  for (auto v : values) {
    const int k = static_cast<int>(std::floor(2 * std::log10(static_cast<double>(v)) + 1e-12));
    EXPECT_GE(h.bins[static_cast<std::size_t>(k)].count, 1u) << v;
  }
}

TEST(Cumulative, FixtureA) {
  const StructureIndex idx(fixture_a());
  const auto series = cumulative_fractions(load_profile(idx, ModelParams()), idx);
  ASSERT_EQ(series.rows.size(), 3u);
  for (const auto& r : series.rows) EXPECT_EQ(r.tx_share, Rational(1, 3));
  const auto& last = series.rows.back();
  EXPECT_EQ(last.users_cum, 1);
  EXPECT_EQ(last.tx_cum, 1);
  EXPECT_EQ(last.rx_cum, 1);
  EXPECT_EQ(last.sum_cum, 1);
  // Equal user counts and equal tx: ordered by id.
  EXPECT_EQ(series.rows[0].server, EntityId("a"));
}

TEST(Cumulative, DegenerateWhenNothingIsShared) {
  NetworkStructure s;
  s.add_server(EntityId("x"));
  s.add_user(EntityId("u"), EntityId("x"));
  const StructureIndex idx(s);
  const auto series = cumulative_fractions(load_profile(idx, ModelParams()), idx);
  EXPECT_TRUE(series.degenerate);
  EXPECT_EQ(series.rows.back().users_cum, 1);
  EXPECT_EQ(series.rows.back().tx_cum, 0);
}

TEST(Cumulative, RejectsForeignProfile) {
  const StructureIndex idx(fixture_a());
  const auto other = load_profile(testing::fixture_c(), ModelParams());
  EXPECT_THROW(cumulative_fractions(other, idx), InvalidArgumentError);
}

class CumulativeProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(CumulativeProperties, MonotoneAndEndsAtOne) {
  const StructureIndex idx(testing::random_structure(GetParam()));
  const auto series = cumulative_fractions(load_profile(idx, ModelParams()), idx);
  ASSERT_EQ(series.rows.size(), idx.server_count());
  Rational prev_users = 0, prev_tx = 0, prev_rx = 0, prev_sum = 0;
  for (const auto& r : series.rows) {
    EXPECT_GE(r.users_cum, prev_users);
    EXPECT_GE(r.tx_cum, prev_tx);
    EXPECT_GE(r.rx_cum, prev_rx);
    EXPECT_GE(r.sum_cum, prev_sum);
    prev_users = r.users_cum;
    prev_tx = r.tx_cum;
    prev_rx = r.rx_cum;
    prev_sum = r.sum_cum;
  }
  EXPECT_EQ(prev_users, 1);
  if (!series.degenerate) {
    EXPECT_EQ(prev_tx, 1);
    EXPECT_EQ(prev_rx, 1);
    EXPECT_EQ(prev_sum, 1);
  }
}

TEST_P(CumulativeProperties, RankTablesArePermutations) {
  const StructureIndex idx(testing::random_structure(GetParam()));
  const auto servers = server_rank_table(idx);
  ASSERT_EQ(servers.size(), idx.server_count());
  std::set<EntityId> seen;
  for (const auto& r : servers) {
    seen.insert(r.id);
    const auto s = idx.server_index(r.id);
    EXPECT_EQ(r.primary, idx.users_of_server(s).size());
    EXPECT_EQ(r.secondary, idx.rooms_of_server(s).size());
  }
  EXPECT_EQ(seen.size(), idx.server_count());
  const auto rooms = room_rank_table(idx);
  ASSERT_EQ(rooms.size(), idx.room_count());
  for (std::size_t i = 1; i < rooms.size(); ++i) {
    EXPECT_LE(std::tie(rooms[i - 1].primary, rooms[i - 1].secondary), std::tie(rooms[i].primary, rooms[i].secondary));
  }
}

TEST_P(CumulativeProperties, SharesAreFractions) {
  const StructureIndex idx(testing::random_structure(GetParam()));
  const auto st = summary(idx);
  EXPECT_EQ(st.servers, idx.server_count());
  EXPECT_EQ(st.users, idx.user_count());
  EXPECT_EQ(st.rooms, idx.room_count());
  for (const auto& sh : st.shares) {
    EXPECT_GE(sh.share, 0) << sh.name;
    EXPECT_LE(sh.share, 1) << sh.name;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, CumulativeProperties, ::testing::Range<std::uint64_t>(0, 40));

TEST(Summary, FixtureA) {
  const auto st = summary(StructureIndex(fixture_a()));
  EXPECT_EQ(st.servers, 3u);
  EXPECT_EQ(st.users, 3u);
  EXPECT_EQ(st.rooms, 2u);
  EXPECT_EQ(st.share("users_rooms_le_3").share, 1);
  EXPECT_EQ(st.share("rooms_servers_lt_10").share, 1);
  EXPECT_EQ(st.share("users_on_top_1.00pct_servers").threshold_count, 1u);
  EXPECT_EQ(st.share("users_on_top_1.00pct_servers").share, Rational(1, 3));
  EXPECT_THROW(st.share("nope"), InvalidArgumentError);
}

TEST(Summary, TopCountFloorsWithMinimumOne) {
  EXPECT_EQ(top_count(2003, Rational(1, 100)), 20u);
  EXPECT_EQ(top_count(50, Rational(1, 100)), 1u);
  EXPECT_EQ(top_count(0, Rational(1, 100)), 0u);
  EXPECT_EQ(top_count(10, Rational(1)), 10u);
}

}  // namespace
}  // namespace fedload
