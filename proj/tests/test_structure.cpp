#include "fedload/structure.hpp"

#include "fixtures.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

namespace fedload {
namespace {

using testing::fixture_a;

IdSet ids(std::initializer_list<const char*> names) {
  IdSet out;
  for (auto n : names) out.insert(EntityId(n));
  return out;
}

TEST(EntityId, RejectsEmpty) { EXPECT_THROW(EntityId(""), std::invalid_argument); }

TEST(EntityId, OrdersByBytes) {
  EXPECT_LT(EntityId("B"), EntityId("a"));
  EXPECT_LT(EntityId("a"), EntityId("ab"));
  EXPECT_EQ(EntityId("x"), EntityId("x"));
}

TEST(Validate, FixtureAIsClean) {
  const auto report = validate(fixture_a());
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.violations.empty());
  EXPECT_TRUE(report.warnings.empty());
}

TEST(Validate, UserOnUndeclaredServer) {
  auto s = fixture_a();
  s.users.insert_or_assign(EntityId("u2"), EntityId("nowhere"));
  const auto report = validate(s);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].invariant, "user-home-declared");
  EXPECT_TRUE(std::count(report.violations[0].ids.begin(), report.violations[0].ids.end(), EntityId("u2")));
}

TEST(Validate, RoomWithUnknownMember) {
  auto s = fixture_a();
  s.rooms[EntityId("r1")].insert(EntityId("ghost"));
  const auto report = validate(s);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].invariant, "room-member-declared");
  EXPECT_TRUE(std::count(report.violations[0].ids.begin(), report.violations[0].ids.end(), EntityId("r1")));
}

TEST(Validate, EmptyRoomAndServerAreWarnings) {
  auto s = fixture_a();
  s.add_room(EntityId("r9"));
  s.add_server(EntityId("idle"));
  const auto report = validate(s);
  EXPECT_TRUE(report.ok());
  ASSERT_EQ(report.warnings.size(), 2u);
}

TEST(Validate, InvalidStructureErrorCarriesReport) {
  auto s = fixture_a();
  s.rooms[EntityId("r1")].insert(EntityId("ghost"));
  EXPECT_THROW(StructureIndex{s}, InvalidStructureError);
  try {
    StructureIndex idx(s);
  } catch (const InvalidStructureError& e) {
    EXPECT_EQ(e.kind(), "validation");
    EXPECT_EQ(e.report().violations.size(), 1u);
  }
}

TEST(Queries, RoomsOf) {
  const auto s = fixture_a();
  EXPECT_EQ(rooms_of(s, EntityId("u1")), ids({"r1", "r2"}));
  EXPECT_EQ(rooms_of(s, EntityId("b")), ids({"r1"}));
  auto t = s;
  t.add_user(EntityId("lonely"), EntityId("a"));
  EXPECT_TRUE(rooms_of(t, EntityId("lonely")).empty());
  EXPECT_THROW(rooms_of(s, EntityId("zzz")), UnknownEntityError);
}

TEST(Queries, UsersOf) {
  auto s = fixture_a();
  EXPECT_EQ(users_of(s, EntityId("r1")), ids({"u1", "u2"}));
  EXPECT_EQ(users_of(s, EntityId("a")), ids({"u1"}));
  s.add_room(EntityId("empty"));
  EXPECT_TRUE(users_of(s, EntityId("empty")).empty());
  EXPECT_THROW(users_of(s, EntityId("u1")), UnknownEntityError);
}

TEST(Queries, ServersOfRoom) {
  auto s = fixture_a();
  EXPECT_EQ(servers_of_room(s, EntityId("r1")), ids({"a", "b"}));
  EXPECT_EQ(servers_of_room(s, EntityId("r2")), ids({"a", "c"}));
  s.add_room(EntityId("local"), {EntityId("u2")});
  EXPECT_EQ(servers_of_room(s, EntityId("local")), ids({"b"}));
  EXPECT_THROW(servers_of_room(s, EntityId("nope")), UnknownEntityError);
}

TEST(Queries, FederatedRooms) {
  auto s = fixture_a();
  EXPECT_EQ(federated_rooms(s, EntityId("a")), ids({"r1", "r2"}));
  EXPECT_EQ(federated_rooms(s, EntityId("b")), ids({"r1"}));
  s.add_server(EntityId("solo"));
  s.add_user(EntityId("x"), EntityId("solo"));
  s.add_user(EntityId("y"), EntityId("solo"));
  s.add_room(EntityId("local"), {EntityId("x"), EntityId("y")});
  EXPECT_TRUE(federated_rooms(s, EntityId("solo")).empty());
  EXPECT_THROW(federated_rooms(s, EntityId("u1")), UnknownEntityError);
}

TEST(Index, MatchesPlainQueries) {
  const auto s = fixture_a();
  const StructureIndex idx(s);
  ASSERT_EQ(idx.server_count(), 3u);
  ASSERT_EQ(idx.user_count(), 3u);
  ASSERT_EQ(idx.room_count(), 2u);
  const auto r1 = idx.room_index(EntityId("r1"));
  const auto servers = idx.servers_of_room(r1);
  ASSERT_EQ(servers.size(), 2u);
  EXPECT_EQ(idx.servers()[servers[0]], EntityId("a"));
  EXPECT_EQ(idx.servers()[servers[1]], EntityId("b"));
  EXPECT_THROW(idx.server_index(EntityId("zz")), UnknownEntityError);
}

// Property tests over generated structures.

class StructureProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(StructureProperties, DerivedEdgesMatchMemberships) {
  const auto s = testing::random_structure(GetParam());
  std::set<std::pair<EntityId, EntityId>> expected;
  for (const auto& [room, members] : s.rooms) {
    for (const auto& u : members) expected.emplace(s.users.at(u), room);
  }
  EXPECT_EQ(s.server_room_edges(), expected);
}

TEST_P(StructureProperties, ServersPerRoomBoundedByUsers) {
  const auto s = testing::random_structure(GetParam());
  for (const auto& [room, members] : s.rooms) EXPECT_LE(servers_of_room(s, room).size(), members.size());
}

TEST_P(StructureProperties, ServerRoomsAreUnionOfUserRooms) {
  const auto s = testing::random_structure(GetParam());
  for (const auto& server : s.servers) {
    IdSet expected;
    for (const auto& [user, home] : s.users) {
      if (home != server) continue;
      const auto r = rooms_of_user(s, user);
      expected.insert(r.begin(), r.end());
    }
    EXPECT_EQ(rooms_of(s, server), expected);
  }
}

TEST_P(StructureProperties, GeneratedStructuresValidate) {
  const auto s = testing::random_structure(GetParam());
  const auto report = validate(s);
  EXPECT_TRUE(report.violations.empty()) << report.summary();
}

INSTANTIATE_TEST_SUITE_P(Seeds, StructureProperties, ::testing::Range<std::uint64_t>(0, 40));

}  // namespace
}  // namespace fedload
