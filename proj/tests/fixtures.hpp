#pragma once

#include "fedload/structure.hpp"

#include <string>

namespace fedload::testing {

// servers {a,b,c}; users u1@a, u2@b, u3@c; rooms r1={u1,u2}, r2={u1,u3}
inline NetworkStructure fixture_a() {
  NetworkStructure s;
  for (auto id : {"a", "b", "c"}) s.add_server(EntityId(id));
  s.add_user(EntityId("u1"), EntityId("a"));
  s.add_user(EntityId("u2"), EntityId("b"));
  s.add_user(EntityId("u3"), EntityId("c"));
  s.add_room(EntityId("r1"), {EntityId("u1"), EntityId("u2")});
  s.add_room(EntityId("r2"), {EntityId("u1"), EntityId("u3")});
  return s;
}

// One room shared by n <= 1000 single-user servers s000, s001, ...; every
// user is in only that room.
inline NetworkStructure single_room(std::size_t n) {
  NetworkStructure s;
  IdSet members;
  for (std::size_t i = 0; i < n; ++i) {
    std::string suffix = std::to_string(i);
    suffix.insert(0, 3 - suffix.size(), '0');
    EntityId server("s" + suffix);
    EntityId user("u" + suffix);
    s.add_server(server);
    s.add_user(user, server);
    members.insert(user);
  }
  s.add_room(EntityId("room"), std::move(members));
  return s;
}

// FIXTURE-C: one room, four single-user servers.
inline NetworkStructure fixture_c() { return single_room(4); }

// One server "big" with 10 users b0..b9 and one server "small" with user
// v, all in the single room "shared".
inline NetworkStructure big_and_small() {
  NetworkStructure s;
  s.add_server(EntityId("big"));
  s.add_server(EntityId("small"));
  IdSet members;
  for (int i = 0; i < 10; ++i) {
    EntityId u("b" + std::to_string(i));
    s.add_user(u, EntityId("big"));
    members.insert(u);
  }
  s.add_user(EntityId("v"), EntityId("small"));
  members.insert(EntityId("v"));
  s.add_room(EntityId("shared"), std::move(members));
  return s;
}

}  // namespace fedload::testing
