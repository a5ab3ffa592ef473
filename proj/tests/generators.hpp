#pragma once

// Small hand-rolled structure generator for property tests. It draws shapes
// directly from std::mt19937_64 and shares no code with synth_gen.hpp, so
// properties are not checked against the generator that produced them.

#include "fedload/structure.hpp"

#include <random>
#include <string>

namespace fedload::testing {

struct Shape {
  std::size_t max_servers = 12;
  std::size_t max_users = 40;
  std::size_t max_rooms = 15;
  std::size_t max_rooms_per_user = 4;
};

// Every server has at least one user. Some users are in no room, some rooms
// are local to one server, and a room may end up empty.
inline NetworkStructure random_structure(std::uint64_t seed, const Shape& shape = {}) {
  std::mt19937_64 gen(seed * 7919 + 17);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen); };

  NetworkStructure s;
  const std::size_t servers = pick(1, shape.max_servers);
  const std::size_t users = pick(servers, std::max(servers, shape.max_users));
  const std::size_t rooms = pick(0, shape.max_rooms);
  for (std::size_t i = 0; i < servers; ++i) s.add_server(EntityId("srv" + std::to_string(i)));
  for (std::size_t u = 0; u < users; ++u) {
    // The first `servers` users pin one user to each server.
    const std::size_t home = u < servers ? u : pick(0, servers - 1);
    s.add_user(EntityId("usr" + std::to_string(u)), EntityId("srv" + std::to_string(home)));
  }
  for (std::size_t r = 0; r < rooms; ++r) s.add_room(EntityId("room" + std::to_string(r)));
  if (rooms == 0) return s;
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t k = pick(0, shape.max_rooms_per_user);
    for (std::size_t j = 0; j < k; ++j) {
      s.join(EntityId("usr" + std::to_string(u)), EntityId("room" + std::to_string(pick(0, rooms - 1))));
    }
  }
  return s;
}

}  // namespace fedload::testing
