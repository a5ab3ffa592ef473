#pragma once

#include "fedload/entity.hpp"
#include "fedload/errors.hpp"
#include "fedload/random.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace fedload {

// Group-communication mechanisms a room can use to spread one event from its
// origin server to every other server of the room.

/// Origin sends one transaction to each of the other n-1 servers.
struct FullMesh {
  friend bool operator==(const FullMesh&, const FullMesh&) = default;
};

enum class HubRule {
  most_users,  // server with the most room members, ties by lowest id
  first_id,    // lexicographically smallest server id
};

/// Origin sends to a hub, the hub relays to everybody else.
struct Hub {
  HubRule rule = HubRule::most_users;
  friend bool operator==(const Hub&, const Hub&) = default;
};

/// Complete k-ary tree over the room's servers in id order, with the origin
/// swapped to the root position.
struct SpanningTree {
  std::uint32_t arity = 2;
  friend bool operator==(const SpanningTree&, const SpanningTree&) = default;
};

/// Synchronous push gossip: each round every informed server pushes to
/// `fanout` distinct peers chosen uniformly. round_cap == 0 means run until
/// every server is informed.
struct Gossip {
  std::uint32_t fanout = 1;
  std::uint32_t round_cap = 0;
  friend bool operator==(const Gossip&, const Gossip&) = default;
};

class MechanismSpec {
 public:
  using Variant = std::variant<FullMesh, Hub, SpanningTree, Gossip>;

  MechanismSpec() = default;
  MechanismSpec(FullMesh m) : v_(m) {}
  MechanismSpec(Hub m) : v_(m) {}
  MechanismSpec(SpanningTree m) : v_(m) {
    if (m.arity < 2) throw InvalidArgumentError("spanning_tree arity must be >= 2");
  }
  MechanismSpec(Gossip m) : v_(m) {
    if (m.fanout < 1) throw InvalidArgumentError("gossip fanout must be >= 1");
  }

  const Variant& variant() const noexcept { return v_; }

  template <class T>
  bool is() const noexcept { return std::holds_alternative<T>(v_); }

  std::string kind() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, FullMesh>) return "full_mesh";
          else if constexpr (std::is_same_v<T, Hub>) return "hub";
          else if constexpr (std::is_same_v<T, SpanningTree>) return "spanning_tree";
          else return "gossip";
        },
        v_);
  }

  /// Canonical text form, accepted back by parse_mechanism().
  std::string to_string() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, FullMesh>) {
            return "full_mesh";
          } else if constexpr (std::is_same_v<T, Hub>) {
            return std::string("hub:rule=") + (m.rule == HubRule::most_users ? "most_users" : "first_id");
          } else if constexpr (std::is_same_v<T, SpanningTree>) {
            return "spanning_tree:k=" + std::to_string(m.arity);
          } else {
            return "gossip:f=" + std::to_string(m.fanout) + ",cap=" + std::to_string(m.round_cap);
          }
        },
        v_);
  }

  /// Deterministic mechanisms always deliver and cost the same per event.
  bool deterministic() const noexcept { return !is<Gossip>(); }

  friend bool operator==(const MechanismSpec&, const MechanismSpec&) = default;

 private:
  Variant v_{FullMesh{}};
};

/// Parses "full_mesh", "hub", "hub:rule=first_id", "spanning_tree:k=3",
/// "gossip:f=2,cap=10".
inline MechanismSpec parse_mechanism(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  std::map<std::string, std::string, std::less<>> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw InvalidArgumentError("bad mechanism parameter '" + std::string(item) + "'");
      }
      params.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  auto take_uint = [&](std::string_view key, std::uint32_t fallback) {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    std::uint32_t v = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw InvalidArgumentError("mechanism parameter " + std::string(key) + " is not an unsigned integer");
    }
    params.erase(it);
    return v;
  };
  auto reject_leftovers = [&]() {
    if (!params.empty()) {
      throw InvalidArgumentError("unknown parameter '" + params.begin()->first + "' for mechanism '" +
                                 std::string(kind) + "'");
    }
  };

  if (kind == "full_mesh") {
    reject_leftovers();
    return FullMesh{};
  }
  if (kind == "hub") {
    Hub hub;
    if (auto it = params.find("rule"); it != params.end()) {
      if (it->second == "most_users") hub.rule = HubRule::most_users;
      else if (it->second == "first_id") hub.rule = HubRule::first_id;
      else throw InvalidArgumentError("unknown hub rule '" + it->second + "'");
      params.erase(it);
    }
    reject_leftovers();
    return hub;
  }
  if (kind == "spanning_tree") {
    SpanningTree t{take_uint("k", 2)};
    reject_leftovers();
    return t;
  }
  if (kind == "gossip") {
    Gossip g;
    g.fanout = take_uint("f", 1);
    g.round_cap = take_uint("cap", 0);
    reject_leftovers();
    return g;
  }
  throw InvalidArgumentError("unknown mechanism '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------
// Per-event distribution over room positions 0..n-1 (the room's servers in id
// order). Every transmission is reported to `sink(from, to)`.

struct DeliveryOutcome {
  std::uint32_t hops = 0;  // longest chain of transmissions (gossip: rounds)
  bool complete = true;
};

/// Position of the hub among the room's servers, given members per server.
inline std::size_t select_hub(std::span<const std::uint32_t> users_per_server, HubRule rule) {
  if (users_per_server.empty()) throw InvalidArgumentError("cannot pick a hub in an empty room");
  if (rule == HubRule::first_id) return 0;
  return static_cast<std::size_t>(std::max_element(users_per_server.begin(), users_per_server.end()) -
                                  users_per_server.begin());
}

template <class Sink>
DeliveryOutcome distribute(std::size_t n, std::size_t origin, const MechanismSpec& mech, std::size_t hub,
                           Rng& rng, Sink&& sink) {
  DeliveryOutcome out;
  if (n < 2) return out;
  if (const auto* tree = std::get_if<SpanningTree>(&mech.variant())) {
    // Tree position i holds server order[i]; children of i are k*i+1 .. k*i+k.
    const std::size_t k = tree->arity;
    auto server_at = [&](std::size_t pos) {
      if (pos == 0) return origin;
      if (pos == origin) return std::size_t{0};
      return pos;
    };
    for (std::size_t parent = 0; parent * k + 1 < n; ++parent) {
      for (std::size_t c = parent * k + 1; c <= parent * k + k && c < n; ++c) {
        sink(server_at(parent), server_at(c));
      }
    }
    std::uint32_t depth = 0;
    for (std::size_t last = n - 1; last > 0; last = (last - 1) / k) ++depth;
    out.hops = depth;
    return out;
  }
  if (std::holds_alternative<Hub>(mech.variant())) {
    if (origin != hub) sink(origin, hub);
    for (std::size_t s = 0; s < n; ++s) {
      if (s != hub && s != origin) sink(hub, s);
    }
    out.hops = origin == hub ? 1 : 2;
    return out;
  }
  if (const auto* gossip = std::get_if<Gossip>(&mech.variant())) {
    std::vector<char> informed(n, 0);
    std::vector<std::size_t> informed_list{origin};
    std::vector<std::size_t> peers;
    peers.reserve(n - 1);
    informed[origin] = 1;
    const std::size_t picks = std::min<std::size_t>(gossip->fanout, n - 1);
    while (informed_list.size() < n && (gossip->round_cap == 0 || out.hops < gossip->round_cap)) {
      const std::size_t senders = informed_list.size();
      for (std::size_t i = 0; i < senders; ++i) {
        const std::size_t v = informed_list[i];
        peers.clear();
        for (std::size_t p = 0; p < n; ++p) {
          if (p != v) peers.push_back(p);
        }
        for (std::size_t j = 0; j < picks; ++j) {
          const std::size_t pick = j + static_cast<std::size_t>(rng.below(peers.size() - j));
          std::swap(peers[j], peers[pick]);
          const std::size_t to = peers[j];
          sink(v, to);
          if (!informed[to]) {
            informed[to] = 1;
            informed_list.push_back(to);
          }
        }
      }
      ++out.hops;
    }
    out.complete = informed_list.size() == n;
    return out;
  }
  // full mesh
  for (std::size_t s = 0; s < n; ++s) {
    if (s != origin) sink(origin, s);
  }
  out.hops = 1;
  return out;
}

// ---------------------------------------------------------------------------

struct Transmissions {
  std::uint64_t tx = 0;
  std::uint64_t rx = 0;
  friend bool operator==(const Transmissions&, const Transmissions&) = default;
};

struct RoomServer {
  EntityId server;
  std::uint32_t users = 1;  // room members homed there; drives hub selection
};

struct EventCost {
  std::map<EntityId, Transmissions> per_server;
  DeliveryOutcome outcome;
};

/// Transactions caused by a single event from `origin` in a room whose
/// participating servers are `room`. Gossip draws from the stream `seed`.
inline EventCost per_event_cost(std::vector<RoomServer> room, const EntityId& origin, const MechanismSpec& mech,
                                std::uint64_t seed = 0) {
  std::sort(room.begin(), room.end(), [](const RoomServer& a, const RoomServer& b) { return a.server < b.server; });
  for (std::size_t i = 1; i < room.size(); ++i) {
    if (room[i].server == room[i - 1].server) {
      throw InvalidArgumentError("server '" + room[i].server.str() + "' listed twice in room");
    }
  }
  if (room.size() < 2) throw InvalidArgumentError("a room needs at least two servers to distribute events");
  auto it = std::find_if(room.begin(), room.end(), [&](const RoomServer& r) { return r.server == origin; });
  if (it == room.end()) throw InvalidArgumentError("origin '" + origin.str() + "' is not in the room");
  const auto origin_pos = static_cast<std::size_t>(it - room.begin());

  std::vector<std::uint32_t> users;
  for (const auto& r : room) users.push_back(r.users);
  std::size_t hub = 0;
  if (const auto* h = std::get_if<Hub>(&mech.variant())) hub = select_hub(users, h->rule);

  std::vector<Transmissions> counts(room.size());
  Rng rng(seed);
  EventCost cost;
  cost.outcome = distribute(room.size(), origin_pos, mech, hub, rng, [&](std::size_t from, std::size_t to) {
    ++counts[from].tx;
    ++counts[to].rx;
  });
  for (std::size_t i = 0; i < room.size(); ++i) cost.per_server.emplace(room[i].server, counts[i]);
  return cost;
}

}  // namespace fedload
