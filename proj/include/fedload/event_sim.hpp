#pragma once

#include "fedload/load_model.hpp"
#include "fedload/mechanism.hpp"
#include "fedload/random.hpp"
#include "fedload/structure.hpp"

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fedload {

/// Which mechanism each room uses. Rooms without an explicit entry use
/// `fallback`; with no fallback they are an error at simulation time.
struct RoomAssignment {
  std::map<EntityId, MechanismSpec> rooms;
  std::optional<MechanismSpec> fallback;

  static RoomAssignment uniform(MechanismSpec mech) { return RoomAssignment{{}, std::move(mech)}; }

  const MechanismSpec* find(const EntityId& room) const {
    if (auto it = rooms.find(room); it != rooms.end()) return &it->second;
    return fallback ? &*fallback : nullptr;
  }
};

/// Outcome of one replication. Vectors are aligned with the index order of
/// servers and rooms.
struct SimReport {
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  std::uint64_t events = 0;
  std::uint64_t federated_events = 0;        // events in rooms with >= 2 servers
  std::uint64_t incomplete_deliveries = 0;   // gossip stopped by its round cap
  std::vector<EntityId> servers;
  std::vector<Transmissions> counts;
  std::vector<EntityId> rooms;
  std::vector<std::uint64_t> room_events;

  std::uint64_t total_tx() const {
    std::uint64_t t = 0;
    for (const auto& c : counts) t += c.tx;
    return t;
  }
  std::uint64_t total_rx() const {
    std::uint64_t t = 0;
    for (const auto& c : counts) t += c.rx;
    return t;
  }

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

namespace detail {

struct RoomRoute {
  const MechanismSpec* mech = nullptr;
  std::size_t hub = 0;
};

inline SimReport run_replication(const StructureIndex& idx, const std::vector<RoomRoute>& routes,
                                 const std::vector<StructureIndex::Index>& active_users, std::uint64_t n_events,
                                 std::uint64_t seed, std::uint32_t replication) {
  SimReport rep;
  rep.seed = seed;
  rep.replication = replication;
  rep.events = n_events;
  rep.servers.assign(idx.servers().begin(), idx.servers().end());
  rep.rooms.assign(idx.rooms().begin(), idx.rooms().end());
  rep.counts.assign(idx.server_count(), {});
  rep.room_events.assign(idx.room_count(), 0);

  Rng rng(seed, replication);
  for (std::uint64_t e = 0; e < n_events; ++e) {
    const auto user = active_users[rng.below(active_users.size())];
    const auto user_rooms = idx.rooms_of_user(user);
    const auto room = user_rooms[rng.below(user_rooms.size())];
    ++rep.room_events[room];
    const auto servers = idx.servers_of_room(room);
    if (servers.size() < 2) continue;
    ++rep.federated_events;
    const auto origin = static_cast<std::size_t>(
        std::lower_bound(servers.begin(), servers.end(), idx.home(user)) - servers.begin());
    const auto outcome = distribute(servers.size(), origin, *routes[room].mech, routes[room].hub, rng,
                                    [&](std::size_t from, std::size_t to) {
                                      ++rep.counts[servers[from]].tx;
                                      ++rep.counts[servers[to]].rx;
                                    });
    if (!outcome.complete) ++rep.incomplete_deliveries;
  }
  return rep;
}

}  // namespace detail

/// Runs `replications` independent event simulations. Each event picks a
/// user uniformly among users with at least one room (all users share the
/// same rate), then one of that user's rooms uniformly, and spreads it with
/// the room's mechanism. Replication i draws from stream (seed, i), so the
/// reports do not depend on how replications are scheduled.
inline std::vector<SimReport> simulate(const StructureIndex& idx, const ModelParams& /*params*/,
                                       const RoomAssignment& assignment, std::uint64_t n_events, std::uint64_t seed,
                                       std::uint32_t replications = 1) {
  std::vector<detail::RoomRoute> routes(idx.room_count());
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
    if (!idx.is_federated(r)) continue;
    const MechanismSpec* mech = assignment.find(idx.rooms()[r]);
    if (mech == nullptr) {
      throw InvalidArgumentError("room '" + idx.rooms()[r].str() + "' has no mechanism assigned");
    }
    routes[r].mech = mech;
    if (const auto* hub = std::get_if<Hub>(&mech->variant())) {
      const auto servers = idx.servers_of_room(r);
      std::vector<std::uint32_t> users(servers.size(), 0);
      for (auto u : idx.members(r)) {
        const auto pos = std::lower_bound(servers.begin(), servers.end(), idx.home(u)) - servers.begin();
        ++users[static_cast<std::size_t>(pos)];
      }
      routes[r].hub = select_hub(users, hub->rule);
    }
  }
  std::vector<StructureIndex::Index> active;
  for (StructureIndex::Index u = 0; u < idx.user_count(); ++u) {
    if (!idx.rooms_of_user(u).empty()) active.push_back(u);
  }
  if (n_events > 0 && active.empty()) {
    throw InvalidArgumentError("cannot simulate events: no user is a member of any room");
  }

  std::vector<std::future<SimReport>> jobs;
  jobs.reserve(replications);
  for (std::uint32_t i = 0; i < replications; ++i) {
    jobs.push_back(std::async(std::launch::async, detail::run_replication, std::cref(idx), std::cref(routes),
                              std::cref(active), n_events, seed, i));
  }
  std::vector<SimReport> reports;
  reports.reserve(replications);
  for (auto& j : jobs) reports.push_back(j.get());
  return reports;
}

inline std::vector<SimReport> simulate(const NetworkStructure& s, const ModelParams& params,
                                       const RoomAssignment& assignment, std::uint64_t n_events, std::uint64_t seed,
                                       std::uint32_t replications = 1) {
  return simulate(StructureIndex(s), params, assignment, n_events, seed, replications);
}

// ---------------------------------------------------------------------------

struct CrossCheckRow {
  EntityId server;
  Rational expected_tx;  // analytical rate
  Rational expected_rx;
  double empirical_tx = 0;  // mean count across replications, scaled to a rate
  double empirical_rx = 0;
  double rel_error_tx = 0;
  double rel_error_rx = 0;
  bool flagged = false;
};

struct CrossCheck {
  std::vector<CrossCheckRow> rows;
  double tolerance = 0;
  bool degenerate = false;  // no events simulated; nothing to compare

  bool all_within() const {
    if (degenerate) return false;
    for (const auto& r : rows) {
      if (r.flagged) return false;
    }
    return true;
  }
};

inline double relative_error(double empirical, const Rational& expected) {
  const double e = to_double(expected);
  if (e == 0.0) return empirical == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(empirical - e) / e;
}

/// Compares full-mesh simulation counts with the analytical loads. Counts are
/// turned into rates by multiplying the per-event mean with the total event
/// rate lambda * (number of users with at least one room).
inline CrossCheck cross_check(const StructureIndex& idx, const ModelParams& params,
                              const std::vector<SimReport>& reports, const RoomAssignment& assignment,
                              double tolerance = 0.01) {
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
    if (!idx.is_federated(r)) continue;
    const MechanismSpec* mech = assignment.find(idx.rooms()[r]);
    if (mech == nullptr || !mech->is<FullMesh>()) {
      throw InvalidArgumentError("cross-check needs full_mesh in every federated room; room '" +
                                 idx.rooms()[r].str() + "' differs");
    }
  }
  const LoadProfile load = load_profile(idx, params);
  CrossCheck out;
  out.tolerance = tolerance;

  std::uint64_t active = 0;
  for (StructureIndex::Index u = 0; u < idx.user_count(); ++u) {
    if (!idx.rooms_of_user(u).empty()) ++active;
  }
  const double total_rate = to_double(params.lambda()) * static_cast<double>(active);

  std::uint64_t events = 0;
  for (const auto& rep : reports) {
    if (rep.servers.size() != idx.server_count()) {
      throw InvalidArgumentError("simulation report does not belong to this structure");
    }
    events += rep.events;
  }
  out.degenerate = events == 0;

  for (StructureIndex::Index s = 0; s < idx.server_count(); ++s) {
    CrossCheckRow row{idx.servers()[s], load.servers[s].tx, load.servers[s].rx};
    if (!out.degenerate) {
      double tx = 0, rx = 0;
      for (const auto& rep : reports) {
        tx += static_cast<double>(rep.counts[s].tx);
        rx += static_cast<double>(rep.counts[s].rx);
      }
      row.empirical_tx = tx / static_cast<double>(events) * total_rate;
      row.empirical_rx = rx / static_cast<double>(events) * total_rate;
      row.rel_error_tx = relative_error(row.empirical_tx, row.expected_tx);
      row.rel_error_rx = relative_error(row.empirical_rx, row.expected_rx);
      row.flagged = !(row.rel_error_tx <= tolerance) || !(row.rel_error_rx <= tolerance);
    } else {
      row.flagged = true;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace fedload
