#pragma once

#include "fedload/event_sim.hpp"
#include "fedload/load_model.hpp"
#include "fedload/mechanism.hpp"
#include "fedload/structure.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fedload {

/// Expected cost of running one mechanism in one federated room.
struct RoomCost {
  EntityId room;
  MechanismSpec mechanism;
  std::vector<EntityId> servers{};  // the room's servers, id order
  std::vector<Rational> tx{};       // expected transactions per unit time
  std::vector<Rational> rx{};
  Rational event_rate{};            // events per unit time posted to the room
  Rational total_tx{};
  /// Expected, over the room's events, of the largest per-server load
  /// (tx + rx) caused by a single event.
  Rational peak_event_load{};
  double mean_hops = 0;           // informational only
  bool estimated = false;         // gossip: values are sample means
  double total_tx_ci95 = 0;       // half-width of the 95% interval on total_tx
  std::uint32_t trials = 0;
};

enum class Objective { min_max_server_load, min_total_transactions };

inline std::string to_string(Objective o) {
  return o == Objective::min_max_server_load ? "min-max-server-load" : "min-total-transactions";
}

inline Objective parse_objective(std::string_view s) {
  if (s == "min-max-server-load") return Objective::min_max_server_load;
  if (s == "min-total-transactions") return Objective::min_total_transactions;
  throw InvalidArgumentError("unknown objective '" + std::string(s) + "'");
}

inline const Rational& objective_value(const RoomCost& cost, Objective o) {
  return o == Objective::min_max_server_load ? cost.peak_event_load : cost.total_tx;
}

inline constexpr std::uint64_t kDefaultEvaluationSeed = 0x5eed;
inline constexpr std::uint32_t kDefaultGossipTrials = 2000;

namespace detail {

struct PerEventTally {
  std::vector<std::uint64_t> tx, rx;
  std::uint64_t peak_sum = 0;
  std::uint64_t hops_sum = 0;
  std::vector<double> totals;  // total tx of each trial
};

inline PerEventTally tally_events(std::size_t n, std::size_t origin, const MechanismSpec& mech, std::size_t hub,
                                  std::uint32_t trials, std::uint64_t seed) {
  PerEventTally t;
  t.tx.assign(n, 0);
  t.rx.assign(n, 0);
  Rng rng(seed, origin);
  std::vector<std::uint64_t> tx(n), rx(n);
  for (std::uint32_t i = 0; i < trials; ++i) {
    std::fill(tx.begin(), tx.end(), 0);
    std::fill(rx.begin(), rx.end(), 0);
    std::uint64_t total = 0;
    const auto outcome = distribute(n, origin, mech, hub, rng, [&](std::size_t from, std::size_t to) {
      ++tx[from];
      ++rx[to];
      ++total;
    });
    std::uint64_t peak = 0;
    for (std::size_t v = 0; v < n; ++v) {
      t.tx[v] += tx[v];
      t.rx[v] += rx[v];
      peak = std::max(peak, tx[v] + rx[v]);
    }
    t.peak_sum += peak;
    t.hops_sum += outcome.hops;
    t.totals.push_back(static_cast<double>(total));
  }
  return t;
}

}  // namespace detail

/// Expected per-server transaction rates of `mech` in `room`. Origin server s
/// posts events at sum_{u in U_r & U_s} lambda/|R_u|; each event costs what
/// the mechanism's per-event distribution costs. Deterministic mechanisms are
/// evaluated exactly. Gossip is estimated from `gossip_trials` seeded runs of
/// a single origin, using the fact that uniform peer choice makes all
/// non-origin servers exchangeable.
inline RoomCost expected_room_cost(const StructureIndex& idx, const ModelParams& params, const EntityId& room,
                                   const MechanismSpec& mech, std::uint64_t eval_seed = kDefaultEvaluationSeed,
                                   std::uint32_t gossip_trials = kDefaultGossipTrials) {
  const auto r = idx.room_index(room);
  if (!idx.is_federated(r)) throw InvalidArgumentError("room '" + room.str() + "' is local to one server");
  const auto servers = idx.servers_of_room(r);
  const std::size_t n = servers.size();

  RoomCost cost{room, mech};
  cost.servers.reserve(n);
  for (auto s : servers) cost.servers.push_back(idx.servers()[s]);
  cost.tx.assign(n, 0);
  cost.rx.assign(n, 0);

  std::vector<Rational> origin_rate(n, 0);
  std::vector<std::uint32_t> users(n, 0);
  for (auto u : idx.members(r)) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(servers.begin(), servers.end(), idx.home(u)) -
                                              servers.begin());
    ++users[pos];
    origin_rate[pos] += params.lambda() / static_cast<long long>(idx.rooms_of_user(u).size());
  }
  for (const auto& e : origin_rate) cost.event_rate += e;

  std::size_t hub = 0;
  if (const auto* h = std::get_if<Hub>(&mech.variant())) hub = select_hub(users, h->rule);

  Rational peak_weighted = 0;
  double hops_weighted = 0;
  if (mech.deterministic()) {
    for (std::size_t p = 0; p < n; ++p) {
      if (origin_rate[p] == 0) continue;
      const auto t = detail::tally_events(n, p, mech, hub, 1, eval_seed);
      for (std::size_t v = 0; v < n; ++v) {
        cost.tx[v] += origin_rate[p] * t.tx[v];
        cost.rx[v] += origin_rate[p] * t.rx[v];
      }
      peak_weighted += origin_rate[p] * t.peak_sum;
      hops_weighted += to_double(origin_rate[p]) * static_cast<double>(t.hops_sum);
    }
  } else {
    const std::uint32_t trials = std::max<std::uint32_t>(gossip_trials, 1);
    const auto t = detail::tally_events(n, 0, mech, hub, trials, eval_seed);
    // Origin-relative means: A for the origin, B for any other server.
    const Rational a_tx(t.tx[0], trials), a_rx(t.rx[0], trials);
    std::uint64_t b_tx_sum = 0, b_rx_sum = 0;
    for (std::size_t v = 1; v < n; ++v) {
      b_tx_sum += t.tx[v];
      b_rx_sum += t.rx[v];
    }
    const Rational b_tx(b_tx_sum, static_cast<std::uint64_t>(trials) * (n - 1));
    const Rational b_rx(b_rx_sum, static_cast<std::uint64_t>(trials) * (n - 1));
    for (std::size_t v = 0; v < n; ++v) {
      const Rational others = cost.event_rate - origin_rate[v];
      cost.tx[v] = origin_rate[v] * a_tx + others * b_tx;
      cost.rx[v] = origin_rate[v] * a_rx + others * b_rx;
    }
    peak_weighted = cost.event_rate * Rational(t.peak_sum, trials);
    hops_weighted = to_double(cost.event_rate) * static_cast<double>(t.hops_sum) / trials;

    double mean = 0, var = 0;
    for (double x : t.totals) mean += x;
    mean /= trials;
    for (double x : t.totals) var += (x - mean) * (x - mean);
    var = trials > 1 ? var / (trials - 1) : 0.0;
    cost.estimated = true;
    cost.trials = trials;
    cost.total_tx_ci95 = 1.96 * std::sqrt(var / trials) * to_double(cost.event_rate);
  }
  for (const auto& v : cost.tx) cost.total_tx += v;
  if (cost.event_rate != 0) {
    cost.peak_event_load = peak_weighted / cost.event_rate;
    cost.mean_hops = hops_weighted / to_double(cost.event_rate);
  }
  return cost;
}

// ---------------------------------------------------------------------------

struct CandidateScore {
  MechanismSpec mechanism;
  Rational objective;
  RoomCost cost;
};

struct RoomRecommendation {
  EntityId room;
  std::size_t chosen = 0;  // index into scores
  std::vector<CandidateScore> scores{};

  const CandidateScore& best() const { return scores[chosen]; }
};

/// Per-room mechanism choice. Local rooms are never assigned.
struct MechanismAssignment {
  Objective objective = Objective::min_max_server_load;
  std::map<EntityId, MechanismSpec> rooms;
  std::vector<RoomRecommendation> details;  // room id order

  RoomAssignment to_room_assignment() const { return RoomAssignment{rooms, std::nullopt}; }
};

/// Picks, per room, the candidate with the smallest objective value; ties go
/// to the earlier candidate. Rooms are evaluated independently. An empty
/// `rooms` list means every federated room.
inline MechanismAssignment recommend(const StructureIndex& idx, const ModelParams& params,
                                     std::vector<EntityId> rooms, const std::vector<MechanismSpec>& candidates,
                                     Objective objective, std::uint64_t eval_seed = kDefaultEvaluationSeed) {
  if (candidates.empty()) throw InvalidArgumentError("recommend needs at least one candidate mechanism");
  if (rooms.empty()) {
    for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
      if (idx.is_federated(r)) rooms.push_back(idx.rooms()[r]);
    }
  }
  std::sort(rooms.begin(), rooms.end());
  rooms.erase(std::unique(rooms.begin(), rooms.end()), rooms.end());

  MechanismAssignment out;
  out.objective = objective;
  for (const auto& room : rooms) {
    RoomRecommendation rec{room};
    for (const auto& mech : candidates) {
      RoomCost cost = expected_room_cost(idx, params, room, mech, eval_seed);
      Rational value = objective_value(cost, objective);
      rec.scores.push_back({mech, std::move(value), std::move(cost)});
      if (rec.scores.back().objective < rec.scores[rec.chosen].objective) rec.chosen = rec.scores.size() - 1;
    }
    out.rooms.emplace(room, rec.best().mechanism);
    out.details.push_back(std::move(rec));
  }
  return out;
}

}  // namespace fedload
