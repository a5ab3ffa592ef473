#pragma once

#include "fedload/rational.hpp"
#include "fedload/structure.hpp"

#include <boost/multiprecision/integer.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fedload {

/// Traffic model parameters. Every user emits events at rate `lambda`,
/// spread uniformly over the rooms they are in.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(Rational lambda) : lambda_(std::move(lambda)) {
    if (lambda_ <= 0) throw InvalidArgumentError("lambda must be > 0, got " + to_string(lambda_));
  }

  const Rational& lambda() const noexcept { return lambda_; }

 private:
  Rational lambda_{1};
};

namespace detail {

// Per-user rates lambda/|R_u| share the denominator L = lcm{|R_u|}, so the
// model sums are accumulated as integers in units of lambda/L and only
// turned into rationals at the end. Much cheaper than rational additions
// and still exact.
class UnitWeights {
 public:
  explicit UnitWeights(const StructureIndex& idx) {
    std::vector<std::size_t> degrees;
    degrees.reserve(idx.user_count());
    for (StructureIndex::Index u = 0; u < idx.user_count(); ++u) {
      degrees.push_back(idx.rooms_of_user(u).size());
    }
    std::vector<std::size_t> distinct = degrees;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    scale_ = 1;
    for (std::size_t d : distinct) {
      if (d > 0) scale_ = boost::multiprecision::lcm(scale_, BigInt(d));
    }
    std::map<std::size_t, BigInt> per_degree;
    for (std::size_t d : distinct) per_degree.emplace(d, d == 0 ? BigInt(0) : BigInt(scale_ / d));
    weights_.reserve(degrees.size());
    for (std::size_t d : degrees) weights_.push_back(per_degree.at(d));
  }

  /// Rate of user u in units of lambda/L; zero for users without rooms.
  const BigInt& operator[](StructureIndex::Index u) const { return weights_[u]; }

  Rational to_rate(const BigInt& units, const Rational& lambda) const {
    return Rational(units * numerator(lambda), scale_ * denominator(lambda));
  }

 private:
  BigInt scale_;
  std::vector<BigInt> weights_;
};

}  // namespace detail

/// Sparse matrix of average transaction rates sender -> receiver. Only
/// nonzero entries are stored, sorted by (from, to); the diagonal never is.
struct TrafficMatrix {
  using Index = StructureIndex::Index;

  struct Entry {
    Index from = 0;
    Index to = 0;
    Rational rate;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::vector<EntityId> servers;
  std::vector<Entry> rates;

  /// Entry for (from, to), or nullptr when that rate is zero.
  const Entry* find(Index from, Index to) const {
    auto it = std::lower_bound(rates.begin(), rates.end(), std::make_pair(from, to),
                               [](const Entry& e, const std::pair<Index, Index>& k) {
                                 return std::make_pair(e.from, e.to) < k;
                               });
    return it != rates.end() && it->from == from && it->to == to ? &*it : nullptr;
  }

  Rational at(const EntityId& from, const EntityId& to) const {
    const Entry* e = find(index_of(from), index_of(to));
    return e ? e->rate : Rational(0);
  }

  friend bool operator==(const TrafficMatrix&, const TrafficMatrix&) = default;

 private:
  Index index_of(const EntityId& id) const {
    auto it = std::lower_bound(servers.begin(), servers.end(), id);
    if (it == servers.end() || *it != id) throw UnknownEntityError("unknown server '" + id.str() + "'");
    return static_cast<Index>(it - servers.begin());
  }
};

struct ServerLoad {
  EntityId server;
  Rational tx;
  Rational rx;

  Rational sum() const { return tx + rx; }

  friend bool operator==(const ServerLoad&, const ServerLoad&) = default;
};

/// Per-server outgoing and incoming transaction rates, in server id order.
struct LoadProfile {
  std::vector<ServerLoad> servers;
  Rational total_tx;
  Rational total_rx;

  const ServerLoad& at(const EntityId& id) const {
    auto it = std::lower_bound(servers.begin(), servers.end(), id,
                               [](const ServerLoad& l, const EntityId& v) { return l.server < v; });
    if (it == servers.end() || it->server != id) throw UnknownEntityError("unknown server '" + id.str() + "'");
    return *it;
  }

  friend bool operator==(const LoadProfile&, const LoadProfile&) = default;
};

// ---------------------------------------------------------------------------

/// Average transaction rate from server a to server b: for every room both
/// take part in, every user of a in that room contributes lambda/|R_u|.
inline Rational pairwise_rate(const StructureIndex& idx, const ModelParams& params,
                              const EntityId& a, const EntityId& b) {
  const auto ia = idx.server_index(a);
  const auto ib = idx.server_index(b);
  if (ia == ib) throw InvalidArgumentError("pairwise rate needs two distinct servers, got '" + a.str() + "' twice");
  const auto ra = idx.rooms_of_server(ia);
  const auto rb = idx.rooms_of_server(ib);
  std::vector<StructureIndex::Index> shared;
  std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(shared));
  Rational rate = 0;
  for (auto r : shared) {
    for (auto u : idx.members(r)) {
      if (idx.home(u) == ia) rate += params.lambda() / static_cast<long long>(idx.rooms_of_user(u).size());
    }
  }
  return rate;
}

inline Rational pairwise_rate(const NetworkStructure& s, const ModelParams& params, const EntityId& a,
                              const EntityId& b) {
  return pairwise_rate(StructureIndex(s), params, a, b);
}

namespace detail {

// Dense accumulator for one matrix row; only touched columns are emitted
// and reset, so a row costs O(nonzeros) rather than O(servers). Rational
// construction dominates large matrices and entry values repeat heavily,
// so conversions are memoized across rows.
class RowAccumulator {
 public:
  RowAccumulator(std::size_t n, const UnitWeights& w, const Rational& lambda)
      : units_(n), touched_(n, false), weights_(w), lambda_(lambda) {}

  void add(StructureIndex::Index col, const BigInt& units) {
    if (!touched_[col]) {
      touched_[col] = true;
      cols_.push_back(col);
    }
    units_[col] += units;
  }

  void flush(StructureIndex::Index row, TrafficMatrix& out) {
    std::sort(cols_.begin(), cols_.end());
    for (auto c : cols_) {
      if (units_[c] != 0) out.rates.push_back({row, c, rate(units_[c])});
      units_[c] = 0;
      touched_[c] = false;
    }
    cols_.clear();
  }

 private:
  const Rational& rate(const BigInt& units) {
    auto it = cache_.find(units);
    if (it == cache_.end()) it = cache_.emplace(units, weights_.to_rate(units, lambda_)).first;
    return it->second;
  }

  std::vector<BigInt> units_;
  std::vector<bool> touched_;
  std::vector<StructureIndex::Index> cols_;
  const UnitWeights& weights_;
  const Rational& lambda_;
  std::map<BigInt, Rational> cache_;
};

}  // namespace detail

/// Sender-side construction: per (server, room) the summed user rate of the
/// server's members, credited once to every other server of the room.
inline TrafficMatrix traffic_matrix(const StructureIndex& idx, const ModelParams& params) {
  const detail::UnitWeights w(idx);
  // own[r][i]: summed weight of the members of room r homed on the i-th
  // server of servers_of_room(r).
  std::vector<std::vector<BigInt>> own(idx.room_count());
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
    if (!idx.is_federated(r)) continue;
    const auto servers = idx.servers_of_room(r);
    own[r].assign(servers.size(), BigInt(0));
    for (auto u : idx.members(r)) {
      const auto pos = std::lower_bound(servers.begin(), servers.end(), idx.home(u)) - servers.begin();
      own[r][static_cast<std::size_t>(pos)] += w[u];
    }
  }
  TrafficMatrix m;
  m.servers.assign(idx.servers().begin(), idx.servers().end());
  detail::RowAccumulator row(idx.server_count(), w, params.lambda());
  for (StructureIndex::Index a = 0; a < idx.server_count(); ++a) {
    for (auto r : idx.rooms_of_server(a)) {
      if (!idx.is_federated(r)) continue;
      const auto servers = idx.servers_of_room(r);
      const auto pos = std::lower_bound(servers.begin(), servers.end(), a) - servers.begin();
      const BigInt& units = own[r][static_cast<std::size_t>(pos)];
      if (units == 0) continue;
      for (auto b : servers) {
        if (b != a) row.add(b, units);
      }
    }
    row.flush(a, m);
  }
  return m;
}

inline TrafficMatrix traffic_matrix(const NetworkStructure& s, const ModelParams& params) {
  return traffic_matrix(StructureIndex(s), params);
}

/// Receiver-side construction, entry (b, a) = rx_{b <- a}: walks every
/// receiving server's federated rooms and attributes each foreign member's
/// rate to that member's home. Independent of the sender-side aggregation,
/// so comparing it with the transpose of traffic_matrix() checks the pair
/// symmetry rx_{b<-a} = tx_{a->b}.
inline TrafficMatrix receive_matrix(const StructureIndex& idx, const ModelParams& params) {
  const detail::UnitWeights w(idx);
  TrafficMatrix m;
  m.servers.assign(idx.servers().begin(), idx.servers().end());
  detail::RowAccumulator row(idx.server_count(), w, params.lambda());
  for (StructureIndex::Index b = 0; b < idx.server_count(); ++b) {
    for (auto r : idx.rooms_of_server(b)) {
      if (!idx.is_federated(r)) continue;
      for (auto u : idx.members(r)) {
        const auto a = idx.home(u);
        if (a != b && w[u] != 0) row.add(a, w[u]);
      }
    }
    row.flush(b, m);
  }
  return m;
}

/// Per-server loads straight from the closed forms
///   tx_s = sum_{r in Q_s} sum_{u in U_r & U_s} lambda/|R_u| * |F_r \ {s}|
///   rx_s = sum_{r in Q_s} sum_{u in U_r \ U_s} lambda/|R_u|
/// in O(memberships), then checked against sum tx = sum rx. A mismatch
/// means a bug here, not bad input.
inline LoadProfile load_profile(const StructureIndex& idx, const ModelParams& params) {
  const detail::UnitWeights w(idx);
  const std::size_t n = idx.server_count();
  std::vector<BigInt> tx(n), rx(n), own(n);
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
    if (!idx.is_federated(r)) continue;
    const auto servers = idx.servers_of_room(r);
    BigInt room_total = 0;
    for (auto s : servers) own[s] = 0;
    for (auto u : idx.members(r)) {
      own[idx.home(u)] += w[u];
      room_total += w[u];
    }
    const auto fanout = static_cast<long long>(servers.size() - 1);
    for (auto s : servers) {
      tx[s] += own[s] * fanout;
      rx[s] += room_total - own[s];
    }
  }

  LoadProfile profile;
  profile.servers.reserve(n);
  BigInt total_tx = 0, total_rx = 0;
  for (StructureIndex::Index s = 0; s < n; ++s) {
    total_tx += tx[s];
    total_rx += rx[s];
    profile.servers.push_back(
        {idx.servers()[s], w.to_rate(tx[s], params.lambda()), w.to_rate(rx[s], params.lambda())});
  }
  profile.total_tx = w.to_rate(total_tx, params.lambda());
  profile.total_rx = w.to_rate(total_rx, params.lambda());

  if (profile.total_tx != profile.total_rx) {
    throw InternalConsistencyError("sum tx (" + to_string(profile.total_tx) + ") != sum rx (" +
                                   to_string(profile.total_rx) + ")");
  }
  return profile;
}

inline LoadProfile load_profile(const NetworkStructure& s, const ModelParams& params) {
  return load_profile(StructureIndex(s), params);
}

// ---------------------------------------------------------------------------
// Decentralization what-ifs.

/// Prefix marking servers created by split_user / full_decentralization.
inline constexpr std::string_view kDedicatedServerPrefix = "~";

inline EntityId dedicated_server_id(const EntityId& user) {
  return EntityId(std::string(kDedicatedServerPrefix) + user.str());
}

/// Moves `user` onto a fresh single-user server; memberships are unchanged.
/// The old home server is kept even if it ends up empty.
inline NetworkStructure split_user(const NetworkStructure& s, const EntityId& user) {
  if (!s.users.contains(user)) throw UnknownEntityError("unknown user '" + user.str() + "'");
  const EntityId server = dedicated_server_id(user);
  if (s.servers.contains(server)) {
    throw InvalidArgumentError("server id '" + server.str() + "' already exists");
  }
  NetworkStructure out = s;
  out.add_server(server);
  out.add_user(user, server);
  return out;
}

/// Every user on its own dedicated server; the original servers disappear.
inline NetworkStructure full_decentralization(const NetworkStructure& s) {
  NetworkStructure out;
  out.rooms = s.rooms;
  for (const auto& [user, home] : s.users) {
    const EntityId server = dedicated_server_id(user);
    out.add_server(server);
    out.add_user(user, server);
  }
  return out;
}

}  // namespace fedload
