#pragma once

#include "fedload/load_model.hpp"
#include "fedload/rational.hpp"
#include "fedload/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

namespace fedload {

// ---------------------------------------------------------------------------
// Rank tables

struct RankRow {
  std::uint64_t rank = 0;  // 1-based
  EntityId id;
  std::uint64_t primary = 0;
  std::uint64_t secondary = 0;
};

/// Rows sorted ascending by (primary, secondary, id); rank 1 is the smallest.
using RankTable = std::vector<RankRow>;

namespace detail {

inline RankTable rank(std::vector<RankRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const RankRow& a, const RankRow& b) {
    return std::tie(a.primary, a.secondary, a.id) < std::tie(b.primary, b.secondary, b.id);
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return rows;
}

}  // namespace detail

/// One row per server: (users homed there, rooms it takes part in).
inline RankTable server_rank_table(const StructureIndex& idx) {
  std::vector<RankRow> rows;
  rows.reserve(idx.server_count());
  for (StructureIndex::Index s = 0; s < idx.server_count(); ++s) {
    rows.push_back({0, idx.servers()[s], idx.users_of_server(s).size(), idx.rooms_of_server(s).size()});
  }
  return detail::rank(std::move(rows));
}

/// One row per room: (participating servers, members).
inline RankTable room_rank_table(const StructureIndex& idx) {
  std::vector<RankRow> rows;
  rows.reserve(idx.room_count());
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) {
    rows.push_back({0, idx.rooms()[r], idx.servers_of_room(r).size(), idx.members(r).size()});
  }
  return detail::rank(std::move(rows));
}

// ---------------------------------------------------------------------------
// Half-decade histograms

struct HistogramBin {
  int k = 0;  // bin covers [10^(k/2), 10^((k+1)/2))
  double lower = 1;
  double upper = 1;
  std::uint64_t count = 0;
};

struct LogHistogram {
  std::vector<HistogramBin> bins;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& b : bins) t += b.count;
    return t;
  }
};

namespace detail {

// v >= 10^(k/2), decided in integers: v^2 >= 10^k.
inline bool at_least_half_decade(std::uint64_t v, int k) {
  unsigned __int128 p = 1;
  for (int i = 0; i < k; ++i) {
    p *= 10;
    if (p > static_cast<unsigned __int128>(v) * v) return false;
  }
  return static_cast<unsigned __int128>(v) * v >= p;
}

inline int half_decade_bin(std::uint64_t v) {
  int k = 0;
  while (at_least_half_decade(v, k + 1)) ++k;
  return k;
}

}  // namespace detail

/// Bins every value into [10^(k/2), 10^((k+1)/2)), lower edge inclusive.
/// Bins run contiguously from k = 0 up to the bin of the largest value.
inline LogHistogram log_histogram(const std::vector<std::uint64_t>& values) {
  LogHistogram h;
  int top = -1;
  std::vector<int> bin_of;
  bin_of.reserve(values.size());
  for (auto v : values) {
    if (v < 1) throw InvalidArgumentError("log histogram values must be >= 1, got " + std::to_string(v));
    bin_of.push_back(detail::half_decade_bin(v));
    top = std::max(top, bin_of.back());
  }
  for (int k = 0; k <= top; ++k) {
    h.bins.push_back({k, std::pow(10.0, k / 2.0), std::pow(10.0, (k + 1) / 2.0), 0});
  }
  for (int k : bin_of) ++h.bins[static_cast<std::size_t>(k)].count;
  return h;
}

/// Drops zeros (log of 0 is undefined) before binning.
inline LogHistogram log_histogram_positive(const std::vector<std::uint64_t>& values) {
  std::vector<std::uint64_t> positive;
  std::copy_if(values.begin(), values.end(), std::back_inserter(positive), [](auto v) { return v > 0; });
  return log_histogram(positive);
}

inline std::vector<std::uint64_t> servers_per_room(const StructureIndex& idx) {
  std::vector<std::uint64_t> v;
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) v.push_back(idx.servers_of_room(r).size());
  return v;
}

inline std::vector<std::uint64_t> users_per_room(const StructureIndex& idx) {
  std::vector<std::uint64_t> v;
  for (StructureIndex::Index r = 0; r < idx.room_count(); ++r) v.push_back(idx.members(r).size());
  return v;
}

inline std::vector<std::uint64_t> users_per_server(const StructureIndex& idx) {
  std::vector<std::uint64_t> v;
  for (StructureIndex::Index s = 0; s < idx.server_count(); ++s) v.push_back(idx.users_of_server(s).size());
  return v;
}

inline std::vector<std::uint64_t> rooms_per_user(const StructureIndex& idx) {
  std::vector<std::uint64_t> v;
  for (StructureIndex::Index u = 0; u < idx.user_count(); ++u) v.push_back(idx.rooms_of_user(u).size());
  return v;
}

// ---------------------------------------------------------------------------
// Cumulative fractions of load

struct CumulativeRow {
  std::uint64_t rank = 0;
  EntityId server;
  std::uint64_t users = 0;
  Rational tx, rx;  // absolute rates of this server
  // Fractions of the federation total contributed by this server alone ...
  Rational users_share{}, tx_share{}, rx_share{}, sum_share{};
  // ... and accumulated over ranks 1..rank.
  Rational users_cum{}, tx_cum{}, rx_cum{}, sum_cum{};
};

struct CumulativeSeries {
  std::vector<CumulativeRow> rows;
  bool degenerate = false;  // all loads zero: load fractions are left at 0
};

/// Servers ordered by (users, tx, id) ascending. Every quantity is
/// normalized by its own total; `sum` uses total tx + total rx.
inline CumulativeSeries cumulative_fractions(const LoadProfile& load, const StructureIndex& idx) {
  if (load.servers.size() != idx.server_count()) {
    throw InvalidArgumentError("load profile and structure have different server sets");
  }
  for (std::size_t s = 0; s < load.servers.size(); ++s) {
    if (load.servers[s].server != idx.servers()[s]) {
      throw InvalidArgumentError("load profile and structure have different server sets");
    }
  }
  if (load.total_tx != load.total_rx) {
    throw InternalConsistencyError("total tx != total rx; fractions would not be comparable");
  }

  std::vector<std::size_t> order(load.servers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ua = idx.users_of_server(static_cast<StructureIndex::Index>(a)).size();
    const auto ub = idx.users_of_server(static_cast<StructureIndex::Index>(b)).size();
    if (ua != ub) return ua < ub;
    if (load.servers[a].tx != load.servers[b].tx) return load.servers[a].tx < load.servers[b].tx;
    return load.servers[a].server < load.servers[b].server;
  });

  CumulativeSeries out;
  const Rational total_users = static_cast<long long>(idx.user_count());
  const Rational total_sum = load.total_tx + load.total_rx;
  out.degenerate = total_sum == 0;
  auto frac = [](const Rational& x, const Rational& total) { return total == 0 ? Rational(0) : Rational(x / total); };

  Rational users_acc = 0, tx_acc = 0, rx_acc = 0, sum_acc = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& l = load.servers[order[i]];
    const auto users = idx.users_of_server(static_cast<StructureIndex::Index>(order[i])).size();
    CumulativeRow row{i + 1, l.server, users, l.tx, l.rx};
    row.users_share = frac(Rational(static_cast<long long>(users)), total_users);
    row.tx_share = frac(l.tx, load.total_tx);
    row.rx_share = frac(l.rx, load.total_rx);
    row.sum_share = frac(l.sum(), total_sum);
    users_acc += row.users_share;
    tx_acc += row.tx_share;
    rx_acc += row.rx_share;
    sum_acc += row.sum_share;
    row.users_cum = users_acc;
    row.tx_cum = tx_acc;
    row.rx_cum = rx_acc;
    row.sum_cum = sum_acc;
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary shares

struct SummaryThresholds {
  std::vector<Rational> top_server_fractions{Rational(1, 100)};  // share of users on top p of servers
  std::vector<std::uint64_t> room_servers_below{10};             // rooms with < N servers
  std::vector<std::uint64_t> room_users_below{10, 100};          // rooms with < N users
  std::vector<std::uint64_t> room_users_at_most{100};            // rooms with <= N users
  std::vector<std::uint64_t> user_rooms_at_most{3};              // users in <= N rooms
  std::vector<std::uint64_t> server_users_at_most{3};            // servers with <= N users
  std::vector<std::uint64_t> server_users_above{100};            // servers with > N users
};

struct ShareStat {
  std::string name;  // e.g. "rooms_servers_lt_10"
  std::uint64_t threshold_count = 0;
  Rational share;
};

struct SummaryStats {
  std::uint64_t servers = 0;
  std::uint64_t users = 0;
  std::uint64_t rooms = 0;
  std::uint64_t largest_server_users = 0;
  std::uint64_t largest_room_servers = 0;
  std::uint64_t largest_room_users = 0;
  std::uint64_t most_rooms_per_user = 0;
  std::vector<ShareStat> shares;

  const ShareStat& share(std::string_view name) const {
    for (const auto& s : shares) {
      if (s.name == name) return s;
    }
    throw InvalidArgumentError("no share statistic named '" + std::string(name) + "'");
  }
};

/// Number of top servers making up fraction p of all servers: floor(p * n),
/// at least one when n > 0.
inline std::uint64_t top_count(std::uint64_t n, const Rational& p) {
  if (n == 0) return 0;
  const Rational exact = p * static_cast<long long>(n);
  const auto floor_v = static_cast<std::uint64_t>(BigInt(numerator(exact) / denominator(exact)));
  return std::clamp<std::uint64_t>(floor_v, 1, n);
}

inline SummaryStats summary(const StructureIndex& idx, const SummaryThresholds& th = {}) {
  SummaryStats st;
  st.servers = idx.server_count();
  st.users = idx.user_count();
  st.rooms = idx.room_count();
  const auto ups = users_per_server(idx);
  const auto spr = servers_per_room(idx);
  const auto upr = users_per_room(idx);
  const auto rpu = rooms_per_user(idx);
  auto max_of = [](const std::vector<std::uint64_t>& v) -> std::uint64_t {
    return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
  };
  st.largest_server_users = max_of(ups);
  st.largest_room_servers = max_of(spr);
  st.largest_room_users = max_of(upr);
  st.most_rooms_per_user = max_of(rpu);

  auto share_of = [](const std::vector<std::uint64_t>& v, auto pred) {
    std::uint64_t c = 0;
    for (auto x : v) c += pred(x) ? 1 : 0;
    return std::make_pair(c, v.empty() ? Rational(0) : Rational(static_cast<long long>(c),
                                                                 static_cast<long long>(v.size())));
  };
  auto add = [&](std::string name, std::pair<std::uint64_t, Rational> r) {
    st.shares.push_back({std::move(name), r.first, std::move(r.second)});
  };

  std::vector<std::uint64_t> sorted_users = ups;
  std::sort(sorted_users.begin(), sorted_users.end(), std::greater<>());
  for (const auto& p : th.top_server_fractions) {
    const auto k = top_count(sorted_users.size(), p);
    std::uint64_t held = 0;
    for (std::uint64_t i = 0; i < k; ++i) held += sorted_users[i];
    add("users_on_top_" + to_decimal(p * 100, 2) + "pct_servers",
        {k, st.users == 0 ? Rational(0)
                          : Rational(static_cast<long long>(held), static_cast<long long>(st.users))});
  }
  for (auto n : th.room_servers_below) {
    add("rooms_servers_lt_" + std::to_string(n), share_of(spr, [n](auto x) { return x < n; }));
  }
  for (auto n : th.room_users_below) {
    add("rooms_users_lt_" + std::to_string(n), share_of(upr, [n](auto x) { return x < n; }));
  }
  for (auto n : th.room_users_at_most) {
    add("rooms_users_le_" + std::to_string(n), share_of(upr, [n](auto x) { return x <= n; }));
  }
  for (auto n : th.user_rooms_at_most) {
    add("users_rooms_le_" + std::to_string(n), share_of(rpu, [n](auto x) { return x <= n; }));
  }
  for (auto n : th.server_users_at_most) {
    add("servers_users_le_" + std::to_string(n), share_of(ups, [n](auto x) { return x <= n; }));
  }
  for (auto n : th.server_users_above) {
    add("servers_users_gt_" + std::to_string(n), share_of(ups, [n](auto x) { return x > n; }));
  }
  return st;
}

}  // namespace fedload
