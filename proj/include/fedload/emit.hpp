#pragma once

// CSV emitters for every result type. Header names are part of the file
// interface (see README); rows are always in a deterministic order.

#include "fedload/advisor.hpp"
#include "fedload/analytics.hpp"
#include "fedload/csv.hpp"
#include "fedload/event_sim.hpp"
#include "fedload/load_model.hpp"
#include "fedload/synth_gen.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace fedload::emit {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string dec(const Rational& r) { return to_decimal(r, 12); }

inline void rank_table(std::ostream& os, const RankTable& t, const std::string& id_col, const std::string& primary,
                       const std::string& secondary) {
  csv::write_row(os, {"rank", id_col, primary, secondary});
  for (const auto& r : t) {
    csv::write_row(os, {std::to_string(r.rank), r.id.str(), std::to_string(r.primary), std::to_string(r.secondary)});
  }
}

inline void histogram(std::ostream& os, const LogHistogram& h) {
  csv::write_row(os, {"bin", "lower", "upper", "count"});
  for (const auto& b : h.bins) {
    csv::write_row(os, {std::to_string(b.k), num(b.lower), num(b.upper), std::to_string(b.count)});
  }
}

inline void summary(std::ostream& os, const SummaryStats& s) {
  csv::write_row(os, {"statistic", "count", "share"});
  csv::write_row(os, {"servers", std::to_string(s.servers), ""});
  csv::write_row(os, {"users", std::to_string(s.users), ""});
  csv::write_row(os, {"rooms", std::to_string(s.rooms), ""});
  csv::write_row(os, {"largest_server_users", std::to_string(s.largest_server_users), ""});
  csv::write_row(os, {"largest_room_servers", std::to_string(s.largest_room_servers), ""});
  csv::write_row(os, {"largest_room_users", std::to_string(s.largest_room_users), ""});
  csv::write_row(os, {"most_rooms_per_user", std::to_string(s.most_rooms_per_user), ""});
  for (const auto& sh : s.shares) csv::write_row(os, {sh.name, std::to_string(sh.threshold_count), dec(sh.share)});
}

inline void load_profile(std::ostream& os, const LoadProfile& p) {
  csv::write_row(os, {"server_id", "tx", "rx", "sum", "tx_approx", "rx_approx", "sum_approx"});
  for (const auto& l : p.servers) {
    const Rational sum = l.sum();
    csv::write_row(os, {l.server.str(), to_string(l.tx), to_string(l.rx), to_string(sum), dec(l.tx), dec(l.rx),
                        dec(sum)});
  }
}

inline void traffic_matrix(std::ostream& os, const TrafficMatrix& m) {
  csv::write_row(os, {"from_server", "to_server", "rate", "rate_approx"});
  for (const auto& e : m.rates) {
    csv::write_row(os, {m.servers[e.from].str(), m.servers[e.to].str(), to_string(e.rate), dec(e.rate)});
  }
}

inline void cumulative(std::ostream& os, const CumulativeSeries& c) {
  csv::write_row(os, {"rank", "server_id", "users", "tx", "rx", "users_cum", "tx_cum", "rx_cum", "sum_cum"});
  for (const auto& r : c.rows) {
    csv::write_row(os, {std::to_string(r.rank), r.server.str(), std::to_string(r.users), to_string(r.tx),
                        to_string(r.rx), dec(r.users_cum), dec(r.tx_cum), dec(r.rx_cum), dec(r.sum_cum)});
  }
}

/// Non-cumulative shares of the `count` highest-ranked servers, largest first.
inline void top_servers(std::ostream& os, const CumulativeSeries& c, std::size_t count = 4) {
  csv::write_row(os, {"position", "server_id", "users", "tx_share", "rx_share", "sum_share"});
  for (std::size_t i = 0; i < count && i < c.rows.size(); ++i) {
    const auto& r = c.rows[c.rows.size() - 1 - i];
    csv::write_row(os, {std::to_string(i + 1), r.server.str(), std::to_string(r.users), dec(r.tx_share),
                        dec(r.rx_share), dec(r.sum_share)});
  }
}

inline void validation(std::ostream& os, const ValidationReport& report) {
  csv::write_row(os, {"severity", "invariant", "ids", "message"});
  auto rows = [&](const std::vector<Finding>& findings) {
    for (const auto& f : findings) {
      std::string ids;
      for (const auto& id : f.ids) ids += (ids.empty() ? "" : " ") + id.str();
      csv::write_row(os, {f.severity == Severity::violation ? "violation" : "warning", f.invariant, ids, f.message});
    }
  };
  rows(report.violations);
  rows(report.warnings);
}

inline void sim_reports(std::ostream& os, const std::vector<SimReport>& reports) {
  csv::write_row(os, {"replication", "seed", "events", "server_id", "tx", "rx"});
  for (const auto& rep : reports) {
    for (std::size_t s = 0; s < rep.servers.size(); ++s) {
      csv::write_row(os, {std::to_string(rep.replication), std::to_string(rep.seed), std::to_string(rep.events),
                          rep.servers[s].str(), std::to_string(rep.counts[s].tx), std::to_string(rep.counts[s].rx)});
    }
  }
}

inline void sim_rooms(std::ostream& os, const std::vector<SimReport>& reports) {
  csv::write_row(os, {"replication", "room_id", "events"});
  for (const auto& rep : reports) {
    for (std::size_t r = 0; r < rep.rooms.size(); ++r) {
      csv::write_row(os, {std::to_string(rep.replication), rep.rooms[r].str(), std::to_string(rep.room_events[r])});
    }
  }
}

inline void sim_totals(std::ostream& os, const std::vector<SimReport>& reports) {
  csv::write_row(os, {"replication", "events", "federated_events", "incomplete_deliveries", "total_tx", "total_rx"});
  for (const auto& rep : reports) {
    csv::write_row(os, {std::to_string(rep.replication), std::to_string(rep.events),
                        std::to_string(rep.federated_events), std::to_string(rep.incomplete_deliveries),
                        std::to_string(rep.total_tx()), std::to_string(rep.total_rx())});
  }
}

inline void cross_check(std::ostream& os, const CrossCheck& c) {
  csv::write_row(os, {"server_id", "expected_tx", "expected_rx", "empirical_tx", "empirical_rx", "rel_error_tx",
                      "rel_error_rx", "flagged"});
  for (const auto& r : c.rows) {
    csv::write_row(os, {r.server.str(), dec(r.expected_tx), dec(r.expected_rx), num(r.empirical_tx),
                        num(r.empirical_rx), num(r.rel_error_tx), num(r.rel_error_rx), r.flagged ? "1" : "0"});
  }
}

inline void assignment(std::ostream& os, const MechanismAssignment& a) {
  csv::write_row(os, {"room_id", "mechanism", "objective", "objective_value"});
  for (const auto& rec : a.details) {
    csv::write_row(os, {rec.room.str(), rec.best().mechanism.to_string(), to_string(a.objective),
                        dec(rec.best().objective)});
  }
}

inline void room_costs(std::ostream& os, const MechanismAssignment& a) {
  csv::write_row(os, {"room_id", "mechanism", "servers", "event_rate", "total_tx", "peak_event_load",
                      "max_server_tx", "mean_hops", "estimated", "total_tx_ci95", "chosen"});
  for (const auto& rec : a.details) {
    for (std::size_t i = 0; i < rec.scores.size(); ++i) {
      const auto& c = rec.scores[i].cost;
      Rational max_tx = 0;
      for (const auto& t : c.tx) max_tx = t > max_tx ? t : max_tx;
      csv::write_row(os, {rec.room.str(), c.mechanism.to_string(), std::to_string(c.servers.size()),
                          dec(c.event_rate), dec(c.total_tx), dec(c.peak_event_load), dec(max_tx), num(c.mean_hops),
                          c.estimated ? "1" : "0", num(c.total_tx_ci95), i == rec.chosen ? "1" : "0"});
    }
  }
}

inline void fit_report(std::ostream& os, const FitResult& f) {
  csv::write_row(os, {"marginal", "family", "param1", "param2", "log_likelihood", "ks", "degenerate"});
  auto rows = [&](const std::string& name, const MarginalFit& m) {
    const auto& z = m.zipf;
    const auto& l = m.lognormal;
    csv::write_row(os, {name, "zipf", num(z.spec.exponent), std::to_string(z.spec.max), num(z.log_likelihood),
                        num(z.ks), z.degenerate ? "1" : "0"});
    csv::write_row(os, {name, "lognormal", num(l.spec.mu), num(l.spec.sigma), num(l.log_likelihood), num(l.ks),
                        l.degenerate ? "1" : "0"});
  };
  rows("users_per_server", f.users_per_server);
  rows("rooms_per_user", f.rooms_per_user);
  rows("room_size", f.room_size);
}

/// Loads of two scenarios (e.g. before/after a split) side by side.
inline void load_comparison(std::ostream& os, const std::vector<std::pair<std::string, const LoadProfile*>>& scenarios,
                            const std::vector<std::map<EntityId, std::uint64_t>>& users) {
  csv::write_row(os, {"scenario", "server_id", "users", "tx", "rx", "sum"});
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    for (const auto& l : scenarios[i].second->servers) {
      auto it = users[i].find(l.server);
      csv::write_row(os, {scenarios[i].first, l.server.str(), std::to_string(it == users[i].end() ? 0 : it->second),
                          to_string(l.tx), to_string(l.rx), to_string(l.sum())});
    }
  }
}

}  // namespace fedload::emit
