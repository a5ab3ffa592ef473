#pragma once

#include "fedload/entity.hpp"
#include "fedload/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fedload {

using IdSet = std::set<EntityId>;

/// Tripartite user/room/server snapshot of a federation.
///
/// Only the user->home-server map and the room memberships are stored. The
/// server-room relation is always derived from them, so it can never drift
/// out of sync with the memberships. Plain value type: compare with ==,
/// copy freely, treat as immutable once handed to the analysis functions.
struct NetworkStructure {
  IdSet servers;
  std::map<EntityId, EntityId> users;  // user -> home server
  std::map<EntityId, IdSet> rooms;     // room -> member users

  friend bool operator==(const NetworkStructure&, const NetworkStructure&) = default;

  void add_server(const EntityId& server) { servers.insert(server); }

  void add_user(const EntityId& user, const EntityId& server) {
    users.insert_or_assign(user, server);
  }

  void add_room(const EntityId& room, IdSet members = {}) {
    rooms.insert_or_assign(room, std::move(members));
  }

  void join(const EntityId& user, const EntityId& room) {
    auto it = rooms.find(room);
    if (it == rooms.end()) it = rooms.emplace(room, IdSet{}).first;
    it->second.insert(user);
  }

  /// { (home(u), r) : r in rooms, u in members(r) }. Members without a known
  /// home contribute nothing.
  std::set<std::pair<EntityId, EntityId>> server_room_edges() const {
    std::set<std::pair<EntityId, EntityId>> edges;
    for (const auto& [room, members] : rooms) {
      for (const auto& u : members) {
        if (auto h = users.find(u); h != users.end()) edges.emplace(h->second, room);
      }
    }
    return edges;
  }
};

enum class Severity { violation, warning };

struct Finding {
  Severity severity;
  std::string invariant;
  std::vector<EntityId> ids;
  std::string message;
};

/// Result of validate(). Violations make a structure unusable for analysis;
/// warnings (empty rooms, servers without users) are informational.
struct ValidationReport {
  std::vector<Finding> violations;
  std::vector<Finding> warnings;

  bool ok() const noexcept { return violations.empty(); }

  std::string summary(std::size_t max_items = 5) const {
    std::ostringstream os;
    os << violations.size() << " violation(s)";
    for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
      os << (i == 0 ? ": " : "; ") << violations[i].message;
    }
    return os.str();
  }
};

class InvalidStructureError : public Error {
 public:
  explicit InvalidStructureError(ValidationReport report)
      : Error("validation", "invalid structure, " + report.summary()), report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

inline ValidationReport validate(const NetworkStructure& s) {
  ValidationReport report;
  for (const auto& [user, home] : s.users) {
    if (!s.servers.contains(home)) {
      report.violations.push_back({Severity::violation, "user-home-declared", {user, home},
                                   "user '" + user.str() + "' is homed on undeclared server '" +
                                       home.str() + "'"});
    }
  }
  for (const auto& [room, members] : s.rooms) {
    std::vector<EntityId> unknown;
    for (const auto& u : members) {
      if (!s.users.contains(u)) unknown.push_back(u);
    }
    if (!unknown.empty()) {
      std::vector<EntityId> ids{room};
      ids.insert(ids.end(), unknown.begin(), unknown.end());
      report.violations.push_back({Severity::violation, "room-member-declared", std::move(ids),
                                   "room '" + room.str() + "' has " +
                                       std::to_string(unknown.size()) + " undeclared member(s), first '" +
                                       unknown.front().str() + "'"});
      continue;
    }
    if (members.empty()) {
      report.warnings.push_back({Severity::warning, "empty-room", {room},
                                 "room '" + room.str() + "' has no members"});
      continue;
    }
    IdSet room_servers;
    for (const auto& u : members) room_servers.insert(s.users.at(u));
    if (room_servers.size() > members.size()) {
      report.violations.push_back({Severity::violation, "room-servers-le-users", {room},
                                   "room '" + room.str() + "' has more servers than users"});
    }
  }
  std::set<EntityId> populated;
  for (const auto& [user, home] : s.users) populated.insert(home);
  for (const auto& server : s.servers) {
    if (!populated.contains(server)) {
      report.warnings.push_back({Severity::warning, "empty-server", {server},
                                 "server '" + server.str() + "' has no users"});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Membership queries on the plain structure.

inline IdSet rooms_of_user(const NetworkStructure& s, const EntityId& user) {
  if (!s.users.contains(user)) throw UnknownEntityError("unknown user '" + user.str() + "'");
  IdSet out;
  for (const auto& [room, members] : s.rooms) {
    if (members.contains(user)) out.insert(room);
  }
  return out;
}

inline IdSet rooms_of_server(const NetworkStructure& s, const EntityId& server) {
  if (!s.servers.contains(server)) throw UnknownEntityError("unknown server '" + server.str() + "'");
  IdSet out;
  for (const auto& [room, members] : s.rooms) {
    for (const auto& u : members) {
      auto h = s.users.find(u);
      if (h != s.users.end() && h->second == server) {
        out.insert(room);
        break;
      }
    }
  }
  return out;
}

/// Rooms of a user, or of a server (rooms of any of its users).
inline IdSet rooms_of(const NetworkStructure& s, const EntityId& entity) {
  const bool is_user = s.users.contains(entity);
  const bool is_server = s.servers.contains(entity);
  if (is_user && is_server) {
    throw InvalidArgumentError("ambiguous id '" + entity.str() + "' names both a user and a server");
  }
  if (is_user) return rooms_of_user(s, entity);
  if (is_server) return rooms_of_server(s, entity);
  throw UnknownEntityError("'" + entity.str() + "' is neither a user nor a server");
}

/// Members of a room, or users homed on a server.
inline IdSet users_of(const NetworkStructure& s, const EntityId& entity) {
  const auto room = s.rooms.find(entity);
  const bool is_server = s.servers.contains(entity);
  if (room != s.rooms.end() && is_server) {
    throw InvalidArgumentError("ambiguous id '" + entity.str() + "' names both a room and a server");
  }
  if (room != s.rooms.end()) return room->second;
  if (is_server) {
    IdSet out;
    for (const auto& [user, home] : s.users) {
      if (home == entity) out.insert(user);
    }
    return out;
  }
  throw UnknownEntityError("'" + entity.str() + "' is neither a room nor a server");
}

inline IdSet servers_of_room(const NetworkStructure& s, const EntityId& room) {
  const auto it = s.rooms.find(room);
  if (it == s.rooms.end()) throw UnknownEntityError("unknown room '" + room.str() + "'");
  IdSet out;
  for (const auto& u : it->second) {
    if (auto h = s.users.find(u); h != s.users.end()) out.insert(h->second);
  }
  return out;
}

/// Q_s: rooms of `server` in which at least one other server participates.
inline IdSet federated_rooms(const NetworkStructure& s, const EntityId& server) {
  IdSet out;
  for (const auto& room : rooms_of_server(s, server)) {
    if (servers_of_room(s, room).size() > 1) out.insert(room);
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Integer-indexed, read-only view of a valid structure. Every index range is
/// in lexicographic id order, so iteration order is deterministic. All the
/// numeric modules work on this view.
class StructureIndex {
 public:
  using Index = std::uint32_t;

  explicit StructureIndex(const NetworkStructure& s) {
    if (auto report = validate(s); !report.ok()) throw InvalidStructureError(std::move(report));

    servers_.assign(s.servers.begin(), s.servers.end());
    users_.reserve(s.users.size());
    rooms_.reserve(s.rooms.size());
    for (const auto& [u, h] : s.users) users_.push_back(u);
    for (const auto& [r, m] : s.rooms) rooms_.push_back(r);

    home_.resize(users_.size());
    server_users_.resize(servers_.size());
    for (Index u = 0; u < users_.size(); ++u) {
      home_[u] = *find_in(servers_, s.users.at(users_[u]));
      server_users_[home_[u]].push_back(u);
    }

    user_rooms_.resize(users_.size());
    members_.resize(rooms_.size());
    room_servers_.resize(rooms_.size());
    server_rooms_.resize(servers_.size());
    Index r = 0;
    for (const auto& [room, members] : s.rooms) {
      auto& m = members_[r];
      m.reserve(members.size());
      for (const auto& id : members) {
        const Index u = *find_in(users_, id);
        m.push_back(u);
        user_rooms_[u].push_back(r);
        room_servers_[r].push_back(home_[u]);
      }
      auto& rs = room_servers_[r];
      std::sort(rs.begin(), rs.end());
      rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
      for (Index srv : rs) server_rooms_[srv].push_back(r);
      ++r;
    }
  }

  std::span<const EntityId> servers() const noexcept { return servers_; }
  std::span<const EntityId> users() const noexcept { return users_; }
  std::span<const EntityId> rooms() const noexcept { return rooms_; }

  std::size_t server_count() const noexcept { return servers_.size(); }
  std::size_t user_count() const noexcept { return users_.size(); }
  std::size_t room_count() const noexcept { return rooms_.size(); }

  Index home(Index user) const { return home_[user]; }
  std::span<const Index> rooms_of_user(Index user) const { return user_rooms_[user]; }
  std::span<const Index> members(Index room) const { return members_[room]; }
  std::span<const Index> servers_of_room(Index room) const { return room_servers_[room]; }
  std::span<const Index> users_of_server(Index server) const { return server_users_[server]; }
  std::span<const Index> rooms_of_server(Index server) const { return server_rooms_[server]; }

  bool is_federated(Index room) const { return room_servers_[room].size() > 1; }

  std::optional<Index> find_server(const EntityId& id) const { return find_in(servers_, id); }
  std::optional<Index> find_user(const EntityId& id) const { return find_in(users_, id); }
  std::optional<Index> find_room(const EntityId& id) const { return find_in(rooms_, id); }

  Index server_index(const EntityId& id) const {
    if (auto i = find_server(id)) return *i;
    throw UnknownEntityError("unknown server '" + id.str() + "'");
  }
  Index user_index(const EntityId& id) const {
    if (auto i = find_user(id)) return *i;
    throw UnknownEntityError("unknown user '" + id.str() + "'");
  }
  Index room_index(const EntityId& id) const {
    if (auto i = find_room(id)) return *i;
    throw UnknownEntityError("unknown room '" + id.str() + "'");
  }

 private:
  static std::optional<Index> find_in(const std::vector<EntityId>& sorted, const EntityId& id) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
    if (it == sorted.end() || *it != id) return std::nullopt;
    return static_cast<Index>(it - sorted.begin());
  }

  std::vector<EntityId> servers_;
  std::vector<EntityId> users_;
  std::vector<EntityId> rooms_;
  std::vector<Index> home_;
  std::vector<std::vector<Index>> server_users_;
  std::vector<std::vector<Index>> user_rooms_;
  std::vector<std::vector<Index>> members_;
  std::vector<std::vector<Index>> room_servers_;
  std::vector<std::vector<Index>> server_rooms_;
};

}  // namespace fedload
