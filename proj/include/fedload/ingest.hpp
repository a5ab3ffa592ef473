#pragma once

#include "fedload/csv.hpp"
#include "fedload/errors.hpp"
#include "fedload/structure.hpp"
#include "fedload/synth_gen.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

namespace fedload {

// Persistence of network structures.
//
// canonical-json (version "fedload/1"):
//   {"version": "fedload/1",
//    "servers": ["a", ...],
//    "users":   [{"id": "u1", "server": "a"}, ...],
//    "rooms":   [{"id": "r1", "members": ["u1", ...]}, ...]}
// Every list is sorted by id. Unknown keys are rejected.
//
// membership-csv: header "user_id,server_id,room_id", one row per
// membership. Duplicate rows collapse. An empty room_id declares a user that
// is in no room.

inline constexpr std::string_view kStructureVersion = "fedload/1";
inline constexpr std::string_view kGeneratorVersion = "fedload-gen/1";

enum class Format { canonical_json, membership_csv };

inline Format parse_format(std::string_view s) {
  if (s == "canonical-json" || s == "json") return Format::canonical_json;
  if (s == "membership-csv" || s == "csv") return Format::membership_csv;
  throw Error("unknown-format", "unknown structure format '" + std::string(s) + "'");
}

/// Guesses the format from the file extension (.json / .csv).
inline Format format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".json") return Format::canonical_json;
  if (ext == ".csv") return Format::membership_csv;
  throw Error("unknown-format", "cannot infer format of '" + path.string() + "'; pass it explicitly");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(e.what(), line, column);
  }
}

inline void require_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional = {}) {
  if (!obj.is_object()) throw ParseError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto k : required) known = known || key == k;
    for (auto k : optional) known = known || key == k;
    if (!known) throw ParseError("unknown field '" + key + "' in " + std::string(where));
  }
  for (auto k : required) {
    if (!obj.contains(k)) throw ParseError("missing field '" + std::string(k) + "' in " + std::string(where));
  }
}

inline std::string get_id(const json& v, std::string_view where) {
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
    throw ParseError(std::string(where) + " must be a non-empty string");
  }
  return v.get<std::string>();
}

inline NetworkStructure parse_canonical(std::string_view text) {
  const json doc = parse_json(text);
  require_keys(doc, "document", {"version", "servers", "users", "rooms"});
  if (doc["version"] != kStructureVersion) {
    throw ParseError("unsupported version " + doc["version"].dump() + ", expected \"" +
                     std::string(kStructureVersion) + "\"");
  }
  for (auto key : {"servers", "users", "rooms"}) {
    if (!doc[key].is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  }
  NetworkStructure s;
  for (const auto& v : doc["servers"]) {
    if (!s.servers.insert(EntityId(get_id(v, "server id"))).second) {
      throw ParseError("duplicate server id '" + v.get<std::string>() + "'");
    }
  }
  for (const auto& u : doc["users"]) {
    require_keys(u, "user entry", {"id", "server"});
    EntityId id(get_id(u["id"], "user id"));
    if (!s.users.emplace(id, EntityId(get_id(u["server"], "user server"))).second) {
      throw ParseError("duplicate user id '" + id.str() + "'");
    }
  }
  for (const auto& r : doc["rooms"]) {
    require_keys(r, "room entry", {"id", "members"});
    EntityId id(get_id(r["id"], "room id"));
    if (!r["members"].is_array()) throw ParseError("members of room '" + id.str() + "' must be an array");
    IdSet members;
    for (const auto& m : r["members"]) {
      if (!members.insert(EntityId(get_id(m, "room member"))).second) {
        throw ParseError("room '" + id.str() + "' lists member '" + m.get<std::string>() + "' twice");
      }
    }
    if (!s.rooms.emplace(id, std::move(members)).second) throw ParseError("duplicate room id '" + id.str() + "'");
  }
  return s;
}

inline NetworkStructure parse_membership_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ParseError("empty membership file: missing header", 1);
  const std::vector<std::string> header{"user_id", "server_id", "room_id"};
  if (rows.front().fields != header) {
    throw ParseError("header must be exactly 'user_id,server_id,room_id'", rows.front().line);
  }
  NetworkStructure s;
  ValidationReport conflicts;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 3) {
      throw ParseError("expected 3 fields, found " + std::to_string(row.fields.size()), row.line);
    }
    if (row.fields[0].empty() || row.fields[1].empty()) throw ParseError("empty user or server id", row.line);
    const EntityId user(row.fields[0]);
    const EntityId server(row.fields[1]);
    s.servers.insert(server);
    auto [it, inserted] = s.users.emplace(user, server);
    if (!inserted && it->second != server) {
      conflicts.violations.push_back({Severity::violation, "user-single-home", {user, it->second, server},
                                      "user '" + user.str() + "' is listed with home servers '" +
                                          it->second.str() + "' and '" + server.str() + "' (line " +
                                          std::to_string(row.line) + ")"});
    }
    if (!row.fields[2].empty()) s.join(user, EntityId(row.fields[2]));
  }
  if (!conflicts.ok()) throw InvalidStructureError(std::move(conflicts));
  return s;
}

}  // namespace detail

/// Parses without validating; used by `validate` to report on broken files.
inline NetworkStructure read_structure(std::string_view text, Format format) {
  return format == Format::canonical_json ? detail::parse_canonical(text) : detail::parse_membership_csv(text);
}

/// Reads and validates. Never returns a structure with violations.
inline NetworkStructure load(const std::filesystem::path& path, Format format) {
  NetworkStructure s = read_structure(read_file(path), format);
  if (auto report = validate(s); !report.ok()) throw InvalidStructureError(std::move(report));
  return s;
}

inline NetworkStructure load(const std::filesystem::path& path) { return load(path, format_for_path(path)); }

/// Canonical JSON text: fixed key order, ids sorted, two-space indent.
inline std::string to_canonical_json(const NetworkStructure& s) {
  nlohmann::ordered_json doc;
  doc["version"] = kStructureVersion;
  auto& servers = doc["servers"] = nlohmann::ordered_json::array();
  for (const auto& id : s.servers) servers.push_back(id.str());
  auto& users = doc["users"] = nlohmann::ordered_json::array();
  for (const auto& [id, home] : s.users) users.push_back({{"id", id.str()}, {"server", home.str()}});
  auto& rooms = doc["rooms"] = nlohmann::ordered_json::array();
  for (const auto& [id, members] : s.rooms) {
    nlohmann::ordered_json m = nlohmann::ordered_json::array();
    for (const auto& u : members) m.push_back(u.str());
    rooms.push_back({{"id", id.str()}, {"members", std::move(m)}});
  }
  return doc.dump(2) + "\n";
}

/// Membership CSV. Servers without users and rooms without members cannot
/// be expressed in this format and are dropped.
inline std::string to_membership_csv(const NetworkStructure& s) {
  std::ostringstream os;
  csv::write_row(os, {"user_id", "server_id", "room_id"});
  std::map<EntityId, IdSet> rooms_of;
  for (const auto& [room, members] : s.rooms) {
    for (const auto& u : members) rooms_of[u].insert(room);
  }
  for (const auto& [user, home] : s.users) {
    auto it = rooms_of.find(user);
    if (it == rooms_of.end()) {
      csv::write_row(os, {user.str(), home.str(), ""});
      continue;
    }
    for (const auto& room : it->second) csv::write_row(os, {user.str(), home.str(), room.str()});
  }
  return os.str();
}

inline void save(const NetworkStructure& s, const std::filesystem::path& path,
                 Format format = Format::canonical_json) {
  if (auto report = validate(s); !report.ok()) throw InvalidStructureError(std::move(report));
  write_file(path, format == Format::canonical_json ? to_canonical_json(s) : to_membership_csv(s));
}

// ---------------------------------------------------------------------------
// Generator configs ("fedload-gen/1")

namespace detail {

inline nlohmann::ordered_json spec_to_json(const DistributionSpec& d) {
  nlohmann::ordered_json j;
  j["family"] = to_string(d.family);
  switch (d.family) {
    case Family::zipf:
      j["exponent"] = d.exponent;
      j["max"] = d.max;
      break;
    case Family::lognormal:
      j["mu"] = d.mu;
      j["sigma"] = d.sigma;
      break;
    case Family::empirical:
      j["values"] = d.values;
      break;
  }
  return j;
}

inline DistributionSpec spec_from_json(const json& j, std::string_view where) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    throw ParseError(std::string(where) + " needs a string 'family'");
  }
  const Family f = parse_family(j["family"].get<std::string>());
  auto number = [&](const char* key) {
    if (!j[key].is_number()) throw ParseError(std::string(where) + "." + key + " must be a number");
    return j[key].get<double>();
  };
  switch (f) {
    case Family::zipf: {
      require_keys(j, where, {"family", "exponent"}, {"max"});
      std::uint64_t max = 0;
      if (j.contains("max")) {
        if (!j["max"].is_number_unsigned()) throw ParseError(std::string(where) + ".max must be an unsigned integer");
        max = j["max"].get<std::uint64_t>();
      }
      return DistributionSpec::zipf(number("exponent"), max);
    }
    case Family::lognormal:
      require_keys(j, where, {"family", "mu", "sigma"});
      return DistributionSpec::lognormal(number("mu"), number("sigma"));
    case Family::empirical: {
      require_keys(j, where, {"family", "values"});
      std::vector<std::uint64_t> values;
      if (!j["values"].is_array()) throw ParseError(std::string(where) + ".values must be an array");
      for (const auto& v : j["values"]) {
        if (!v.is_number_unsigned()) throw ParseError(std::string(where) + ".values must be unsigned integers");
        values.push_back(v.get<std::uint64_t>());
      }
      return DistributionSpec::empirical(std::move(values));
    }
  }
  throw ParseError("unreachable");
}

}  // namespace detail

inline std::string to_json(const GeneratorConfig& c) {
  nlohmann::ordered_json doc;
  doc["version"] = kGeneratorVersion;
  doc["servers"] = c.servers;
  doc["users"] = c.users;
  doc["rooms"] = c.rooms;
  doc["seed"] = c.seed;
  doc["fill_policy"] = to_string(c.fill);
  doc["users_per_server"] = detail::spec_to_json(c.users_per_server);
  doc["rooms_per_user"] = detail::spec_to_json(c.rooms_per_user);
  doc["room_size"] = detail::spec_to_json(c.room_size);
  return doc.dump(2) + "\n";
}

inline GeneratorConfig generator_config_from_json(std::string_view text) {
  const auto doc = detail::parse_json(text);
  detail::require_keys(doc, "generator config", {"version", "servers", "users", "rooms"},
                       {"seed", "fill_policy", "users_per_server", "rooms_per_user", "room_size"});
  if (doc["version"] != kGeneratorVersion) {
    throw ParseError("unsupported version " + doc["version"].dump() + ", expected \"" +
                     std::string(kGeneratorVersion) + "\"");
  }
  auto count = [&](const char* key) {
    if (!doc[key].is_number_unsigned()) throw ParseError(std::string(key) + " must be an unsigned integer");
    return doc[key].get<std::uint64_t>();
  };
  GeneratorConfig c;
  c.servers = count("servers");
  c.users = count("users");
  c.rooms = count("rooms");
  if (doc.contains("seed")) c.seed = count("seed");
  if (doc.contains("fill_policy")) {
    if (!doc["fill_policy"].is_string()) throw ParseError("fill_policy must be a string");
    c.fill = parse_fill_policy(doc["fill_policy"].get<std::string>());
  }
  if (doc.contains("users_per_server")) c.users_per_server = detail::spec_from_json(doc["users_per_server"], "users_per_server");
  if (doc.contains("rooms_per_user")) c.rooms_per_user = detail::spec_from_json(doc["rooms_per_user"], "rooms_per_user");
  if (doc.contains("room_size")) c.room_size = detail::spec_from_json(doc["room_size"], "room_size");
  c.validate();
  return c;
}

}  // namespace fedload
