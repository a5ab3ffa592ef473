#pragma once

// The `fedload` command line. Kept in a header so tests can drive run()
// in-process.

#include "fedload/fedload.hpp"

#include "CLI11.hpp"

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fedload::cli {

namespace fs = std::filesystem;

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

/// Collects the artifacts of one run and writes them plus manifest.json.
class ArtifactWriter {
 public:
  ArtifactWriter(fs::path dir, std::string subcommand) : dir_(std::move(dir)), subcommand_(std::move(subcommand)) {}

  void param(const std::string& key, const std::string& value) { params_[key] = value; }

  void input(const fs::path& path) { inputs_[path.string()] = sha256_hex(read_file(path)); }

  void file(const std::string& name, const std::string& content) { files_[name] = content; }

  template <class Fn>
  void csv(const std::string& name, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    files_[name] = os.str();
  }

  void commit() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    for (const auto& [name, content] : files_) write_file(dir_ / name, content);

    nlohmann::ordered_json m;
    m["tool"] = "fedload";
    m["version"] = kVersion;
    m["subcommand"] = subcommand_;
    auto& p = m["parameters"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params_) p[k] = v;
    auto& in = m["inputs"] = nlohmann::ordered_json::array();
    for (const auto& [path, digest] : inputs_) in.push_back({{"path", path}, {"sha256", digest}});
    auto& out = m["outputs"] = nlohmann::ordered_json::array();
    for (const auto& [name, content] : files_) out.push_back(name);
    write_file(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::string subcommand_;
  std::map<std::string, std::string> params_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> files_;
};

struct Options {
  std::string input;
  std::string format;
  std::string out = "fedload-out";
  std::string lambda = "1";
  std::uint64_t seed = 0;
  std::uint64_t events = 100000;
  std::uint32_t replications = 1;
  double tolerance = 0.01;
  std::string mechanism = "full_mesh";
  std::vector<std::string> candidates{"full_mesh", "hub", "spanning_tree:k=2"};
  std::string objective = "min-max-server-load";
  std::vector<std::string> rooms;
  std::string user;
  std::size_t top = 4;
  // generate
  std::string config;
  std::string from;
  std::uint64_t servers = 0, users = 0, room_count = 0;
  std::string fill;
  bool seed_given = false;
};

inline NetworkStructure read_input(const Options& o, ArtifactWriter& w) {
  const fs::path path(o.input);
  const Format f = o.format.empty() ? format_for_path(path) : parse_format(o.format);
  w.input(path);
  w.param("format", f == Format::canonical_json ? "canonical-json" : "membership-csv");
  return load(path, f);
}

inline std::map<EntityId, std::uint64_t> users_per_server_map(const StructureIndex& idx) {
  std::map<EntityId, std::uint64_t> m;
  for (StructureIndex::Index s = 0; s < idx.server_count(); ++s) m.emplace(idx.servers()[s], idx.users_of_server(s).size());
  return m;
}

inline int cmd_validate(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "validate");
  const fs::path path(o.input);
  const Format f = o.format.empty() ? format_for_path(path) : parse_format(o.format);
  w.input(path);
  ValidationReport report;
  try {
    report = validate(read_structure(read_file(path), f));
  } catch (const InvalidStructureError& e) {
    report = e.report();
  }
  w.csv("validation.csv", [&](std::ostream& os) { emit::validation(os, report); });
  w.commit();
  for (const auto& v : report.violations) out << "violation: " << v.invariant << ": " << v.message << "\n";
  for (const auto& v : report.warnings) out << "warning: " << v.invariant << ": " << v.message << "\n";
  if (!report.ok()) throw InvalidStructureError(report);
  out << "ok: " << report.warnings.size() << " warning(s)\n";
  return 0;
}

inline int cmd_stats(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "stats");
  const StructureIndex idx(read_input(o, w));
  const auto st = summary(idx);
  w.csv("server_ranks.csv", [&](std::ostream& os) { emit::rank_table(os, server_rank_table(idx), "server_id", "users", "rooms"); });
  w.csv("room_ranks.csv", [&](std::ostream& os) { emit::rank_table(os, room_rank_table(idx), "room_id", "servers", "users"); });
  w.csv("hist_servers_per_room.csv", [&](std::ostream& os) { emit::histogram(os, log_histogram_positive(servers_per_room(idx))); });
  w.csv("hist_users_per_room.csv", [&](std::ostream& os) { emit::histogram(os, log_histogram_positive(users_per_room(idx))); });
  w.csv("hist_rooms_per_user.csv", [&](std::ostream& os) { emit::histogram(os, log_histogram_positive(rooms_per_user(idx))); });
  w.csv("hist_users_per_server.csv", [&](std::ostream& os) { emit::histogram(os, log_histogram_positive(users_per_server(idx))); });
  w.csv("summary.csv", [&](std::ostream& os) { emit::summary(os, st); });
  w.commit();
  out << "servers=" << st.servers << " users=" << st.users << " rooms=" << st.rooms << "\n";
  return 0;
}

inline int cmd_load(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "load");
  const ModelParams params(parse_rational(o.lambda));
  w.param("lambda", to_string(params.lambda()));
  w.param("top", std::to_string(o.top));
  const StructureIndex idx(read_input(o, w));
  const auto profile = load_profile(idx, params);
  const auto series = cumulative_fractions(profile, idx);
  w.csv("load_profile.csv", [&](std::ostream& os) { emit::load_profile(os, profile); });
  w.csv("traffic_matrix.csv", [&](std::ostream& os) { emit::traffic_matrix(os, traffic_matrix(idx, params)); });
  w.csv("cumulative.csv", [&](std::ostream& os) { emit::cumulative(os, series); });
  w.csv("top_servers.csv", [&](std::ostream& os) { emit::top_servers(os, series, o.top); });
  w.commit();
  out << "total_tx=" << to_string(profile.total_tx) << " total_rx=" << to_string(profile.total_rx) << "\n";
  return 0;
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "simulate");
  const ModelParams params(parse_rational(o.lambda));
  const MechanismSpec mech = parse_mechanism(o.mechanism);
  w.param("lambda", to_string(params.lambda()));
  w.param("mechanism", mech.to_string());
  w.param("events", std::to_string(o.events));
  w.param("replications", std::to_string(o.replications));
  w.param("seed", std::to_string(o.seed));
  w.param("tolerance", emit::num(o.tolerance));
  const StructureIndex idx(read_input(o, w));
  const auto assignment = RoomAssignment::uniform(mech);
  const auto reports = simulate(idx, params, assignment, o.events, o.seed, o.replications);
  w.csv("sim_report.csv", [&](std::ostream& os) { emit::sim_reports(os, reports); });
  w.csv("sim_rooms.csv", [&](std::ostream& os) { emit::sim_rooms(os, reports); });
  w.csv("sim_totals.csv", [&](std::ostream& os) { emit::sim_totals(os, reports); });
  if (mech.is<FullMesh>()) {
    const auto check = cross_check(idx, params, reports, assignment, o.tolerance);
    w.csv("cross_check.csv", [&](std::ostream& os) { emit::cross_check(os, check); });
    out << "cross-check: " << (check.all_within() ? "within" : "outside") << " tolerance " << o.tolerance << "\n";
  }
  w.commit();
  return 0;
}

inline int cmd_generate(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "generate");
  GeneratorConfig config;
  if (!o.config.empty()) {
    w.input(o.config);
    config = generator_config_from_json(read_file(o.config));
  }
  if (!o.from.empty()) {
    const fs::path path(o.from);
    w.input(path);
    const auto fitted = fit(load(path, o.format.empty() ? format_for_path(path) : parse_format(o.format)));
    const auto seed = config.seed;
    config = fitted.config;
    config.seed = seed;
  }
  if (o.servers) config.servers = o.servers;
  if (o.users) config.users = o.users;
  if (o.room_count) config.rooms = o.room_count;
  if (!o.fill.empty()) config.fill = parse_fill_policy(o.fill);
  if (o.seed_given) config.seed = o.seed;
  w.param("seed", std::to_string(config.seed));
  const auto s = generate(config);
  w.file("generator_config.json", to_json(config));
  w.file("structure.json", to_canonical_json(s));
  w.commit();
  out << "generated servers=" << s.servers.size() << " users=" << s.users.size() << " rooms=" << s.rooms.size() << "\n";
  return 0;
}

inline int cmd_fit(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "fit");
  const auto result = fit(StructureIndex(read_input(o, w)));
  w.file("generator_config.json", to_json(result.config));
  w.csv("fit_report.csv", [&](std::ostream& os) { emit::fit_report(os, result); });
  w.commit();
  out << "zipf exponent users_per_server=" << emit::num(result.users_per_server.zipf.spec.exponent) << "\n";
  return 0;
}

inline int cmd_recommend(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "recommend");
  const ModelParams params(parse_rational(o.lambda));
  std::vector<MechanismSpec> candidates;
  std::string joined;
  for (const auto& c : o.candidates) {
    candidates.push_back(parse_mechanism(c));
    joined += (joined.empty() ? "" : ";") + candidates.back().to_string();
  }
  const Objective objective = parse_objective(o.objective);
  w.param("lambda", to_string(params.lambda()));
  w.param("candidates", joined);
  w.param("objective", to_string(objective));
  const StructureIndex idx(read_input(o, w));
  std::vector<EntityId> rooms;
  for (const auto& r : o.rooms) rooms.emplace_back(r);
  const auto a = recommend(idx, params, rooms, candidates, objective);
  w.csv("assignment.csv", [&](std::ostream& os) { emit::assignment(os, a); });
  w.csv("room_costs.csv", [&](std::ostream& os) { emit::room_costs(os, a); });
  w.commit();
  out << "assigned " << a.rooms.size() << " room(s)\n";
  return 0;
}

inline int cmd_decentralize(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "decentralize");
  const ModelParams params(parse_rational(o.lambda));
  w.param("lambda", to_string(params.lambda()));
  const auto before = read_input(o, w);
  const auto after = full_decentralization(before);
  const StructureIndex ib(before), ia(after);
  const auto lb = load_profile(ib, params);
  const auto la = load_profile(ia, params);
  w.file("structure.json", to_canonical_json(after));
  w.csv("load_comparison.csv", [&](std::ostream& os) {
    emit::load_comparison(os, {{"before", &lb}, {"after", &la}}, {users_per_server_map(ib), users_per_server_map(ia)});
  });
  w.commit();
  out << "servers " << before.servers.size() << " -> " << after.servers.size() << "\n";
  return 0;
}

inline int cmd_split_user(const Options& o, std::ostream& out) {
  ArtifactWriter w(o.out, "split-user");
  const ModelParams params(parse_rational(o.lambda));
  w.param("lambda", to_string(params.lambda()));
  w.param("user", o.user);
  const auto before = read_input(o, w);
  const auto after = split_user(before, EntityId(o.user));
  const StructureIndex ib(before), ia(after);
  const auto lb = load_profile(ib, params);
  const auto la = load_profile(ia, params);
  w.file("structure.json", to_canonical_json(after));
  w.csv("load_comparison.csv", [&](std::ostream& os) {
    emit::load_comparison(os, {{"before", &lb}, {"after", &la}}, {users_per_server_map(ib), users_per_server_map(ia)});
  });
  w.commit();
  out << "user " << o.user << " moved to " << dedicated_server_id(EntityId(o.user)) << "\n";
  return 0;
}

inline std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

/// Exit codes: 0 success, 1 data error, 2 usage error. Errors are reported as
/// a single "error: <kind>: <message>" line on `err`.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Load analysis and simulation for federated room-based messaging", "fedload"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input) sub->add_option("input", o.input, "structure file (.json canonical or .csv membership)")->required();
    sub->add_option("--format", o.format, "canonical-json | membership-csv (default: by extension)");
    sub->add_option("-o,--out", o.out, "output directory")->capture_default_str();
  };
  auto with_lambda = [&](CLI::App* sub) {
    sub->add_option("--lambda", o.lambda, "per-user message rate, rational literal such as 3/2")->capture_default_str();
  };
  CLI::Option* gen_seed = nullptr;
  auto with_seed = [&](CLI::App* sub) {
    return sub->add_option("--seed", o.seed, "random seed (fallback: $FEDLOAD_SEED)")
        ->envname("FEDLOAD_SEED")
        ->capture_default_str();
  };

  auto* validate_cmd = app.add_subcommand("validate", "check a structure file against the structural invariants");
  common(validate_cmd, true);
  auto* stats_cmd = app.add_subcommand("stats", "rank tables, histograms and summary shares");
  common(stats_cmd, true);
  auto* load_cmd = app.add_subcommand("load", "analytical per-server load, traffic matrix, cumulative fractions");
  common(load_cmd, true);
  with_lambda(load_cmd);
  load_cmd->add_option("--top", o.top, "servers listed in top_servers.csv")->capture_default_str();
  auto* sim_cmd = app.add_subcommand("simulate", "seeded event simulation (+ cross-check for full_mesh)");
  common(sim_cmd, true);
  with_lambda(sim_cmd);
  with_seed(sim_cmd);
  sim_cmd->add_option("--events", o.events, "events per replication")->capture_default_str();
  sim_cmd->add_option("--replications", o.replications, "independent replications")->capture_default_str();
  sim_cmd->add_option("--mechanism", o.mechanism, "full_mesh | hub[:rule=..] | spanning_tree:k=K | gossip:f=F,cap=C")
      ->capture_default_str();
  sim_cmd->add_option("--tolerance", o.tolerance, "relative tolerance of the cross-check")->capture_default_str();
  auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic structure");
  common(gen_cmd, false);
  gen_seed = with_seed(gen_cmd);
  gen_cmd->add_option("--config", o.config, "generator config (fedload-gen/1 JSON)");
  gen_cmd->add_option("--from", o.from, "fit marginals from this structure file first");
  gen_cmd->add_option("--servers", o.servers, "override server count");
  gen_cmd->add_option("--users", o.users, "override user count");
  gen_cmd->add_option("--rooms", o.room_count, "override room count");
  gen_cmd->add_option("--fill", o.fill, "preferential | proportional | uniform");
  auto* fit_cmd = app.add_subcommand("fit", "fit generator marginals to a structure");
  common(fit_cmd, true);
  auto* rec_cmd = app.add_subcommand("recommend", "choose a mechanism per federated room");
  common(rec_cmd, true);
  with_lambda(rec_cmd);
  rec_cmd->add_option("--candidate", o.candidates, "candidate mechanism (repeatable)")->capture_default_str();
  rec_cmd->add_option("--objective", o.objective, "min-max-server-load | min-total-transactions")->capture_default_str();
  rec_cmd->add_option("--room", o.rooms, "restrict to these rooms (repeatable)");
  auto* dec_cmd = app.add_subcommand("decentralize", "move every user to a dedicated server");
  common(dec_cmd, true);
  with_lambda(dec_cmd);
  auto* split_cmd = app.add_subcommand("split-user", "move one user to a dedicated server");
  common(split_cmd, true);
  with_lambda(split_cmd);
  split_cmd->add_option("--user", o.user, "user id")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (*validate_cmd) return cmd_validate(o, out);
    if (*stats_cmd) return cmd_stats(o, out);
    if (*load_cmd) return cmd_load(o, out);
    if (*sim_cmd) return cmd_simulate(o, out);
    if (*gen_cmd) {
      o.seed_given = gen_seed->count() > 0;
      return cmd_generate(o, out);
    }
    if (*fit_cmd) return cmd_fit(o, out);
    if (*rec_cmd) return cmd_recommend(o, out);
    if (*dec_cmd) return cmd_decentralize(o, out);
    if (*split_cmd) return cmd_split_user(o, out);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid-argument: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  err << "error: usage: no subcommand\n";
  return 2;
}

}  // namespace fedload::cli
