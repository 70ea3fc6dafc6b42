// vsim command-line entry point.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "httplib.h"
#include "vsim/edits.hpp"
#include "vsim/error.hpp"
#include "vsim/escape_room.hpp"
#include "vsim/evaluation.hpp"
#include "vsim/harness.hpp"
#include "vsim/household.hpp"
#include "vsim/rng.hpp"
#include "vsim/server.hpp"
#include "vsim/solver.hpp"

using namespace vsim;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path + " is not JSON: " + e.what());
  }
}

void write_out(const json& doc, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

// A room file is a generated room or {"graph": ..., "goal": ...}.
std::pair<SceneGraph, GoalSpec> read_room(const std::string& path) {
  json doc = read_json(path);
  if (doc.contains("certificate")) {
    GeneratedRoom r = generated_room_from_json(doc);
    return {std::move(r.graph), std::move(r.goal)};
  }
  if (!doc.contains("graph")) throw schema_error("/graph", "missing required key");
  SceneGraph g = scene_graph_from_json(doc.at("graph"));
  GoalSpec goal = doc.contains("goal") ? goal_from_json(doc.at("goal"), "/goal") : GoalSpec{};
  return {std::move(g), std::move(goal)};
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Line-mode client: each stdin line is an edit, an edit array or an edit
// list document; each response is printed on one line.
int edit_session(const std::string& url, const std::string& sid, const std::string& viewpoint) {
  if (url.rfind("http://", 0) != 0) throw Error(ErrorCode::InvalidConfig, "only http:// URLs are supported");
  httplib::Client cli(url);
  int failures = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      std::cout << json{{"error", "SchemaError"}, {"message", e.what()}}.dump() << std::endl;
      ++failures;
      continue;
    }
    if (doc.is_array()) doc = {{"edits", doc}};
    else if (doc.is_object() && !doc.contains("edits")) doc = {{"edits", json::array({doc})}};
    if (!viewpoint.empty() && doc.is_object() && !doc.contains("viewpoint")) doc["viewpoint"] = viewpoint;
    auto res = cli.Post("/sessions/" + sid + "/edits", doc.dump(), "application/json");
    if (!res) {
      std::cout << json{{"error", "EndpointError"}, {"message", httplib::to_string(res.error())}}.dump() << std::endl;
      return 1;
    }
    std::cout << res->body << std::endl;
    failures += res->status != 200;
  }
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic household and escape-room simulator"};
  app.require_subcommand(1);

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/JSON service");
  std::string server_config_path;
  std::string host;
  int port = -1;
  int ttl = 0;
  int write_delay_ms = 0;
  std::string static_dir;
  std::string snapshot_dir;
  serve_cmd->add_option("--config", server_config_path, "JSON server config");
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--ttl", ttl, "Idle session lifetime in seconds");
  serve_cmd->add_option("--static", static_dir, "Serve this directory at /");
  serve_cmd->add_option("--snapshot-dir", snapshot_dir, "Write sessions here on shutdown");
  serve_cmd->add_option("--write-delay-ms", write_delay_ms, "Testing: hold each write this long");

  auto* gen_cmd = app.add_subcommand("generate", "Generate an escape room");
  LevelConfig cfg;
  std::string out_path;
  gen_cmd->add_option("--level", cfg.level)->required();
  gen_cmd->add_option("--seed", cfg.seed);
  gen_cmd->add_option("--rooms", cfg.room_count);
  gen_cmd->add_option("--decoys", cfg.decoy_objects);
  gen_cmd->add_option("--code-length", cfg.code_length);
  gen_cmd->add_option("-o,--out", out_path);

  auto* solve_cmd = app.add_subcommand("solve", "Search for a shortest plan");
  std::string room_path;
  std::size_t budget = 200000;
  solve_cmd->add_option("room", room_path)->required();
  solve_cmd->add_option("--budget", budget);

  auto* run_cmd = app.add_subcommand("run", "Run one episode and print its trace");
  std::string task = "L1";
  std::uint64_t seed = 0;
  std::string policy = "oracle";
  int agents = 1;
  int factor = 4;
  run_cmd->add_option("--task", task, "L1..L4 or a household scenario");
  run_cmd->add_option("--seed", seed);
  run_cmd->add_option("--policy", policy, "oracle | random | llm:cfg.json");
  run_cmd->add_option("--agents", agents, "1 or 2 (household scenarios)");
  run_cmd->add_option("--budget-factor", factor);
  run_cmd->add_option("-o,--out", out_path);

  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark and print the results table");
  std::string suite_path;
  std::string policies_csv = "oracle,random";
  int seeds = 0;
  int jobs = 1;
  std::string report_path;
  bench_cmd->add_option("--suite", suite_path, "JSON suite (default: built-in suite)");
  bench_cmd->add_option("--policies", policies_csv, "oracle,random[,llm:cfg.json]");
  bench_cmd->add_option("--seeds", seeds, "Seeds per task, overriding the suite");
  bench_cmd->add_option("--jobs", jobs, "Episodes run in parallel");
  bench_cmd->add_option("--out", report_path, "Write the JSON report here");

  auto* edit_cmd = app.add_subcommand("edit", "Apply edits to a room file, or to a live session line by line");
  std::string edits_path;
  std::string viewpoint;
  std::string session;
  std::string url = "http://127.0.0.1:8080";
  edit_cmd->add_option("room", room_path, "Offline: room file");
  edit_cmd->add_option("edits", edits_path, "Offline: edit list file");
  edit_cmd->add_option("--session", session, "Live: session id; edits are read from stdin, one JSON per line");
  edit_cmd->add_option("--url", url, "Live: server base URL");
  edit_cmd->add_option("--viewpoint", viewpoint);
  edit_cmd->add_option("-o,--out", out_path);

  auto* recheck_cmd = app.add_subcommand("recheck", "Apply optional edits, then re-run the solver");
  recheck_cmd->add_option("room", room_path)->required();
  recheck_cmd->add_option("--edits", edits_path);
  recheck_cmd->add_option("--budget", budget);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) {
      ServerConfig sc = server_config_path.empty() ? ServerConfig{} : server_config_from_json(read_json(server_config_path));
      if (!host.empty()) sc.host = host;
      if (port >= 0) sc.port = port;
      if (ttl > 0) sc.service.ttl_seconds = ttl;
      if (!static_dir.empty()) sc.static_dir = static_dir;
      if (!snapshot_dir.empty()) sc.snapshot_dir = snapshot_dir;
      sc.service.write_delay_ms = write_delay_ms;
      Service service(sc.service);
      std::cerr << "listening on " << sc.host << ":" << sc.port << "\n";
      return serve(service, sc);
    }
    if (*gen_cmd) {
      write_out(to_json(generate(cfg)), out_path);
      return 0;
    }
    if (*solve_cmd) {
      auto [g, goal] = read_room(room_path);
      SolveOptions opt;
      opt.budget = budget;
      SolveResult r = solve(g, goal, opt);
      write_out(to_json(r), "");
      return r.status == SolveStatus::solved ? 0 : 3;
    }
    if (*run_cmd) {
      SceneGraph g;
      GoalSpec goal;
      int optimal = 1;
      if (task.size() == 2 && task[0] == 'L') {
        LevelConfig c;
        c.level = task[1] - '0';
        c.seed = seed;
        GeneratedRoom r = generate(c);
        g = r.graph;
        goal = r.goal;
        optimal = r.certificate.optimal_length;
      } else {
        Scenario s = household_scenario(task, seed, agents);
        g = s.graph;
        goal = s.goal;
        optimal = s.optimal_length;
      }
      PolicyChoice choice = parse_policy_choice(policy);
      std::map<std::string, std::unique_ptr<Policy>> owned;
      std::map<std::string, Policy*> policies;
      std::vector<std::string> ids;
      std::uint64_t k = 0;
      for (const auto& [aid, a] : g.agents) {
        (void)a;
        ids.push_back(aid);
        owned[aid] = make_policy(choice, mix_seed(seed, ++k));
        policies[aid] = owned[aid].get();
      }
      EpisodeConfig ec;
      ec.budget = factor * std::max(1, optimal);
      ec.seed = seed;
      ec.task_id = task;
      if (ids.size() > 1) ec.allocation = allocate_subgoals(goal, ids, g);
      EpisodeResult r = run_episode(g, goal, policies, ec);
      json doc = to_json(r.trace, true);
      if (r.trace.terminal != Terminal::success) {
        Classification c = classify_failure(r.trace, r.final_graph);
        doc["failure"] = {{"category", to_string(c.category)}, {"evidence", c.evidence}};
      }
      write_out(doc, out_path);
      return 0;
    }
    if (*bench_cmd) {
      BenchmarkSuite suite = suite_path.empty() ? default_suite(seeds > 0 ? seeds : 20) : suite_from_json(read_json(suite_path));
      if (seeds > 0) {
        for (auto& t : suite.tasks) {
          std::uint64_t first = t.seeds.empty() ? 0 : t.seeds.front();
          t.seeds.clear();
          for (int i = 0; i < seeds; ++i) t.seeds.push_back(first + static_cast<std::uint64_t>(i));
        }
      }
      std::vector<PolicyChoice> choices;
      for (const auto& p : split_csv(policies_csv)) choices.push_back(parse_policy_choice(p));
      BenchmarkReport report = run_benchmark(suite, choices, jobs);
      std::cout << render_table(report);
      if (!report_path.empty()) write_out(to_json(report), report_path);
      return 0;
    }
    if (*edit_cmd && !session.empty()) return edit_session(url, session, viewpoint);
    if (*edit_cmd) {
      if (room_path.empty() || edits_path.empty()) throw Error(ErrorCode::InvalidConfig, "edit needs ROOM EDITS or --session");
      auto [g, goal] = read_room(room_path);
      json edits_doc = read_json(edits_path);
      EditList list = edit_list_from_json(edits_doc);
      if (viewpoint.empty() && edits_doc.is_object() && edits_doc.contains("viewpoint")) {
        viewpoint = edits_doc.at("viewpoint").get<std::string>();
      }
      EditResult r = apply_edits(g, list);
      json verdicts = json::array();
      for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
      if (viewpoint.empty()) viewpoint = g.agents.empty() ? (g.rooms.empty() ? "" : g.rooms.begin()->first) : g.agents.begin()->first;
      json doc = {{"graph", to_json(r.graph)}, {"goal", to_json(goal)}, {"verdicts", verdicts}};
      doc["check"] = to_json(interpretation_check(r.graph, list, viewpoint, r.verdicts));
      write_out(doc, out_path);
      return 0;
    }
    if (*recheck_cmd) {
      auto [g, goal] = read_room(room_path);
      json doc = json::object();
      if (!edits_path.empty()) {
        EditResult r = apply_edits(g, edit_list_from_json(read_json(edits_path)));
        g = std::move(r.graph);
        json verdicts = json::array();
        for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
        doc["verdicts"] = verdicts;
      }
      SolveOptions opt;
      opt.budget = budget;
      SolveResult r = solve(g, goal, opt);
      doc["solvable"] = to_json(r);
      write_out(doc, "");
      return r.status == SolveStatus::solved ? 0 : 3;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
