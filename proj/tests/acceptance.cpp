// Acceptance runner: one PASS/FAIL line per headline property.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "httplib.h"
#include "support.hpp"
#include "vsim/escape_room.hpp"
#include "vsim/evaluation.hpp"
#include "vsim/household.hpp"
#include "vsim/server.hpp"
#include "vsim/solver.hpp"

using namespace vsim;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

GeneratedRoom gen(int level, std::uint64_t seed) {
  LevelConfig c;
  c.level = level;
  c.seed = seed;
  return generate(c);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BenchmarkSuite levels_suite(int seeds) {
  BenchmarkSuite s;
  for (int level = 1; level <= 4; ++level) {
    TaskDef d;
    d.name = "L" + std::to_string(level);
    d.generator = d.name;
    for (int i = 0; i < seeds; ++i) d.seeds.push_back(static_cast<std::uint64_t>(i));
    s.tasks.push_back(d);
  }
  return s;
}

void solvability_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  int ok = 0;
  for (int level = 1; level <= 4; ++level) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      GeneratedRoom r = gen(level, seed);
      SolveResult s = solve(r.graph, r.goal);
      if (verify(r).ok && s.status == SolveStatus::solved &&
          static_cast<int>(s.plan.size()) == r.certificate.optimal_length) {
        ++ok;
      }
    }
  }
  const double secs = seconds_since(t0);
  report(ok == 400 && secs < 300, "solvability_sweep", fmt("%d/400 rooms verified and solved in %.1fs", ok, secs));
}

void determinism() {
  int rooms_same = 0;
  for (int level = 1; level <= 4; ++level) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      rooms_same += to_json(gen(level, seed)).dump() == to_json(gen(level, seed)).dump();
    }
  }
  int traces_same = 0, traces = 0;
  for (int level = 1; level <= 4; ++level) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      GeneratedRoom r = gen(level, seed);
      for (int kind = 0; kind < 2; ++kind) {
        std::string dumps[2];
        for (auto& d : dumps) {
          auto p = kind == 0 ? oracle_policy(seed) : random_policy(seed);
          EpisodeConfig cfg;
          cfg.budget = 4 * r.certificate.optimal_length;
          cfg.seed = seed;
          d = to_json(run_episode(r.graph, r.goal, {{"agent_1", p.get()}}, cfg).trace).dump();
        }
        ++traces;
        traces_same += dumps[0] == dumps[1];
      }
    }
  }
  report(rooms_same == 400 && traces_same == traces, "determinism",
         fmt("rooms %d/400 identical, traces %d/%d identical", rooms_same, traces_same, traces));
}

void baseline_separation(const BenchmarkReport& rep) {
  bool ok = true;
  std::string detail;
  for (const auto& task : rep.tasks) {
    const CellResult* o = rep.cell(task, "oracle");
    const CellResult* r = rep.cell(task, "random");
    const bool oracle_ok = o->success.mean == 1.0 && o->success.std == 0.0;
    const bool random_ok = task == "L1" || r->success.mean < 0.10;
    ok = ok && oracle_ok && random_ok;
    detail += fmt("%s oracle %s random %s; ", task.c_str(), format_stat(o->success).c_str(),
                  format_stat(r->success, 3).c_str());
  }
  report(ok, "oracle_vs_random", detail + fmt("n=%d", rep.cells.front().success.n));
}

void plan_length_ordering() {
  double med[5] = {};
  for (int level = 1; level <= 3; ++level) {
    std::vector<int> lens;
    for (std::uint64_t seed = 0; seed < 100; ++seed) lens.push_back(gen(level, seed).certificate.optimal_length);
    std::sort(lens.begin(), lens.end());
    med[level] = (lens[49] + lens[50]) / 2.0;
  }
  report(med[1] < med[2] && med[2] <= med[3], "plan_length_ordering",
         fmt("median optimal length L1 %.1f, L2 %.1f, L3 %.1f", med[1], med[2], med[3]));
}

void deceptive_clues() {
  int blocked = 0, solved = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GeneratedRoom r = gen(4, seed);
    std::set<std::string> deceptive;
    for (const auto& [id, o] : r.graph.objects) {
      if (o.clue && o.clue->veracity == Veracity::deceptive) deceptive.insert(id);
    }
    SolveOptions opt;
    opt.readable_clues = deceptive;
    blocked += !deceptive.empty() && solve(r.graph, r.goal, opt).status == SolveStatus::unsolvable;
    solved += solve(r.graph, r.goal).status == SolveStatus::solved;
  }
  report(blocked == 100 && solved == 100, "deceptive_clues",
         fmt("deceptive-only unsolvable %d/100, full knowledge solved %d/100", blocked, solved));
}

void visibility(const std::vector<const BenchmarkReport*>& reports) {
  long violations = 0, observations = 0;
  for (const auto* rep : reports) {
    for (const auto& c : rep->cells) {
      violations += c.visibility_violations;
      observations += c.observations;
    }
  }
  report(violations == 0 && observations > 0, "visibility",
         fmt("%ld violations in %ld observations", violations, observations));
}

void edit_protocol() {
  SplitMix64 rng(0xED17);
  int closed = 0, honest = 0, caught = 0;
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    SceneGraph base = fixtures::mutation_base(i);
    fixtures::Mutation m = fixtures::random_mutation(base, rng, 1 + static_cast<int>(rng.below(6)));
    EditResult replay = apply_edits(base, diff(base, m.after));
    closed += graph_equal(replay.graph, m.after);

    EditResult applied = apply_edits(base, m.edits);
    const std::string viewpoint =
        applied.graph.agents.empty() ? applied.graph.rooms.begin()->first : applied.graph.agents.begin()->first;
    honest += interpretation_check(applied.graph, m.edits, viewpoint, applied.verdicts).passed;

    // The last edit is never superseded, so a fault in it must surface.
    SceneGraph broken = fixtures::tamper(applied.graph, m.edits.back());
    caught += !interpretation_check(broken, m.edits, viewpoint, applied.verdicts).mismatches.empty();
  }
  report(closed == n && honest == n && caught == n, "edit_protocol",
         fmt("closure %d/%d, honest passed %d/%d, tampers flagged %d/%d", closed, n, honest, n, caught, n));
}

void classifier(const BenchmarkReport& rep) {
  int families_ok = 0;
  auto families = fixtures::classifier_fixtures();
  for (const auto& [category, fixtures_] : families) {
    bool all = true;
    for (const auto& f : fixtures_) all = all && classify_failure(f.trace, f.final_graph).category == category;
    families_ok += all;
  }
  int cells_ok = 0;
  for (const auto& c : rep.cells) {
    int labelled = 0;
    for (const auto& [cat, k] : c.failures) {
      if (parse_failure_category(cat)) labelled += k;
    }
    cells_ok += labelled == c.success.n - c.successes;
  }
  report(families_ok == 6 && families.size() == 6 && cells_ok == static_cast<int>(rep.cells.size()), "failure_classifier",
         fmt("fixture families %d/%zu, cells with one label per failure %d/%zu", families_ok, families.size(),
             cells_ok, rep.cells.size()));
}

void statistics(const BenchmarkReport& rep) {
  double worst = 0;
  bool rendered = true;
  const std::string table = render_table(rep);
  for (const auto& c : rep.cells) {
    const double n = c.success.n;
    const double p = c.successes / n;
    const double sd = n > 1 ? std::sqrt(n / (n - 1) * p * (1 - p)) : 0.0;
    worst = std::max({worst, std::abs(c.success.mean - p), std::abs(c.success.std - sd)});
    rendered = rendered && table.find(format_stat(c.success)) != std::string::npos;
  }
  const std::string header = table.substr(0, table.find('\n'));
  const bool columns = header.find("oracle") != std::string::npos && header.find("random") != std::string::npos;
  report(worst <= 1e-12 && rendered && columns && table.find(" ± ") != std::string::npos, "success_statistics",
         fmt("max deviation from closed form %.2e, table cells rendered: %s", worst, rendered ? "yes" : "no"));
}

void multi_agent() {
  int better = 0;
  const int n = 50;
  for (std::uint64_t seed = 0; seed < static_cast<std::uint64_t>(n); ++seed) {
    Scenario one = two_part_task(seed, 1);
    Scenario two = two_part_task(seed, 2);
    EpisodeConfig cfg;
    cfg.budget = 4 * one.optimal_length;
    cfg.seed = seed;
    auto o = oracle_policy(seed);
    EpisodeResult r1 = run_episode(one.graph, one.goal, {{"agent_1", o.get()}}, cfg);
    auto a1 = oracle_policy(mix_seed(seed, 0));
    auto a2 = oracle_policy(mix_seed(seed, 1));
    cfg.allocation = allocate_subgoals(two.goal, {"agent_1", "agent_2"}, two.graph);
    EpisodeResult r2 = run_episode(two.graph, two.goal, {{"agent_1", a1.get()}, {"agent_2", a2.get()}}, cfg);
    better += r2.trace.terminal == Terminal::success &&
              (r1.trace.terminal != Terminal::success || r2.trace.ticks <= r1.trace.ticks);
  }
  report(better * 10 >= n * 9, "multi_agent_allocation", fmt("two agents no slower on %d/%d seeds", better, n));
}

void server_equivalence() {
  ServiceOptions opt;
  opt.id_seed = 1;
  Service wire(opt), local(opt);
  int same = 0, total = 0;
  {
    fixtures::LiveServer live(wire);
    std::string sid;
    for (const auto& call : fixtures::endpoint_script()) {
      const std::string path = fixtures::with_sid(call.path, sid);
      auto [status, body] = fixtures::wire_call(live.port(), call, path);
      Response mine = local.handle(call.method, path, call.body);
      ++total;
      same += status == mine.status && body == mine.body.dump();
      if (sid.empty() && mine.status == 201) sid = mine.body.at("session_id");
    }
  }
  ServiceOptions slow = opt;
  slow.write_delay_ms = 400;
  Service contested(slow);
  int conflicts = 0, oks = 0;
  {
    fixtures::LiveServer live(contested);
    const std::string sid = contested.handle("POST", "/sessions", R"({"level": 2, "seed": 3})").body.at("session_id");
    const fixtures::ServerCall write{"POST", "/sessions/" + sid + "/actions",
                                     R"({"agent": "agent_1", "action": {"type": "wait"}})"};
    int codes[2] = {0, 0};
    std::thread a([&] { codes[0] = fixtures::wire_call(live.port(), write, write.path).first; });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::thread b([&] { codes[1] = fixtures::wire_call(live.port(), write, write.path).first; });
    a.join();
    b.join();
    for (int c : codes) {
      conflicts += c == 409;
      oks += c == 200;
    }
  }
  report(same == total && conflicts == 1 && oks == 1, "wire_equivalence",
         fmt("%d/%d responses byte-identical, concurrent writers: %d conflict, %d ok", same, total, conflicts, oks));
}

}  // namespace

int main() {
  solvability_sweep();
  determinism();
  const BenchmarkReport levels = run_benchmark(levels_suite(200), {{"oracle", {}}, {"random", {}}}, 1);
  baseline_separation(levels);
  plan_length_ordering();
  deceptive_clues();
  const BenchmarkReport household = run_benchmark(default_suite(20), {{"oracle", {}}, {"random", {}}}, 1);
  visibility({&levels, &household});
  edit_protocol();
  classifier(household);
  statistics(levels);
  multi_agent();
  server_equivalence();
  std::printf("%d failing\n", failures);
  return failures == 0 ? 0 : 1;
}
