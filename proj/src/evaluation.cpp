#include "vsim/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "vsim/error.hpp"
#include "vsim/escape_room.hpp"
#include "vsim/household.hpp"
#include "vsim/rng.hpp"

namespace vsim {

namespace {

constexpr std::string_view kCategoryNames[] = {"exploration_loop",    "phantom_goal",     "coordination_failure",
                                               "state_assumption",    "impossible_sequence", "object_confusion",
                                               "unclassified"};

bool rejected_with(const Step& s, std::initializer_list<PreconditionCode> codes) {
  if (s.outcome.ok || !s.outcome.reason) return false;
  for (auto c : codes) {
    if (s.outcome.reason->code == c) return true;
  }
  return false;
}

int count_rejections(const EpisodeTrace& t, std::initializer_list<PreconditionCode> codes) {
  int n = 0;
  for (const auto& s : t.steps) n += rejected_with(s, codes);
  return n;
}

bool manipulates(const Action& a) { return !std::holds_alternative<act::GoTo>(a) && !std::holds_alternative<act::Wait>(a); }

// Steps grouped per agent keep their tick order under any within-tick shuffle.
std::map<std::string, std::vector<const Step*>> by_agent(const EpisodeTrace& t) {
  std::map<std::string, std::vector<const Step*>> out;
  for (const auto& s : t.steps) out[s.agent].push_back(&s);
  for (auto& [agent, steps] : out) {
    std::stable_sort(steps.begin(), steps.end(), [](const Step* a, const Step* b) { return a->tick < b->tick; });
  }
  return out;
}

std::optional<std::string> exploration_loop(const EpisodeTrace& t) {
  for (const auto& [agent, steps] : by_agent(t)) {
    std::map<std::string, int> streak;
    std::map<std::string, bool> fresh;  // something new since the last entry
    std::string here;
    for (const Step* s : steps) {
      if (!s->first_seen.empty()) {
        for (auto& [room, f] : fresh) f = true;
      }
      if (s->room == here) continue;
      here = s->room;
      auto it = streak.find(here);
      if (it == streak.end() || fresh[here]) streak[here] = 1;
      else ++it->second;
      fresh[here] = false;
      if (streak[here] >= 4) {
        return agent + " entered " + here + " " + std::to_string(streak[here]) + " times with nothing new in view";
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> phantom_goal(const EpisodeTrace& t) {
  for (const auto& s : t.steps) {
    if (rejected_with(s, {PreconditionCode::unknown_object})) return describe(s.action) + " names an object that does not exist";
  }
  return std::nullopt;
}

std::optional<std::string> coordination_failure(const EpisodeTrace& t) {
  if (t.agents.size() < 2) return std::nullopt;
  std::map<int, std::map<std::string, std::set<std::string>>> aimed;  // tick -> object -> agents
  for (const auto& s : t.steps) {
    if (manipulates(s.action)) aimed[s.tick][primary_target(s.action)].insert(s.agent);
  }
  int clashes = 0;
  std::string example;
  for (const auto& [tick, objects] : aimed) {
    for (const auto& [object, agents] : objects) {
      if (agents.size() < 2) continue;
      ++clashes;
      if (example.empty()) example = object;
      break;
    }
  }
  if (clashes >= 2) return std::to_string(clashes) + " ticks with agents contending for one object, e.g. " + example;

  std::map<int, std::string> assigned = t.goal.assignments;
  for (const auto& [i, agent] : t.allocation) assigned.emplace(i, agent);
  if (assigned.empty()) return std::nullopt;
  const int half = t.budget / 2;
  if (t.ticks <= half) return std::nullopt;
  for (const auto& [i, agent] : assigned) {
    if (i < 0 || i >= static_cast<int>(t.goal.conjuncts.size())) continue;
    const std::string& focus = t.goal.conjuncts[i].object;
    const auto& h = t.history[i];
    if (h.tick && *h.tick <= half + 1) return std::nullopt;
    for (const auto& s : t.steps) {
      if (s.tick > half + 1 || !s.outcome.ok) continue;
      auto ids = action_ids(s.action);
      if (std::find(ids.begin(), ids.end(), focus) != ids.end()) return std::nullopt;
    }
  }
  return "no assigned conjunct was touched in the first half of the budget";
}

std::optional<std::string> state_assumption(const EpisodeTrace& t) {
  int n = count_rejections(t, {PreconditionCode::closed_container, PreconditionCode::locked,
                               PreconditionCode::wrong_key, PreconditionCode::wrong_code});
  if (n >= 2) return std::to_string(n) + " actions assumed an open, unlocked or matching state";
  return std::nullopt;
}

std::optional<std::string> impossible_sequence(const EpisodeTrace& t) {
  for (const auto& s : t.steps) {
    if (rejected_with(s, {PreconditionCode::not_held, PreconditionCode::hands_full, PreconditionCode::invalid_target,
                          PreconditionCode::not_affordant})) {
      return describe(s.action) + " cannot be done (" + std::string(to_string(s.outcome.reason->code)) + ")";
    }
  }
  return std::nullopt;
}

std::optional<std::string> object_confusion(const EpisodeTrace& t, const SceneGraph& g) {
  std::set<std::string> goal_objects;
  for (const auto& p : t.goal.conjuncts) {
    goal_objects.insert(p.object);
    if (!p.target.empty()) goal_objects.insert(p.target);
  }
  std::map<std::string, std::string> category_of;  // category -> a goal object
  for (const auto& p : t.goal.conjuncts) {
    auto it = g.objects.find(p.object);
    if (it != g.objects.end() && !it->second.category.empty()) category_of.emplace(it->second.category, p.object);
  }
  for (const auto& s : t.steps) {
    if (!s.outcome.ok || !manipulates(s.action)) continue;
    const std::string id = primary_target(s.action);
    if (goal_objects.count(id)) continue;
    auto obj = g.objects.find(id);
    if (obj == g.objects.end()) continue;
    auto hit = category_of.find(obj->second.category);
    if (hit != category_of.end()) return s.agent + " handled " + id + " instead of " + hit->second;
  }
  return std::nullopt;
}

struct TaskInstance {
  SceneGraph graph;
  GoalSpec goal;
  int optimal = 0;
};

bool is_level(const std::string& g) { return g.size() == 2 && g[0] == 'L' && g[1] >= '1' && g[1] <= '4'; }

TaskInstance make_task(const TaskDef& task, std::uint64_t seed) {
  if (is_level(task.generator)) {
    LevelConfig c;
    c.level = task.generator[1] - '0';
    c.seed = seed;
    GeneratedRoom r = generate(c);
    return {std::move(r.graph), std::move(r.goal), r.certificate.optimal_length};
  }
  Scenario sc = household_scenario(task.generator, seed, task.agents);
  return {std::move(sc.graph), std::move(sc.goal), sc.optimal_length};
}

struct EpisodeSummary {
  bool success = false;
  int ticks = 0;
  double fraction = 0.0;
  std::string failure;
  bool policy_error = false;
  int visibility_violations = 0;
  int observations = 0;
};

EpisodeSummary run_one(const TaskDef& task, const PolicyChoice& choice, std::uint64_t seed) {
  TaskInstance inst = make_task(task, seed);
  std::map<std::string, std::unique_ptr<Policy>> owned;
  std::map<std::string, Policy*> policies;
  std::vector<std::string> agents;
  std::uint64_t k = 0;
  for (const auto& [aid, a] : inst.graph.agents) {
    (void)a;
    agents.push_back(aid);
    owned[aid] = make_policy(choice, mix_seed(seed, ++k));
    policies[aid] = owned[aid].get();
  }
  EpisodeConfig ec;
  ec.budget = task.budget > 0 ? task.budget : task.budget_factor * std::max(1, inst.optimal);
  ec.seed = seed;
  ec.task_id = task.name;
  if (agents.size() > 1) ec.allocation = allocate_subgoals(inst.goal, agents, inst.graph);
  EpisodeResult r = run_episode(inst.graph, inst.goal, policies, ec);
  EpisodeSummary out;
  out.success = r.trace.terminal == Terminal::success;
  out.ticks = r.trace.ticks;
  out.fraction = r.trace.goal_report.satisfied_fraction;
  out.policy_error = r.trace.terminal == Terminal::policy_error;
  out.visibility_violations = r.trace.visibility_violations;
  out.observations = r.trace.observations;
  if (!out.success) out.failure = std::string(to_string(classify_failure(r.trace, r.final_graph).category));
  return out;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
  return out;
}

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}, {"n", s.n}, {"cell", format_stat(s)}}; }

}  // namespace

std::string_view to_string(FailureCategory c) { return kCategoryNames[static_cast<int>(c)]; }

std::optional<FailureCategory> parse_failure_category(std::string_view s) {
  for (int i = 0; i < 7; ++i) {
    if (kCategoryNames[i] == s) return static_cast<FailureCategory>(i);
  }
  return std::nullopt;
}

std::vector<FailureCategory> all_failure_categories() {
  std::vector<FailureCategory> out;
  for (int i = 0; i < 7; ++i) out.push_back(static_cast<FailureCategory>(i));
  return out;
}

Classification classify_failure(const EpisodeTrace& trace, const SceneGraph& final_graph) {
  if (trace.terminal == Terminal::success) throw Error(ErrorCode::TraceIncomplete, "trace ended in success");
  if (trace.history.size() != trace.goal.conjuncts.size()) {
    throw Error(ErrorCode::TraceIncomplete, "history has " + std::to_string(trace.history.size()) + " entries for " +
                                                std::to_string(trace.goal.conjuncts.size()) + " conjuncts");
  }
  const std::set<std::string> agents(trace.agents.begin(), trace.agents.end());
  for (const auto& s : trace.steps) {
    if (!agents.count(s.agent)) throw Error(ErrorCode::TraceIncomplete, "step by unlisted agent " + s.agent);
  }
  using F = FailureCategory;
  if (auto e = exploration_loop(trace)) return {F::exploration_loop, *e};
  if (auto e = phantom_goal(trace)) return {F::phantom_goal, *e};
  if (auto e = coordination_failure(trace)) return {F::coordination_failure, *e};
  if (auto e = state_assumption(trace)) return {F::state_assumption, *e};
  if (auto e = impossible_sequence(trace)) return {F::impossible_sequence, *e};
  if (auto e = object_confusion(trace, final_graph)) return {F::object_confusion, *e};
  return {F::unclassified, trace.policy_error.empty() ? "no rule matched" : trace.policy_error};
}

Stat aggregate(const std::vector<double>& xs) {
  Stat s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  return s;
}

std::string format_stat(const Stat& s, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, s.mean, decimals, s.std);
  return buf;
}

BenchmarkSuite default_suite(int seeds) {
  if (seeds < 1) throw Error(ErrorCode::InvalidConfig, "seeds must be >= 1");
  BenchmarkSuite suite;
  auto add = [&](std::string name, std::string generator, int agents) {
    TaskDef t;
    t.name = std::move(name);
    t.generator = std::move(generator);
    t.agents = agents;
    t.seeds = seed_range(0, seeds);
    suite.tasks.push_back(std::move(t));
  };
  for (const char* level : {"L1", "L2", "L3", "L4"}) add(level, level, 1);
  add("clean_floor_S", "clean_floor", 1);
  add("watch_tv_S", "watch_tv", 1);
  add("find_object_S", "find_object", 1);
  add("prepare_food_M", "prepare_food", 2);
  add("clean_room_M", "clean_room", 2);
  return suite;
}

BenchmarkSuite suite_from_json(const json& doc) {
  detail::check_keys(doc, "", {"tasks"}, {"schema_version"});
  if (doc.contains("schema_version") && doc.at("schema_version") != "1") {
    throw schema_error("/schema_version", "unsupported version");
  }
  const json& arr = detail::get_array(doc, "tasks", "");
  const auto scenarios = household_scenarios();
  BenchmarkSuite suite;
  std::set<std::string> names;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "/tasks/" + std::to_string(i);
    const json& t = arr[i];
    detail::check_keys(t, path, {"name", "generator"},
                       {"agents", "budget_factor", "budget", "seeds", "seed_count", "first_seed"});
    TaskDef def;
    def.name = detail::get_string(t, "name", path);
    def.generator = detail::get_string(t, "generator", path);
    if (t.contains("agents")) def.agents = detail::get_int(t, "agents", path);
    if (t.contains("budget_factor")) def.budget_factor = detail::get_int(t, "budget_factor", path);
    if (t.contains("budget")) def.budget = detail::get_int(t, "budget", path);
    if (t.contains("seeds") == t.contains("seed_count")) {
      throw schema_error(path, "exactly one of seeds / seed_count is required");
    }
    if (t.contains("seeds")) {
      const json& seeds = detail::get_array(t, "seeds", path);
      for (std::size_t j = 0; j < seeds.size(); ++j) {
        if (!seeds[j].is_number_unsigned()) throw schema_error(path + "/seeds/" + std::to_string(j), "expected unsigned integer");
        def.seeds.push_back(seeds[j].get<std::uint64_t>());
      }
    } else {
      std::uint64_t first = 0;
      if (t.contains("first_seed")) {
        if (!t.at("first_seed").is_number_unsigned()) throw schema_error(path + "/first_seed", "expected unsigned integer");
        first = t.at("first_seed").get<std::uint64_t>();
      }
      def.seeds = seed_range(first, detail::get_int(t, "seed_count", path));
    }
    if (def.seeds.empty()) throw Error(ErrorCode::InvalidConfig, "task " + def.name + " has no seeds", path);
    if (!names.insert(def.name).second) throw Error(ErrorCode::InvalidConfig, "duplicate task name " + def.name, path);
    const bool known = is_level(def.generator) ||
                       std::find(scenarios.begin(), scenarios.end(), def.generator) != scenarios.end();
    if (!known) throw Error(ErrorCode::InvalidConfig, "unknown generator " + def.generator, path);
    if (def.agents != 1 && def.agents != 2) throw Error(ErrorCode::InvalidConfig, "agents must be 1 or 2", path);
    if (is_level(def.generator) && def.agents != 1) {
      throw Error(ErrorCode::InvalidConfig, "escape levels are single-agent", path);
    }
    if (def.budget_factor < 1 || def.budget < 0) throw Error(ErrorCode::InvalidConfig, "budget must be positive", path);
    suite.tasks.push_back(std::move(def));
  }
  return suite;
}

json to_json(const BenchmarkSuite& suite) {
  json tasks = json::array();
  for (const auto& t : suite.tasks) {
    json doc = {{"name", t.name}, {"generator", t.generator}, {"agents", t.agents}, {"seeds", t.seeds}};
    if (t.budget > 0) doc["budget"] = t.budget;
    else doc["budget_factor"] = t.budget_factor;
    tasks.push_back(std::move(doc));
  }
  return {{"schema_version", "1"}, {"tasks", tasks}};
}

PolicyChoice parse_policy_choice(const std::string& text) {
  if (text == "oracle" || text == "random") return {text, std::nullopt};
  if (text.rfind("llm:", 0) == 0) {
    const std::string path = text.substr(4);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open llm config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json doc;
    try {
      doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      throw schema_error("", path + " is not JSON: " + e.what());
    }
    return {"llm", llm_config_from_json(doc)};
  }
  throw Error(ErrorCode::InvalidConfig, "unknown policy '" + text + "'");
}

std::unique_ptr<Policy> make_policy(const PolicyChoice& choice, std::uint64_t seed) {
  if (choice.llm) return llm_policy(*choice.llm);
  if (choice.name == "oracle") return oracle_policy(seed);
  if (choice.name == "random") return random_policy(seed);
  throw Error(ErrorCode::InvalidConfig, "unknown policy '" + choice.name + "'");
}

const CellResult* BenchmarkReport::cell(const std::string& task, const std::string& policy) const {
  for (const auto& c : cells) {
    if (c.task == task && c.policy == policy) return &c;
  }
  return nullptr;
}

BenchmarkReport run_benchmark(const BenchmarkSuite& suite, const std::vector<PolicyChoice>& policies, int jobs) {
  BenchmarkReport report;
  if (policies.empty()) return report;
  for (const auto& t : suite.tasks) report.tasks.push_back(t.name);
  for (const auto& p : policies) report.policies.push_back(p.name);

  struct Job {
    std::size_t task, policy, seed;
  };
  std::vector<Job> work;
  for (std::size_t t = 0; t < suite.tasks.size(); ++t) {
    for (std::size_t p = 0; p < policies.size(); ++p) {
      for (std::size_t s = 0; s < suite.tasks[t].seeds.size(); ++s) work.push_back({t, p, s});
    }
  }
  // One slot per episode; workers fill slots, the reduction reads them in order.
  std::vector<EpisodeSummary> slots(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      const Job& j = work[i];
      try {
        slots[i] = run_one(suite.tasks[j.task], policies[j.policy], suite.tasks[j.task].seeds[j.seed]);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PolicyError && e.code() != ErrorCode::EndpointError) {
          errors[i] = std::current_exception();
          continue;
        }
        slots[i].policy_error = true;
        slots[i].failure = std::string(to_string(FailureCategory::unclassified));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));
  std::vector<std::thread> threads;
  for (int i = 1; i < n; ++i) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t i = 0;
  for (const auto& task : suite.tasks) {
    for (const auto& policy : policies) {
      CellResult cell;
      cell.task = task.name;
      cell.policy = policy.name;
      std::vector<double> success, steps, fraction;
      for (std::size_t s = 0; s < task.seeds.size(); ++s, ++i) {
        const EpisodeSummary& e = slots[i];
        success.push_back(e.success ? 1.0 : 0.0);
        cell.successes += e.success;
        steps.push_back(e.ticks);
        fraction.push_back(e.fraction);
        cell.policy_errors += e.policy_error;
        cell.visibility_violations += e.visibility_violations;
        cell.observations += e.observations;
        if (!e.failure.empty()) ++cell.failures[e.failure];
      }
      cell.success = aggregate(success);
      cell.steps = aggregate(steps);
      cell.goal_fraction = aggregate(fraction);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string render_table(const BenchmarkReport& report) {
  std::size_t first = 4;
  for (const auto& t : report.tasks) first = std::max(first, t.size());
  const std::size_t width = 13;
  auto pad = [](std::string s, std::size_t w) {
    // "±" is two bytes but one column.
    std::size_t cols = 0;
    for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
    if (cols < w) s.append(w - cols, ' ');
    return s;
  };
  std::string out = pad("task", first);
  for (const auto& p : report.policies) out += " | " + pad(p, width);
  out += "\n" + std::string(first, '-');
  for (std::size_t i = 0; i < report.policies.size(); ++i) out += "-+-" + std::string(width, '-');
  out += "\n";
  for (const auto& t : report.tasks) {
    out += pad(t, first);
    for (const auto& p : report.policies) {
      const CellResult* c = report.cell(t, p);
      out += " | " + pad(c ? format_stat(c->success) : "-", width);
    }
    out += "\n";
  }
  return out;
}

json to_json(const BenchmarkReport& report) {
  json rows = json::array();
  for (const auto& c : report.cells) {
    rows.push_back({{"task", c.task},
                    {"policy", c.policy},
                    {"n", c.success.n},
                    {"successes", c.successes},
                    {"mean", c.success.mean},
                    {"std", c.success.std},
                    {"mean_steps", c.steps.mean},
                    {"goal_fraction", stat_json(c.goal_fraction)},
                    {"failures", c.failures},
                    {"policy_errors", c.policy_errors},
                    {"visibility_violations", c.visibility_violations},
                    {"observations", c.observations}});
  }
  json table_rows = json::array();
  for (const auto& t : report.tasks) {
    json row = {{"task", t}};
    for (const auto& p : report.policies) {
      const CellResult* c = report.cell(t, p);
      row[p] = c ? format_stat(c->success) : "-";
    }
    table_rows.push_back(std::move(row));
  }
  return {{"schema_version", "1"},
          {"tasks", report.tasks},
          {"policies", report.policies},
          {"rows", rows},
          {"table", {{"columns", report.policies}, {"rows", table_rows}}}};
}

}  // namespace vsim
