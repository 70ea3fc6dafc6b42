// Python module vsim._core. Documents cross the boundary as JSON text; the
// Python package decodes them.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vsim/edits.hpp"
#include "vsim/error.hpp"
#include "vsim/escape_room.hpp"
#include "vsim/evaluation.hpp"
#include "vsim/harness.hpp"
#include "vsim/household.hpp"
#include "vsim/server.hpp"
#include "vsim/solver.hpp"

namespace py = pybind11;
using namespace vsim;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("not JSON: ") + e.what());
  }
}

std::string generate_room(const std::string& config) { return to_json(generate(level_config_from_json(parse(config)))).dump(); }

std::string solve_room(const std::string& graph, const std::string& goal, std::size_t budget) {
  SolveOptions opt;
  opt.budget = budget;
  return to_json(solve(scene_graph_from_json(parse(graph)), goal_from_json(parse(goal)), opt)).dump();
}

std::string observe_agent(const std::string& graph, const std::string& agent) {
  return to_json(observe(scene_graph_from_json(parse(graph)), agent)).dump();
}

std::string edit_room(const std::string& graph, const std::string& edits, const std::string& viewpoint) {
  EditList list = edit_list_from_json(parse(edits));
  EditResult r = apply_edits(scene_graph_from_json(parse(graph)), list);
  json verdicts = json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
  json out = {{"graph", to_json(r.graph)}, {"verdicts", verdicts}};
  if (!viewpoint.empty()) out["check"] = to_json(interpretation_check(r.graph, list, viewpoint, r.verdicts));
  return out.dump();
}

std::string run(const std::string& task, std::uint64_t seed, const std::string& policy, int budget_factor) {
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
    Scenario s = household_scenario(task, seed);
    g = s.graph;
    goal = s.goal;
    optimal = s.optimal_length;
  }
  auto p = make_policy(parse_policy_choice(policy), seed);
  EpisodeConfig ec;
  ec.budget = budget_factor * std::max(1, optimal);
  ec.seed = seed;
  ec.task_id = task;
  return to_json(run_episode(g, goal, {{g.agents.begin()->first, p.get()}}, ec).trace).dump();
}

std::string bench(const std::string& suite, const std::vector<std::string>& policies, int jobs) {
  std::vector<PolicyChoice> choices;
  for (const auto& p : policies) choices.push_back(parse_policy_choice(p));
  json doc = to_json(run_benchmark(suite_from_json(parse(suite)), choices, jobs));
  return doc.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Symbolic household and escape-room simulator";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::tuple args = py::make_tuple(std::string(to_string(e.code())), e.message(), e.path());
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  m.def("generate", &generate_room, py::arg("config"));
  m.def("solve", &solve_room, py::arg("graph"), py::arg("goal"), py::arg("budget") = 200000);
  m.def("observe", &observe_agent, py::arg("graph"), py::arg("agent"));
  m.def("edit", &edit_room, py::arg("graph"), py::arg("edits"), py::arg("viewpoint") = "");
  m.def("run_episode", &run, py::arg("task"), py::arg("seed"), py::arg("policy") = "oracle",
        py::arg("budget_factor") = 4);
  m.def("bench", &bench, py::arg("suite"), py::arg("policies"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("household_scenarios", &household_scenarios);

  py::class_<Service>(m, "Service")
      .def(py::init([](std::uint64_t id_seed) {
             ServiceOptions o;
             o.id_seed = id_seed;
             return std::make_unique<Service>(o);
           }),
           py::arg("id_seed") = 1)
      .def(
          "handle",
          [](Service& s, const std::string& method, const std::string& path, const std::string& body) {
            Response r = s.handle(method, path, body);
            return py::make_tuple(r.status, r.body.dump());
          },
          py::arg("method"), py::arg("path"), py::arg("body") = "");
}
