#pragma once

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "lazydash/generators.hpp"
#include "lazydash/report.hpp"
#include "lazydash/validate.hpp"

namespace lazydash {

// Benchmark harness: a suite file lists (scenario, mode, seed) runs, either
// referencing scenario files or inline generator specs. Results aggregate
// into one CSV row per run, mirroring the representation-size and timing
// quantities tracked by the planner.

inline int log_level() {
  const char* env = std::getenv("LAZYDASH_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "error") return 0;
  return 1;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[lazydash] " << msg << "\n";
}
inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[lazydash][debug] " << msg << "\n";
}

struct BenchRun {
  std::string label;
  Scenario scenario;
  std::string mode;
  std::uint64_t seed = 0;
};

inline std::vector<BenchRun> parse_suite(const Json& suite) {
  std::vector<BenchRun> runs;
  if (!suite.contains("runs") || !suite.at("runs").is_array()) {
    throw InputError("suite file needs a 'runs' array");
  }
  for (const auto& r : suite.at("runs")) {
    BenchRun run;
    run.mode = r.value("mode", std::string("lazy"));
    if (run.mode != "lazy" && run.mode != "eager") {
      throw InputError("run mode must be lazy or eager");
    }
    run.seed = r.value("seed", 0ull);
    if (r.contains("scenario")) {
      const std::string path = r.at("scenario").get<std::string>();
      run.scenario = load_scenario(path);
      const auto slash = path.find_last_of('/');
      run.label = slash == std::string::npos ? path : path.substr(slash + 1);
    } else {
      GeneratorParams gp;
      gp.robots = r.value("robots", 2);
      gp.objects = r.value("objects", 2);
      gp.walls = r.value("walls", 1);
      const std::string family = r.at("family").get<std::string>();
      const std::uint64_t gseed = r.value("scenario_seed", run.seed);
      run.scenario = generate_scenario(family, gp, gseed);
      std::ostringstream label;
      label << family << "-r" << (family == "wall" ? gp.walls + 1 : gp.robots) << "-o"
            << gp.objects;
      if (family == "wall") label << "-w" << gp.walls;
      label << "-s" << gseed;
      run.label = label.str();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

inline std::string csv_header() {
  return "scenario,mode,seed,outcome,build_s,query_s,resolve_s,total_s,"
         "task_vertices,task_hyperarcs,motion_vertices,motion_hyperarcs,"
         "validated_edges,makespan";
}

inline std::string csv_row(const BenchRun& run, const RunReport& r) {
  std::ostringstream os;
  os << run.label << ',' << r.mode << ',' << r.seed << ',' << to_string(r.outcome) << ','
     << r.timers.build_s << ','
     << (r.timers.task_query_s + r.timers.task_conflict_s + r.timers.motion_s) << ','
     << r.timers.resolve_s << ',' << r.timers.total_s << ',' << r.task_vertices << ','
     << r.task_hyperarcs << ',' << r.motion_vertices << ',' << r.motion_hyperarcs << ','
     << r.validated_edges << ',' << r.makespan;
  return os.str();
}

inline RunReport execute_run(const BenchRun& run, const PlannerParams& params = {}) {
  Planner planner(run.scenario.world, params, run.seed);
  return planner.plan(run.mode);
}

}  // namespace lazydash
