// Command-line front end: generate scenarios, plan them in lazy or eager
// mode, validate reports with the independent replay checker, run benchmark
// suites, and export SVG frame sequences.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "lazydash/bench.hpp"
#include "lazydash/svg.hpp"

namespace {

using namespace lazydash;

int cmd_generate(const std::string& family, int robots, int objects, int walls,
                 std::uint64_t seed, const std::string& out) {
  GeneratorParams p;
  p.robots = robots;
  p.objects = objects;
  p.walls = walls;
  const Scenario s = generate_scenario(family, p, seed);
  save_json(scenario_to_json(s), out);
  log_info("wrote " + out);
  return 0;
}

int cmd_plan(const std::string& scenario_path, const std::string& mode,
             std::uint64_t seed, const std::string& out, const std::string& trace_out,
             const std::string& svg_dir, double svg_dt) {
  const Scenario s = load_scenario(scenario_path);
  Planner planner(s.world, {}, seed);
  const RunReport report = planner.plan(mode);
  const Json rj = report_to_json(report, s);
  if (!out.empty()) save_json(rj, out);
  if (!trace_out.empty()) {
    Json tj;
    tj["mode"] = report.mode;
    tj["seed"] = report.seed;
    tj["outcome"] = to_string(report.outcome);
    tj["iteration_counts"] = rj.at("iteration_counts");
    tj["events"] = rj.at("trace");
    save_json(tj, trace_out);
  }
  if (!svg_dir.empty() && report.outcome == Outcome::Solved) {
    const double dt = svg_dt > 0.0 ? svg_dt : 0.25;
    const int frames = export_svg(scenario_to_json(s), rj, dt, svg_dir);
    log_info("wrote " + std::to_string(frames) + " frames to " + svg_dir);
  }
  log_info("outcome: " + std::string(to_string(report.outcome)) +
           (report.failure_note.empty() ? "" : " (" + report.failure_note + ")"));
  return report.outcome == Outcome::Solved ? 0 : 1;
}

int cmd_validate(const std::string& scenario_path, const std::string& report_path) {
  std::ifstream rin(report_path);
  if (!rin) throw InputError("cannot open report: " + report_path);
  Json report;
  rin >> report;
  const Scenario s = load_scenario(scenario_path);
  if (report.value("outcome", std::string()) != "Solved") {
    std::cerr << "report outcome is not Solved; nothing to validate\n";
    return 1;
  }
  const auto violations = validate_schedule(scenario_to_json(s), report);
  if (violations.empty()) {
    std::cout << "PASS\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << "VIOLATION: " << v << "\n";
  return 1;
}

int cmd_bench(const std::string& suite_path, const std::string& out) {
  std::ifstream in(suite_path);
  if (!in) throw InputError("cannot open suite: " + suite_path);
  Json suite;
  in >> suite;
  const auto runs = parse_suite(suite);
  std::ofstream csv(out);
  if (!csv) throw InputError("cannot write csv: " + out);
  csv << csv_header() << "\n";
  int failures = 0;
  for (const auto& run : runs) {
    log_info("running " + run.label + " mode=" + run.mode + " seed=" +
             std::to_string(run.seed));
    const RunReport report = execute_run(run);
    if (report.outcome != Outcome::Solved) failures++;
    csv << csv_row(run, report) << "\n";
  }
  log_info("suite complete: " + std::to_string(runs.size() - failures) + "/" +
           std::to_string(runs.size()) + " solved");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar multi-robot rearrangement planner"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "generate a scenario file");
  std::string family, gen_out = "scenario.json";
  int robots = 2, objects = 2, walls = 1;
  std::uint64_t seed = 0;
  gen->add_option("family", family, "sorting|wall|shelfwall|stocking|lab")->required();
  gen->add_option("--robots,-r", robots, "robot count");
  gen->add_option("--objects,-o", objects, "object count");
  gen->add_option("--walls,-w", walls, "wall count (wall family)");
  gen->add_option("--seed,-s", seed, "generator seed");
  gen->add_option("--out", gen_out, "output path");

  auto* plan = app.add_subcommand("plan", "plan a scenario");
  std::string scenario_path, mode = "lazy", report_out = "report.json";
  std::string trace_out, svg_dir;
  double svg_dt = 0.0;
  plan->add_option("scenario", scenario_path, "scenario file")->required();
  plan->add_option("--mode,-m", mode, "lazy|eager")
      ->check(CLI::IsMember({"lazy", "eager"}));
  plan->add_option("--seed,-s", seed, "planner seed");
  plan->add_option("--out", report_out, "report output path");
  plan->add_option("--trace", trace_out, "trace output path");
  plan->add_option("--svg", svg_dir, "directory for SVG frames");
  plan->add_option("--svg-dt", svg_dt, "frame period in seconds");

  auto* val = app.add_subcommand("validate", "replay-validate a solved report");
  std::string val_scenario, val_report;
  val->add_option("scenario", val_scenario, "scenario file")->required();
  val->add_option("report", val_report, "report file")->required();

  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  std::string suite_path, csv_out = "results.csv";
  bench->add_option("suite", suite_path, "suite file")->required();
  bench->add_option("--out", csv_out, "csv output path");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_generate(family, robots, objects, walls, seed, gen_out);
    if (plan->parsed()) {
      return cmd_plan(scenario_path, mode, seed, report_out, trace_out, svg_dir, svg_dt);
    }
    if (val->parsed()) return cmd_validate(val_scenario, val_report);
    if (bench->parsed()) return cmd_bench(suite_path, csv_out);
  } catch (const lazydash::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
