// wrrnoc: latency analysis and simulation of WRR ring/mesh networks.
//
//   wrrnoc analyze  --scenario s.json [--out r.csv] [--format csv|json]
//   wrrnoc simulate --scenario s.json [--seed N] [--jobs N] [--event-log f]
//   wrrnoc compare  --scenario s.json [--jobs N]
//   wrrnoc sweep    --scenario s.json [--jobs N]
//
// Exit status: 0 ok, 1 invalid input, 2 runtime failure or every point saturated.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wrrnoc/wrrnoc.hpp"

namespace {

struct Options {
  std::string scenario;
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  std::string event_log;
};

void add_common(CLI::App* cmd, Options& o, bool simulates) {
  cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Report path (default: scenario output.path, else stdout)");
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--jobs", o.jobs, "Worker threads for sweep points")->check(CLI::PositiveNumber);
  if (simulates) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&o](std::uint64_t s) { o.seed = s; o.seed_set = true; }, "Simulator seed");
  }
}

int run(const std::string& command, const Options& o) {
  using namespace wrrnoc;
  Scenario sc = load_scenario(o.scenario);
  if (o.seed_set) sc.seed = o.seed;
  const std::string format = o.format.empty() ? sc.output_format : o.format;
  const std::string path = o.out.empty() ? sc.output_path : o.out;

  PointOptions popt;
  popt.seed = sc.seed;
  if (command == "analyze") popt.mode = RunMode::Analyze;
  else if (command == "simulate") popt.mode = RunMode::Simulate;
  else popt.mode = RunMode::Compare;

  std::ofstream log;
  int jobs = o.jobs;
  if (!o.event_log.empty()) {
    log.open(o.event_log);
    if (!log) throw Error("cannot write event log '" + o.event_log + "'");
    popt.event_log = &log;
    jobs = 1;
  }

  RunMetadata meta;
  meta.seed = sc.seed;
  meta.command = command;
  meta.started = utc_timestamp();
  const auto points = sweep_points(sc, command == "sweep");
  const auto rows = run_points(sc, points, popt, jobs);
  meta.finished = utc_timestamp();
  if (sc.pattern == TrafficPattern::UniformLlcHit)
    meta.notes.push_back("uniform-llc-hit: every node is treated as an LLC slice");
  if (sc.pattern == TrafficPattern::LlcMissHotspot) {
    std::string mcs;
    for (int n : memory_controller_nodes(sc.topology, sc.memory_controllers))
      mcs += (mcs.empty() ? "" : " ") + std::to_string(n);
    meta.notes.push_back("memory controllers at nodes: " + mcs);
  }

  emit_report(rows, format, path, meta, &std::cout);

  bool any_value = false, all_saturated = true;
  for (const auto& r : rows) {
    if (!r.error.empty()) std::cerr << "wrrnoc: " << r.scenario << " lambda=" << r.lambda << ": " << r.error << '\n';
    any_value = any_value || r.analytic || r.sim;
    all_saturated = all_saturated && r.saturated;
  }
  if (all_saturated) {
    std::cerr << "wrrnoc: every sweep point is saturated\n";
    return 2;
  }
  return any_value ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency model and cycle-level simulator for weighted round-robin NoCs"};
  app.require_subcommand(1);
  Options opts;
  auto* analyze = app.add_subcommand("analyze", "Analytical latency for every sweep point");
  auto* simulate = app.add_subcommand("simulate", "Simulated latency for every sweep point");
  auto* compare = app.add_subcommand("compare", "Model against simulator for every sweep point");
  auto* sweep = app.add_subcommand("sweep", "Compare over the weights x p_burst x lambda grid");
  add_common(analyze, opts, false);
  add_common(simulate, opts, true);
  add_common(compare, opts, true);
  add_common(sweep, opts, true);
  simulate->add_option("--event-log", opts.event_log, "Write per-cycle arbiter events here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opts);
  } catch (const wrrnoc::ScenarioError& e) {
    std::cerr << "wrrnoc: invalid scenario: " << e.what() << '\n';
    return 1;
  } catch (const wrrnoc::InvalidArgument& e) {
    std::cerr << "wrrnoc: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "wrrnoc: " << e.what() << '\n';
    return 2;
  }
}
