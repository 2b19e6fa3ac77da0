// bench: sequential vs. pipelined MCTS experiments and the pipeline
// scheduling simulator.
//
//   bench run      --game tictactoe --engine sequential --budget 1000 --seeds 10
//   bench sweep    --game synthetic --playout-cost 200 --lanes 1,2,4,8
//   bench match    --engine pipeline --lanes 4 --in-flight 8 --opponent sequential --games 200
//   bench overhead --lanes 4 --in-flight 8 --staleness plain --cp 0
//   bench sim      --config equal_stages.json
//
// Exit codes: 0 success, 1 usage or configuration error, 2 invariant violation.

#include "pmcts/bench.hpp"
#include "pmcts/pipeline.hpp"
#include "pmcts/sched_sim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace {

namespace fs = std::filesystem;
using namespace pmcts;

constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;

struct Options {
  std::string game = "tictactoe";
  std::uint32_t branching = 4;
  std::uint32_t depth = 8;
  std::uint32_t playout_cost = 0;
  std::uint64_t game_seed = 0;

  std::string engine = "sequential";
  std::uint64_t budget = 1000;
  double cp = 1.0;
  std::vector<std::uint32_t> lanes{1};
  std::uint32_t in_flight = 1;
  std::optional<std::uint32_t> buffer_cap;
  std::string staleness = "plain";

  std::uint32_t seeds = 1;
  std::vector<std::uint64_t> seed_list;
  std::string out_dir;
  std::string format = "csv";
  std::string config;

  // match
  std::string opponent = "sequential";
  std::uint64_t opponent_budget = 0;
  std::uint32_t games = 100;
  std::uint64_t match_seed = 0;

  // sim
  std::string stages;
  std::int64_t items = 4;
  std::string gantt;
};

void add_experiment_flags(CLI::App* cmd, Options& o, bool multi_lanes) {
  cmd->add_option("--config", o.config, "ExperimentSpec JSON file; flags given on the command line are ignored");
  cmd->add_option("--game", o.game, "tictactoe | synthetic")->check(CLI::IsMember({"tictactoe", "synthetic"}));
  cmd->add_option("--branching", o.branching, "synthetic branching factor")->check(CLI::PositiveNumber);
  cmd->add_option("--depth", o.depth, "synthetic tree depth")->check(CLI::PositiveNumber);
  cmd->add_option("--playout-cost", o.playout_cost, "synthetic busy-work units per playout");
  cmd->add_option("--game-seed", o.game_seed, "synthetic leaf-value seed");
  cmd->add_option("--engine", o.engine, "sequential | pipeline")->check(CLI::IsMember({"sequential", "pipeline"}));
  cmd->add_option("--budget", o.budget, "iterations per search (m)")->check(CLI::PositiveNumber);
  cmd->add_option("--cp", o.cp, "UCT exploration constant")->check(CLI::NonNegativeNumber);
  if (multi_lanes) {
    cmd->add_option("--lanes", o.lanes, "comma-separated playout lane counts")->delimiter(',')->required();
  } else {
    cmd->add_option("--lanes", o.lanes, "playout lanes (k)")->expected(1);
  }
  cmd->add_option("--in-flight", o.in_flight, "max trajectories inside the pipeline")->check(CLI::PositiveNumber);
  cmd->add_option("--buffer-cap", o.buffer_cap, "inter-stage buffer capacity (default 2k)");
  cmd->add_option("--staleness", o.staleness, "plain | visit-mark")
      ->check(CLI::IsMember({"plain", "visit-mark", "visit_mark"}));
  auto* seeds = cmd->add_option("--seeds", o.seeds, "run seeds 0..N-1")->check(CLI::PositiveNumber);
  cmd->add_option("--seed-list", o.seed_list, "explicit seeds")->delimiter(',')->excludes(seeds);
  cmd->add_option("--out", o.out_dir, "directory for results.csv and report.json");
  cmd->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
}

bench::ExperimentSpec experiment_from(const Options& o) {
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw ConfigError("cannot open config " + o.config);
    try {
      return bench::experiment_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(o.config + ": " + e.what());
    }
  }
  bench::ExperimentSpec spec;
  if (o.game == "synthetic") {
    spec.game.kind = bench::GameSpec::Kind::synthetic;
    spec.game.synthetic = {o.branching, o.depth, o.playout_cost, o.game_seed};
  }
  spec.engine.kind = bench::parse_engine(o.engine);
  spec.engine.budget_m = o.budget;
  spec.engine.c_p = o.cp;
  spec.engine.pipeline.playout_lanes = o.lanes.empty() ? 1 : o.lanes.front();
  spec.engine.pipeline.in_flight_limit = o.in_flight;
  spec.engine.pipeline.buffer_capacity = o.buffer_cap;
  spec.engine.pipeline.staleness = parse_staleness(o.staleness);
  if (!o.seed_list.empty()) {
    spec.seeds = o.seed_list;
  } else {
    spec.seeds.resize(o.seeds);
    std::iota(spec.seeds.begin(), spec.seeds.end(), std::uint64_t{0});
  }
  spec.repetitions = static_cast<std::uint32_t>(spec.seeds.size());
  spec.validate();
  return spec;
}

void write_outputs(const Options& o, const std::vector<bench::RunRow>& rows, const nlohmann::json& report) {
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    std::ofstream csv(fs::path(o.out_dir) / "results.csv");
    std::ofstream json(fs::path(o.out_dir) / "report.json");
    if (!csv || !json) throw std::runtime_error("cannot write into " + o.out_dir);
    bench::write_results_csv(csv, rows);
    json << report.dump(2) << '\n';
  }
  if (o.format == "json") {
    std::cout << report.dump(2) << '\n';
  } else {
    bench::write_results_csv(std::cout, rows);
  }
}

void write_json(const Options& o, const std::string& name, const nlohmann::json& j) {
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    std::ofstream out(fs::path(o.out_dir) / name);
    if (!out) throw std::runtime_error("cannot write into " + o.out_dir);
    out << j.dump(2) << '\n';
  }
  std::cout << j.dump(2) << '\n';
}

int cmd_run(const Options& o) {
  const auto spec = experiment_from(o);
  const auto rows = bench::run_experiment(spec);
  auto report = bench::make_report(rows);
  report["spec"] = bench::experiment_to_json(spec);
  write_outputs(o, rows, report);
  return 0;
}

int cmd_sweep(const Options& o) {
  auto spec = experiment_from(o);
  const auto rows = bench::run_sweep(spec, o.lanes);
  auto report = bench::make_report(rows);
  report["spec"] = bench::experiment_to_json(spec);
  write_outputs(o, rows, report);
  return 0;
}

int cmd_match(const Options& o) {
  const auto spec = experiment_from(o);
  bench::EngineSpec opponent = spec.engine;
  opponent.kind = bench::parse_engine(o.opponent);
  if (o.opponent_budget != 0) opponent.budget_m = o.opponent_budget;
  const auto report = bench::strength_match(spec.engine, opponent, spec.game, o.games, o.match_seed);
  nlohmann::json j = report;
  j["side_a"] = spec.engine.label();
  j["side_b"] = opponent.label();
  j["game"] = spec.game.name();
  write_json(o, "match.json", j);
  return 0;
}

int cmd_overhead(const Options& o) {
  auto spec = experiment_from(o);
  spec.engine.kind = bench::EngineKind::pipeline;
  bench::EngineSpec sequential = spec.engine;
  sequential.kind = bench::EngineKind::sequential;
  const auto report = bench::search_overhead(spec.game, spec.engine, sequential, spec.seeds);
  nlohmann::json j = report;
  j["pipeline"] = spec.engine.label();
  j["game"] = spec.game.name();
  j["seeds"] = spec.seeds;
  write_json(o, "overhead.json", j);
  return 0;
}

// "1,1,2x2,1": durations, with an optional xLANES suffix per stage.
sim::SimConfig parse_stage_list(const std::string& text, std::int64_t items) {
  sim::SimConfig c;
  c.num_items = items;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    sim::StageSpec s;
    const auto x = tok.find('x');
    s.duration = std::stoll(tok.substr(0, x));
    if (x != std::string::npos) s.lanes = static_cast<std::uint32_t>(std::stoul(tok.substr(x + 1)));
    s.name = c.stages.size() < 4 && text.find(',') != std::string::npos
                 ? std::string(std::array{"select", "expand", "playout", "backup"}[c.stages.size()])
                 : "stage" + std::to_string(c.stages.size());
    c.stages.push_back(s);
  }
  c.validate();
  return c;
}

int cmd_sim(const Options& o) {
  sim::SimConfig config;
  if (!o.config.empty()) {
    config = sim::load_config(o.config);
  } else if (!o.stages.empty()) {
    config = parse_stage_list(o.stages, o.items);
  } else {
    throw ConfigError("sim needs --config FILE or --stages LIST");
  }
  const auto result = sim::simulate(config);
  std::cout << "makespan=" << result.makespan << '\n'
            << "sequential_makespan=" << sim::sequential_makespan(config) << '\n'
            << "steady_period=" << result.steady_period << '\n';
  if (!o.gantt.empty()) sim::export_gantt(config, result, o.gantt);
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    sim::export_gantt(config, result, fs::path(o.out_dir) / "gantt.csv");
  }
  if (o.format == "json") {
    nlohmann::json j = {{"makespan", result.makespan},
                        {"sequential_makespan", sim::sequential_makespan(config)},
                        {"steady_period", result.steady_period},
                        {"config", sim::config_to_json(config)}};
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipeline-parallel MCTS benchmark harness"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "run an experiment matrix");
  add_experiment_flags(run, o, false);
  auto* sweep = app.add_subcommand("sweep", "run an experiment for several playout lane counts");
  add_experiment_flags(sweep, o, true);
  auto* match = app.add_subcommand("match", "head-to-head games between two engines");
  add_experiment_flags(match, o, false);
  match->add_option("--opponent", o.opponent, "sequential | pipeline | random")
      ->check(CLI::IsMember({"sequential", "pipeline", "random"}));
  match->add_option("--opponent-budget", o.opponent_budget, "opponent iterations per move (default: --budget)");
  match->add_option("--games", o.games, "even number of games")->check(CLI::PositiveNumber);
  match->add_option("--match-seed", o.match_seed, "base seed of the game sequence");
  auto* overhead = app.add_subcommand("overhead", "search-overhead proxies of a pipeline vs. sequential search");
  add_experiment_flags(overhead, o, false);
  auto* simulate = app.add_subcommand("sim", "simulate a pipeline schedule");
  simulate->add_option("--config", o.config, "simulator JSON config");
  simulate->add_option("--stages", o.stages, "stage durations, e.g. 1,1,2x2,1 (x = lanes)");
  simulate->add_option("--items", o.items, "number of items")->check(CLI::PositiveNumber);
  simulate->add_option("--gantt", o.gantt, "write the Gantt CSV here");
  simulate->add_option("--out", o.out_dir, "directory for gantt.csv");
  simulate->add_option("--format", o.format, "text | json")->check(CLI::IsMember({"csv", "text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*match) return cmd_match(o);
    if (*overhead) return cmd_overhead(o);
    if (*simulate) return cmd_sim(o);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const PipelineTimeout& e) {
    std::cerr << "pipeline stuck: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
