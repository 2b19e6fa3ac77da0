#include "pmcts/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace pmcts::bench {

GameState GameSpec::root() const {
  if (kind == Kind::tictactoe) return TicTacToeState{};
  return SyntheticGameState(synthetic);
}

std::string GameSpec::name() const {
  if (kind == Kind::tictactoe) return "tictactoe";
  std::ostringstream os;
  os << "synthetic(" << synthetic.branching << ',' << synthetic.depth << ',' << synthetic.playout_cost << ')';
  return os.str();
}

std::string_view to_string(EngineKind k) noexcept {
  switch (k) {
    case EngineKind::sequential: return "sequential";
    case EngineKind::pipeline: return "pipeline";
    case EngineKind::random: return "random";
  }
  return "?";
}

EngineKind parse_engine(std::string_view text) {
  if (text == "sequential") return EngineKind::sequential;
  if (text == "pipeline") return EngineKind::pipeline;
  if (text == "random") return EngineKind::random;
  throw ConfigError("unknown engine '" + std::string(text) + "' (sequential|pipeline|random)");
}

std::string EngineSpec::label() const {
  std::ostringstream os;
  os << to_string(kind);
  if (kind == EngineKind::random) return os.str();
  os << "(m=" << budget_m << ",cp=" << c_p;
  if (kind == EngineKind::pipeline) {
    os << ",k=" << pipeline.playout_lanes << ",in_flight=" << pipeline.in_flight_limit << ','
       << to_string(pipeline.staleness);
  }
  os << ')';
  return os.str();
}

void ExperimentSpec::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (seeds.size() != repetitions) {
    throw ConfigError("seed list has " + std::to_string(seeds.size()) + " entries for " +
                      std::to_string(repetitions) + " repetitions");
  }
  if (engine.kind == EngineKind::random) throw ConfigError("experiments need a searching engine");
  UctParams{engine.c_p, engine.budget_m, 0}.validate();
  if (engine.kind == EngineKind::pipeline) engine.pipeline.validate();
}

ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  ExperimentSpec spec;
  const auto& game = j.at("game");
  const std::string kind = game.is_string() ? game.get<std::string>() : game.at("kind").get<std::string>();
  if (kind == "tictactoe") {
    spec.game.kind = GameSpec::Kind::tictactoe;
  } else if (kind == "synthetic") {
    spec.game.kind = GameSpec::Kind::synthetic;
    if (game.is_object()) {
      spec.game.synthetic.branching = game.value("branching", spec.game.synthetic.branching);
      spec.game.synthetic.depth = game.value("depth", spec.game.synthetic.depth);
      spec.game.synthetic.playout_cost = game.value("playout_cost", spec.game.synthetic.playout_cost);
      spec.game.synthetic.seed = game.value("seed", spec.game.synthetic.seed);
    }
  } else {
    throw ConfigError("unknown game '" + kind + "'");
  }

  spec.engine.budget_m = j.value("budget_m", spec.engine.budget_m);
  spec.engine.c_p = j.value("c_p", spec.engine.c_p);
  if (j.contains("engine")) {
    const auto& e = j.at("engine");
    spec.engine.kind = parse_engine(e.is_string() ? e.get<std::string>() : e.at("kind").get<std::string>());
    if (e.is_object()) {
      auto& p = spec.engine.pipeline;
      p.playout_lanes = e.value("lanes", p.playout_lanes);
      p.in_flight_limit = e.value("in_flight", p.in_flight_limit);
      if (e.contains("buffer_capacity")) p.buffer_capacity = e.at("buffer_capacity").get<std::uint32_t>();
      if (e.contains("staleness")) p.staleness = parse_staleness(e.at("staleness").get<std::string>());
    }
  }
  if (j.contains("seeds")) {
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.repetitions = j.value("repetitions", static_cast<std::uint32_t>(spec.seeds.size()));
  } else {
    spec.repetitions = j.value("repetitions", 1u);
    spec.seeds.resize(spec.repetitions);
    for (std::uint32_t i = 0; i < spec.repetitions; ++i) spec.seeds[i] = i;
  }
  spec.validate();
  return spec;
}

nlohmann::json experiment_to_json(const ExperimentSpec& spec) {
  nlohmann::json game = {{"kind", spec.game.kind == GameSpec::Kind::tictactoe ? "tictactoe" : "synthetic"}};
  if (spec.game.kind == GameSpec::Kind::synthetic) {
    game["branching"] = spec.game.synthetic.branching;
    game["depth"] = spec.game.synthetic.depth;
    game["playout_cost"] = spec.game.synthetic.playout_cost;
    game["seed"] = spec.game.synthetic.seed;
  }
  nlohmann::json engine = {{"kind", std::string(to_string(spec.engine.kind))}};
  if (spec.engine.kind == EngineKind::pipeline) {
    const auto& p = spec.engine.pipeline;
    engine["lanes"] = p.playout_lanes;
    engine["in_flight"] = p.in_flight_limit;
    engine["buffer_capacity"] = p.effective_buffer_capacity();
    engine["staleness"] = std::string(to_string(p.staleness));
  }
  return {{"game", std::move(game)},
          {"engine", std::move(engine)},
          {"budget_m", spec.engine.budget_m},
          {"c_p", spec.engine.c_p},
          {"repetitions", spec.repetitions},
          {"seeds", spec.seeds}};
}

// ---------------------------------------------------------------------------

double playout_speedup(std::int64_t t_seq_ns, std::int64_t t_par_ns, std::uint64_t budget_seq,
                       std::uint64_t budget_par) {
  if (budget_seq != budget_par) {
    throw BudgetMismatchError("speedup needs equal budgets, got " + std::to_string(budget_seq) + " and " +
                              std::to_string(budget_par));
  }
  if (t_seq_ns <= 0 || t_par_ns <= 0) throw std::invalid_argument("speedup needs positive times");
  return static_cast<double>(t_seq_ns) / static_cast<double>(t_par_ns);
}

double duplicate_trajectory_fraction(const TokenAudit& audit) {
  if (audit.records.empty()) return 0.0;
  std::vector<const TokenRecord*> by_iteration(audit.records.size(), nullptr);
  for (const auto& r : audit.records) {
    if (r.iteration < by_iteration.size()) by_iteration[r.iteration] = &r;
  }
  std::size_t duplicates = 0;
  for (std::size_t i = 0; i < by_iteration.size(); ++i) {
    const TokenRecord* cur = by_iteration[i];
    if (!cur) continue;
    // Earlier tokens not yet backed up when this one was selected.
    for (std::size_t j = 0; j < i; ++j) {
      const TokenRecord* other = by_iteration[j];
      if (other && other->backup_ordinal >= cur->backed_before && other->selected_stop == cur->selected_stop) {
        ++duplicates;
        break;
      }
    }
  }
  return static_cast<double>(duplicates) / static_cast<double>(audit.records.size());
}

double root_policy_distance(const SearchResult& a, const SearchResult& b) {
  std::map<Action, std::pair<double, double>> dist;
  double total_a = 0.0;
  double total_b = 0.0;
  for (const auto& c : a.root_children) total_a += static_cast<double>(c.n);
  for (const auto& c : b.root_children) total_b += static_cast<double>(c.n);
  for (const auto& c : a.root_children) dist[c.action].first += total_a > 0 ? static_cast<double>(c.n) / total_a : 0.0;
  for (const auto& c : b.root_children) dist[c.action].second += total_b > 0 ? static_cast<double>(c.n) / total_b : 0.0;
  double l1 = 0.0;
  for (const auto& [action, pq] : dist) l1 += std::abs(pq.first - pq.second);
  return l1;
}

std::int64_t median(std::vector<std::int64_t> values) {
  if (values.empty()) return 0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

// ---------------------------------------------------------------------------

namespace {

void check_tree(const SearchTree& tree, std::uint64_t budget) {
  if (tree.n(SearchTree::root()) != static_cast<std::int64_t>(budget)) {
    throw InvariantViolation("root.n=" + std::to_string(tree.n(SearchTree::root())) + " != budget " +
                             std::to_string(budget));
  }
  if (auto err = tree.check_invariants()) throw InvariantViolation("tree invariant: " + *err);
}

}  // namespace

EngineOutcome run_engine(const EngineSpec& engine, const GameState& root, std::uint64_t seed) {
  const UctParams params{engine.c_p, engine.budget_m, seed};
  switch (engine.kind) {
    case EngineKind::sequential: {
      SearchRun run = search_sequential(root, params);
      check_tree(run.tree, params.budget_m);
      return {std::move(run.result), std::nullopt, std::nullopt};
    }
    case EngineKind::pipeline: {
      PipelineRun run = run_pipeline(root, params, engine.pipeline);
      check_tree(run.tree, params.budget_m);
      return {std::move(run.result), std::move(run.stats), std::move(run.audit)};
    }
    case EngineKind::random: break;
  }
  throw ConfigError("the random engine does not search");
}

std::vector<RunRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const GameState root = spec.game.root();
  EngineSpec baseline = spec.engine;
  baseline.kind = EngineKind::sequential;

  std::vector<RunRow> rows;
  for (std::uint64_t seed : spec.seeds) {
    const EngineOutcome out = run_engine(spec.engine, root, seed);
    RunRow row;
    row.game = spec.game.name();
    row.engine = std::string(to_string(spec.engine.kind));
    row.budget_m = spec.engine.budget_m;
    row.seed = seed;
    row.wall_ns = out.result.elapsed_ns;
    row.best_action = out.result.best_action;
    row.root_n = out.result.root_n;
    row.tree_size = out.result.tree_size;
    if (spec.engine.kind == EngineKind::pipeline) {
      row.lanes = spec.engine.pipeline.playout_lanes;
      row.in_flight = spec.engine.pipeline.in_flight_limit;
      row.staleness = std::string(to_string(spec.engine.pipeline.staleness));
      row.seq_wall_ns = run_engine(baseline, root, seed).result.elapsed_ns;
      row.speedup = playout_speedup(row.seq_wall_ns, row.wall_ns, baseline.budget_m, spec.engine.budget_m);
    } else {
      row.seq_wall_ns = row.wall_ns;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RunRow> run_sweep(const ExperimentSpec& spec, const std::vector<std::uint32_t>& lanes) {
  std::vector<RunRow> rows;
  for (std::uint32_t k : lanes) {
    ExperimentSpec s = spec;
    s.engine.kind = EngineKind::pipeline;
    s.engine.pipeline.playout_lanes = k;
    auto part = run_experiment(s);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

// ---------------------------------------------------------------------------

Action choose_move(const EngineSpec& engine, const GameState& state, std::uint64_t seed) {
  if (engine.kind == EngineKind::random) {
    const auto actions = state.legal_actions();
    RandomStream rng(seed, 0);
    return actions[rng.below(actions.size())];
  }
  return run_engine(engine, state, seed).result.best_action;
}

void to_json(nlohmann::json& j, const MatchReport& r) {
  j = {{"games", r.games},         {"wins", r.wins},        {"draws", r.draws},
       {"losses", r.losses},       {"seat_balanced", r.seat_balanced},
       {"win_rate", r.win_rate},   {"ci95", {r.ci_low, r.ci_high}}};
}

MatchReport strength_match(const EngineSpec& a, const EngineSpec& b, const GameSpec& game, std::uint32_t games,
                           std::uint64_t seed) {
  if (games == 0 || games % 2 != 0) throw ConfigError("seat-balanced matches need an even, nonzero game count");
  MatchReport report;
  report.games = games;
  report.seat_balanced = true;
  const GameState start = game.root();

  for (std::uint32_t g = 0; g < games; ++g) {
    const std::uint64_t game_seed = mix64(seed, g / 2);
    const bool a_first = g % 2 == 0;
    const Player a_player = a_first ? start.to_move() : opponent(start.to_move());
    GameState state = start;
    for (std::uint64_t ply = 0; !state.is_terminal(); ++ply) {
      const EngineSpec& mover = (state.to_move() == a_player) ? a : b;
      state = state.apply(choose_move(mover, state, mix64(game_seed, ply)));
    }
    const double r = state.terminal_reward(a_player);
    if (r == 1.0) {
      ++report.wins;
    } else if (r == 0.0) {
      ++report.losses;
    } else {
      ++report.draws;
    }
  }
  const double n = games;
  report.win_rate = (report.wins + 0.5 * report.draws) / n;
  const double half = 1.96 * std::sqrt(report.win_rate * (1.0 - report.win_rate) / n);
  report.ci_low = std::max(0.0, report.win_rate - half);
  report.ci_high = std::min(1.0, report.win_rate + half);
  return report;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const OverheadReport& r) {
  nlohmann::json idle = nlohmann::json::object();
  for (std::size_t i = 0; i < kNumStages; ++i) idle[std::string(to_string(static_cast<Stage>(i)))] = r.mean_idle_ns[i];
  j = {{"proxy", "duplicate_trajectory_fraction and root_policy_distance are search-overhead proxies"},
       {"duplicate_trajectory_fraction", r.duplicate_trajectory_fraction},
       {"root_policy_distance", r.root_policy_distance},
       {"per_seed_duplicates", r.per_seed_duplicates},
       {"per_seed_distance", r.per_seed_distance},
       {"mean_idle_ns", std::move(idle)}};
}

OverheadReport search_overhead(const GameSpec& game, const EngineSpec& pipeline, const EngineSpec& sequential,
                               const std::vector<std::uint64_t>& seeds) {
  if (pipeline.kind != EngineKind::pipeline || sequential.kind != EngineKind::sequential) {
    throw ConfigError("search_overhead compares a pipeline engine with a sequential one");
  }
  if (pipeline.budget_m != sequential.budget_m) throw BudgetMismatchError("search_overhead needs equal budgets");
  if (seeds.empty()) throw ConfigError("search_overhead needs at least one seed");

  OverheadReport report;
  const GameState root = game.root();
  std::array<std::int64_t, kNumStages> idle_sum{};
  for (std::uint64_t seed : seeds) {
    const EngineOutcome par = run_engine(pipeline, root, seed);
    const EngineOutcome seq = run_engine(sequential, root, seed);
    report.per_seed_duplicates.push_back(duplicate_trajectory_fraction(*par.audit));
    report.per_seed_distance.push_back(root_policy_distance(par.result, seq.result));
    for (std::size_t i = 0; i < kNumStages; ++i) idle_sum[i] += par.stats->stages[i].idle_ns;
  }
  const double count = static_cast<double>(seeds.size());
  for (double d : report.per_seed_duplicates) report.duplicate_trajectory_fraction += d / count;
  for (double d : report.per_seed_distance) report.root_policy_distance += d / count;
  for (std::size_t i = 0; i < kNumStages; ++i) {
    report.mean_idle_ns[i] = idle_sum[i] / static_cast<std::int64_t>(seeds.size());
  }
  return report;
}

}  // namespace pmcts::bench
