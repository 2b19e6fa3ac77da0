#pragma once

#include "pmcts/game.hpp"
#include "pmcts/mcts.hpp"
#include "pmcts/pipeline.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace pmcts::bench {

struct GameSpec {
  enum class Kind { tictactoe, synthetic };
  Kind kind = Kind::tictactoe;
  /// Used when kind == synthetic. params.seed is the leaf-value seed.
  SyntheticParams synthetic;

  GameState root() const;
  /// "tictactoe" or "synthetic(b,d,cost)".
  std::string name() const;
};

enum class EngineKind { sequential, pipeline, random };

std::string_view to_string(EngineKind k) noexcept;
EngineKind parse_engine(std::string_view text);

struct EngineSpec {
  EngineKind kind = EngineKind::sequential;
  std::uint64_t budget_m = 1000;
  double c_p = 1.0;
  PipelineConfig pipeline;

  std::string label() const;
};

struct ExperimentSpec {
  GameSpec game;
  EngineSpec engine;
  std::uint32_t repetitions = 1;
  std::vector<std::uint64_t> seeds{0};

  /// Throws ConfigError unless repetitions >= 1 and seeds.size() == repetitions.
  void validate() const;
};

ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Metrics

class BudgetMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// t_seq / t_par. Both times must be positive and both runs must have used
/// the same iteration budget.
double playout_speedup(std::int64_t t_seq_ns, std::int64_t t_par_ns, std::uint64_t budget_seq,
                       std::uint64_t budget_par);

/// Fraction of iterations whose selected path (identified by its stop node)
/// equals that of an earlier iteration still in flight when it was selected.
double duplicate_trajectory_fraction(const TokenAudit& audit);

/// L1 distance between the normalized root visit distributions, matched by
/// action. In [0, 2].
double root_policy_distance(const SearchResult& a, const SearchResult& b);

/// Lower-median of the values; 0 for an empty input.
std::int64_t median(std::vector<std::int64_t> values);

// ---------------------------------------------------------------------------
// Experiments

struct RunRow {
  std::string game;
  std::string engine;
  std::uint32_t lanes = 0;
  std::uint32_t in_flight = 0;
  std::string staleness;
  std::uint64_t budget_m = 0;
  std::uint64_t seed = 0;
  std::int64_t wall_ns = 0;
  Action best_action = 0;
  std::int64_t root_n = 0;
  std::size_t tree_size = 0;
  /// Sequential baseline with the same seed; pipeline rows only.
  std::int64_t seq_wall_ns = 0;
  double speedup = 1.0;
};

/// Result of one search with any engine.
struct EngineOutcome {
  SearchResult result;
  std::optional<StageStats> stats;
  std::optional<TokenAudit> audit;
};

/// Runs one search. Throws InvariantViolation if the tree invariants or the
/// root visit count do not hold afterwards.
EngineOutcome run_engine(const EngineSpec& engine, const GameState& root, std::uint64_t seed);

/// One row per seed. Pipeline rows also time a sequential baseline.
std::vector<RunRow> run_experiment(const ExperimentSpec& spec);

/// Per-lane-count runs of the same experiment.
std::vector<RunRow> run_sweep(const ExperimentSpec& spec, const std::vector<std::uint32_t>& lanes);

void write_results_csv(std::ostream& out, const std::vector<RunRow>& rows);

/// Aggregates grouped by (engine, lanes, in_flight, staleness).
/// "deterministic" holds seed-stable fields and "digest" its hash; wall
/// times live under "timing".
nlohmann::json make_report(const std::vector<RunRow>& rows);

/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string digest(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Head-to-head strength

struct MatchReport {
  std::uint32_t games = 0;
  std::uint32_t wins = 0;   // side A
  std::uint32_t draws = 0;
  std::uint32_t losses = 0;
  bool seat_balanced = false;
  /// (wins + draws / 2) / games.
  double win_rate = 0.0;
  /// Normal-approximation 95% interval, clamped to [0, 1].
  double ci_low = 0.0;
  double ci_high = 0.0;
};

void to_json(nlohmann::json& j, const MatchReport& r);

/// Plays `games` full games (even count; A moves first in even-numbered
/// games). Games 2j and 2j+1 share the seed mix64(seed, j) with seats
/// swapped, so swapping A and B mirrors the report.
MatchReport strength_match(const EngineSpec& a, const EngineSpec& b, const GameSpec& game, std::uint32_t games,
                           std::uint64_t seed);

/// Move chosen by an engine; random engines pick uniformly.
Action choose_move(const EngineSpec& engine, const GameState& state, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Search overhead

struct OverheadReport {
  /// Proxy 1: mean over seeds of duplicate_trajectory_fraction.
  double duplicate_trajectory_fraction = 0.0;
  /// Proxy 2: mean over seeds of root_policy_distance to the sequential run.
  double root_policy_distance = 0.0;
  std::vector<double> per_seed_duplicates;
  std::vector<double> per_seed_distance;
  /// Mean idle time per stage (select, expand, playout, backup).
  std::array<std::int64_t, kNumStages> mean_idle_ns{};
};

void to_json(nlohmann::json& j, const OverheadReport& r);

OverheadReport search_overhead(const GameSpec& game, const EngineSpec& pipeline, const EngineSpec& sequential,
                               const std::vector<std::uint64_t>& seeds);

}  // namespace pmcts::bench
