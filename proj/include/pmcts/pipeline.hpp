#pragma once

#include "pmcts/mcts.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pmcts {

/// Whether Select provisionally counts a visit on the path it picks.
enum class StalenessPolicy { plain, visit_mark };

/// How expanded trajectories are handed to playout lanes.
enum class LaneAssignment { first_free, round_robin };

enum class Phase : std::uint8_t { selected = 0, expanded = 1, played = 2, backed = 3 };

enum class Stage : std::uint8_t { select = 0, expand = 1, playout = 2, backup = 3 };
inline constexpr std::size_t kNumStages = 4;

std::string_view to_string(StalenessPolicy p) noexcept;
std::string_view to_string(LaneAssignment a) noexcept;
std::string_view to_string(Phase p) noexcept;
std::string_view to_string(Stage s) noexcept;
StalenessPolicy parse_staleness(std::string_view text);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A stage saw a token in the wrong phase, or the token audit failed.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// drain() did not finish within the configured timeout.
class PipelineTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  std::uint32_t playout_lanes = 1;
  /// Items per inter-stage buffer; unset means 2 * playout_lanes.
  std::optional<std::uint32_t> buffer_capacity;
  std::uint32_t in_flight_limit = 1;
  StalenessPolicy staleness = StalenessPolicy::plain;
  LaneAssignment lane_assignment = LaneAssignment::first_free;
  std::chrono::milliseconds drain_timeout{std::chrono::minutes(10)};
  /// Keep the per-token stage event log (see write_events_csv).
  bool record_events = false;

  // Instrumentation used by tests and the Gantt experiments.
  /// Extra sleep added to every item in each stage.
  std::array<std::chrono::nanoseconds, kNumStages> stage_delay{};
  /// Extra sleep for a given iteration's playout.
  std::function<std::chrono::nanoseconds(std::uint64_t iteration)> playout_delay;

  std::uint32_t effective_buffer_capacity() const noexcept {
    return buffer_capacity.value_or(2 * playout_lanes);
  }
  /// Throws ConfigError on zero lanes, capacity or in-flight limit.
  void validate() const;
};

/// The unit that flows between stages.
struct TrajectoryToken {
  Trajectory trajectory;
  Phase phase = Phase::selected;
  std::optional<std::uint32_t> lane;
  /// Random stream of this iteration; expand and playout continue it.
  RandomStream rng{0, 0};
  /// Node at which Select stopped.
  NodeId selected_stop = kNoNode;
  /// Leading path entries that carry a provisional visit mark.
  std::size_t marked = 0;
  /// Backups completed when this token was selected (logical clock).
  std::uint64_t backed_before = 0;
  /// Expand stage found a terminal node and bypassed expansion and playout.
  bool fast_path = false;
};

/// Shared state the stage functions operate on.
struct StageContext {
  SearchTree& tree;
  const UctParams& params;
  const PipelineConfig& config;
};

// Stage functions. Each checks the token's phase on entry and throws
// InvariantViolation when it is not the phase the stage consumes.

/// Creates the token for `iteration` by selecting on the shared tree.
TrajectoryToken select_stage(StageContext ctx, std::uint64_t iteration, std::uint64_t backed_before = 0);
/// selected -> expanded, or selected -> played for terminal stop nodes.
/// A stop node whose untried actions were consumed by an earlier token is
/// left by continuing the UCT descent from it.
void expand_stage(StageContext ctx, TrajectoryToken& token);
/// expanded -> played. Tokens already played (fast path) pass unchanged.
void playout_stage(StageContext ctx, TrajectoryToken& token, std::uint32_t lane);
/// played -> backed.
void backup_stage(StageContext ctx, TrajectoryToken& token);

struct LaneStats {
  std::uint64_t items = 0;
  std::int64_t busy_ns = 0;
  double utilization = 0.0;
};

struct StageStat {
  std::uint64_t items = 0;
  /// Items that passed through without doing the stage's work.
  std::uint64_t skipped = 0;
  std::int64_t busy_ns = 0;
  std::int64_t idle_ns = 0;
  std::vector<LaneStats> lanes;
};

struct StageStats {
  std::array<StageStat, kNumStages> stages;
  std::int64_t wall_ns = 0;

  const StageStat& operator[](Stage s) const { return stages[static_cast<std::size_t>(s)]; }
  StageStat& operator[](Stage s) { return stages[static_cast<std::size_t>(s)]; }
};

/// One line of the token audit trail, written by the backup stage.
struct TokenRecord {
  std::uint64_t iteration = 0;
  std::uint64_t backup_ordinal = 0;
  std::uint64_t backed_before = 0;
  NodeId selected_stop = kNoNode;
  std::uint32_t lane = 0;
  bool fast_path = false;
  std::vector<NodeId> path;
  double delta = 0.0;
  Player perspective = Player::first;
};

struct TokenAudit {
  std::uint64_t created = 0;
  std::uint64_t backed = 0;
  std::vector<TokenRecord> records;  // in backup order
};

struct StageEvent {
  std::uint64_t token = 0;
  Stage stage = Stage::select;
  std::uint32_t lane = 0;
  std::int64_t start_ns = 0;
  std::int64_t end_ns = 0;
};

struct PipelineRun {
  SearchResult result;
  StageStats stats;
  TokenAudit audit;
  std::vector<StageEvent> events;
  SearchTree tree;
};

/// Runs budget_m iterations through the staged pipeline: one serial
/// select, expand and backup worker and `playout_lanes` playout workers,
/// connected by bounded buffers. At most in_flight_limit tokens are between
/// selection and completed backup at any time. Throws ConfigError,
/// InvariantViolation or PipelineTimeout.
PipelineRun run_pipeline(const GameState& root, const UctParams& params, const PipelineConfig& config);

/// Max over tokens of (iteration - backed_before): how many backups behind
/// the sequential schedule Select's view of the tree was.
std::uint64_t max_staleness(const TokenAudit& audit);

void to_json(nlohmann::json& j, const StageStats& s);
void to_json(nlohmann::json& j, const TokenAudit& a);

/// CSV with header `token,stage,lane,start_ns,end_ns`.
void write_events_csv(std::ostream& out, const std::vector<StageEvent>& events);

}  // namespace pmcts
