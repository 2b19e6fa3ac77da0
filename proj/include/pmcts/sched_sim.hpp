#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace pmcts::sim {

/// One pipeline stage: `duration` ticks per item on each of `lanes` units.
struct StageSpec {
  std::string name;
  std::int64_t duration = 1;
  std::uint32_t lanes = 1;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

struct SimConfig {
  std::vector<StageSpec> stages;
  std::int64_t num_items = 1;

  /// Throws std::invalid_argument on an empty pipeline, num_items < 1,
  /// duration < 1 or lanes < 1.
  void validate() const;
};

struct GanttEntry {
  std::int64_t item = 0;
  std::size_t stage = 0;
  std::uint32_t lane = 0;
  std::int64_t start = 0;
  std::int64_t end = 0;

  friend bool operator==(const GanttEntry&, const GanttEntry&) = default;
};

struct SimResult {
  std::int64_t makespan = 0;
  std::int64_t steady_period = 0;
  /// Sorted by (start, stage index).
  std::vector<GanttEntry> gantt;
};

/// List-schedules the items through the stages with unbounded buffers.
/// Item i starts stage s once it has finished stage s-1 and a lane of s is
/// free. Items enter each stage in index order; a parallel stage gives the
/// item the lane on which it can start earliest, lower lane index on ties.
SimResult simulate(const SimConfig& config);

/// num_items * sum of durations.
std::int64_t sequential_makespan(const SimConfig& config);

/// Ticks per item at saturation: max over stages of ceil(duration / lanes).
std::int64_t steady_period(const SimConfig& config);

/// Uniform pipeline: `count` stages of `duration` ticks with one lane each,
/// named select/expand/playout/backup when count == 4.
SimConfig equal_stages(std::size_t count, std::int64_t num_items, std::int64_t duration = 1);

/// Canonical MCTS pipelines from the scheduling diagrams, four items each.
SimConfig linear_equal_config();      // (1,1,1,1)
SimConfig linear_unequal_config();    // (1,1,2,1)
SimConfig two_playout_lanes_config(); // (1,1,2x2 lanes,1)

/// {"stages":[{"name":..,"duration":..,"lanes":..},...],"items":N}
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& config);
SimConfig load_config(const std::filesystem::path& path);

/// CSV `item,stage,lane,start,end`; stage is the stage name.
void write_gantt_csv(std::ostream& out, const SimConfig& config, const SimResult& result);
/// Throws std::runtime_error naming the path on I/O failure.
void export_gantt(const SimConfig& config, const SimResult& result, const std::filesystem::path& path);
/// Parses what write_gantt_csv produced; stage names map back to indices.
std::vector<GanttEntry> read_gantt_csv(std::istream& in, const SimConfig& config);

/// Number of lanes busy during tick t (interval [t, t+1)).
std::vector<std::int64_t> busy_profile(const SimResult& result);

}  // namespace pmcts::sim
