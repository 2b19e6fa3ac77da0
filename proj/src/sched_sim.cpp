#include "pmcts/sched_sim.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pmcts::sim {

void SimConfig::validate() const {
  if (stages.empty()) throw std::invalid_argument("pipeline needs at least one stage");
  if (num_items < 1) throw std::invalid_argument("num_items must be >= 1");
  for (const auto& s : stages) {
    if (s.duration < 1) throw std::invalid_argument("stage '" + s.name + "': duration must be >= 1");
    if (s.lanes < 1) throw std::invalid_argument("stage '" + s.name + "': lanes must be >= 1");
  }
}

SimResult simulate(const SimConfig& config) {
  config.validate();
  const auto items = static_cast<std::size_t>(config.num_items);
  std::vector<std::int64_t> ready(items, 0);  // finish time at the previous stage
  SimResult out;
  out.gantt.reserve(items * config.stages.size());

  for (std::size_t s = 0; s < config.stages.size(); ++s) {
    const StageSpec& stage = config.stages[s];
    std::vector<std::int64_t> lane_free(stage.lanes, 0);
    for (std::size_t i = 0; i < items; ++i) {
      std::uint32_t lane = 0;
      std::int64_t start = std::max(ready[i], lane_free[0]);
      for (std::uint32_t l = 1; l < stage.lanes; ++l) {
        const std::int64_t candidate = std::max(ready[i], lane_free[l]);
        if (candidate < start) {
          start = candidate;
          lane = l;
        }
      }
      const std::int64_t end = start + stage.duration;
      lane_free[lane] = end;
      ready[i] = end;
      out.gantt.push_back({static_cast<std::int64_t>(i), s, lane, start, end});
    }
  }

  std::sort(out.gantt.begin(), out.gantt.end(), [](const GanttEntry& a, const GanttEntry& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.stage != b.stage) return a.stage < b.stage;
    return a.item < b.item;
  });
  for (const auto& e : out.gantt) out.makespan = std::max(out.makespan, e.end);
  out.steady_period = steady_period(config);
  return out;
}

std::int64_t sequential_makespan(const SimConfig& config) {
  config.validate();
  std::int64_t per_item = 0;
  for (const auto& s : config.stages) per_item += s.duration;
  return config.num_items * per_item;
}

std::int64_t steady_period(const SimConfig& config) {
  config.validate();
  std::int64_t period = 0;
  for (const auto& s : config.stages) {
    const std::int64_t lanes = s.lanes;
    period = std::max(period, (s.duration + lanes - 1) / lanes);
  }
  return period;
}

namespace {

const char* const kMctsStageNames[] = {"select", "expand", "playout", "backup"};

SimConfig mcts_config(std::int64_t playout_duration, std::uint32_t playout_lanes) {
  SimConfig c = equal_stages(4, 4);
  c.stages[2].duration = playout_duration;
  c.stages[2].lanes = playout_lanes;
  return c;
}

}  // namespace

SimConfig equal_stages(std::size_t count, std::int64_t num_items, std::int64_t duration) {
  SimConfig c;
  c.num_items = num_items;
  for (std::size_t i = 0; i < count; ++i) {
    c.stages.push_back({count == 4 ? kMctsStageNames[i] : "stage" + std::to_string(i), duration, 1});
  }
  return c;
}

SimConfig linear_equal_config() { return mcts_config(1, 1); }
SimConfig linear_unequal_config() { return mcts_config(2, 1); }
SimConfig two_playout_lanes_config() { return mcts_config(2, 2); }

SimConfig config_from_json(const nlohmann::json& j) {
  SimConfig c;
  for (const auto& s : j.at("stages")) {
    StageSpec spec;
    spec.name = s.value("name", "stage" + std::to_string(c.stages.size()));
    spec.duration = s.at("duration").get<std::int64_t>();
    spec.lanes = s.value("lanes", 1u);
    c.stages.push_back(std::move(spec));
  }
  c.num_items = j.at("items").get<std::int64_t>();
  c.validate();
  return c;
}

nlohmann::json config_to_json(const SimConfig& config) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : config.stages) stages.push_back({{"name", s.name}, {"duration", s.duration}, {"lanes", s.lanes}});
  return {{"stages", std::move(stages)}, {"items", config.num_items}};
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open simulator config " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_gantt_csv(std::ostream& out, const SimConfig& config, const SimResult& result) {
  out << "item,stage,lane,start,end\n";
  for (const auto& e : result.gantt) {
    out << e.item << ',' << config.stages.at(e.stage).name << ',' << e.lane << ',' << e.start << ',' << e.end << '\n';
  }
}

void export_gantt(const SimConfig& config, const SimResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write Gantt CSV " + path.string());
  write_gantt_csv(out, config, result);
  out.flush();
  if (!out) throw std::runtime_error("error writing Gantt CSV " + path.string());
}

std::vector<GanttEntry> read_gantt_csv(std::istream& in, const SimConfig& config) {
  std::string line;
  if (!std::getline(in, line) || line != "item,stage,lane,start,end") {
    throw std::invalid_argument("not a Gantt CSV (bad header)");
  }
  std::vector<GanttEntry> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string item, stage, lane, start, end;
    std::getline(fields, item, ',');
    std::getline(fields, stage, ',');
    std::getline(fields, lane, ',');
    std::getline(fields, start, ',');
    std::getline(fields, end, ',');
    const auto it = std::find_if(config.stages.begin(), config.stages.end(),
                                 [&](const StageSpec& s) { return s.name == stage; });
    if (it == config.stages.end()) throw std::invalid_argument("unknown stage in Gantt CSV: " + stage);
    rows.push_back({std::stoll(item), static_cast<std::size_t>(it - config.stages.begin()),
                    static_cast<std::uint32_t>(std::stoul(lane)), std::stoll(start), std::stoll(end)});
  }
  return rows;
}

std::vector<std::int64_t> busy_profile(const SimResult& result) {
  std::vector<std::int64_t> busy(static_cast<std::size_t>(result.makespan), 0);
  for (const auto& e : result.gantt) {
    for (std::int64_t t = e.start; t < e.end; ++t) ++busy[static_cast<std::size_t>(t)];
  }
  return busy;
}

}  // namespace pmcts::sim
