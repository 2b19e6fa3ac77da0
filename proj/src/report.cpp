#include "pmcts/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

namespace pmcts::bench {

void write_results_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << "game,engine,k,in_flight,staleness,m,seed,wall_ns,best_action,root_n,tree_size,seq_wall_ns,speedup\n";
  for (const auto& r : rows) {
    char speedup[32];
    std::snprintf(speedup, sizeof speedup, "%.4f", r.speedup);
    out << '"' << r.game << "\"," << r.engine << ',' << r.lanes << ',' << r.in_flight << ',' << r.staleness << ','
        << r.budget_m << ',' << r.seed << ',' << r.wall_ns << ',' << r.best_action << ',' << r.root_n << ','
        << r.tree_size << ',' << r.seq_wall_ns << ',' << speedup << '\n';
  }
}

std::string digest(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json make_report(const std::vector<RunRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::uint32_t, std::uint32_t, std::string, std::uint64_t>;
  std::map<Key, std::vector<const RunRow*>> groups;
  for (const auto& r : rows) groups[{r.game, r.engine, r.lanes, r.in_flight, r.staleness, r.budget_m}].push_back(&r);

  nlohmann::json deterministic = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  for (const auto& [key, members] : groups) {
    const auto& [game, engine, lanes, in_flight, staleness, budget] = key;
    nlohmann::json id = {{"game", game}, {"engine", engine}, {"m", budget}};
    if (engine == "pipeline") {
      id["k"] = lanes;
      id["in_flight"] = in_flight;
      id["staleness"] = staleness;
    }

    // Only sequential searches and pipelines with one token in flight are
    // independent of thread timing.
    const bool replayable = engine != "pipeline" || in_flight == 1;
    nlohmann::json det = id;
    det["runs"] = members.size();
    det["all_root_n_equal_m"] = std::all_of(members.begin(), members.end(), [](const RunRow* r) {
      return r->root_n == static_cast<std::int64_t>(r->budget_m);
    });
    nlohmann::json seeds = nlohmann::json::array();
    nlohmann::json actions = nlohmann::json::array();
    nlohmann::json sizes = nlohmann::json::array();
    for (const RunRow* r : members) {
      seeds.push_back(r->seed);
      actions.push_back(r->best_action);
      sizes.push_back(r->tree_size);
    }
    det["seeds"] = std::move(seeds);
    if (replayable) {
      det["best_actions"] = actions;
      det["tree_sizes"] = sizes;
    }
    deterministic.push_back(std::move(det));

    std::vector<std::int64_t> walls;
    std::vector<std::int64_t> seq_walls;
    for (const RunRow* r : members) {
      walls.push_back(r->wall_ns);
      seq_walls.push_back(r->seq_wall_ns);
    }
    nlohmann::json t = id;
    t["median_wall_ns"] = median(walls);
    t["median_seq_wall_ns"] = median(seq_walls);
    const std::int64_t med = median(walls);
    t["median_speedup"] = med > 0 ? static_cast<double>(median(seq_walls)) / static_cast<double>(med) : 0.0;
    if (!replayable) {
      t["best_actions"] = std::move(actions);
      t["tree_sizes"] = std::move(sizes);
    }
    timing.push_back(std::move(t));
  }

  nlohmann::json report;
  report["deterministic"] = deterministic;
  report["digest"] = digest(deterministic);
  report["timing"] = std::move(timing);
  return report;
}

}  // namespace pmcts::bench
