#include "pmcts/pipeline.hpp"

#include "pmcts/bounded_buffer.hpp"

#include <algorithm>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace pmcts {

std::string_view to_string(StalenessPolicy p) noexcept {
  return p == StalenessPolicy::plain ? "plain" : "visit-mark";
}

std::string_view to_string(LaneAssignment a) noexcept {
  return a == LaneAssignment::first_free ? "first-free" : "round-robin";
}

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::selected: return "selected";
    case Phase::expanded: return "expanded";
    case Phase::played: return "played";
    case Phase::backed: return "backed";
  }
  return "?";
}

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::select: return "select";
    case Stage::expand: return "expand";
    case Stage::playout: return "playout";
    case Stage::backup: return "backup";
  }
  return "?";
}

StalenessPolicy parse_staleness(std::string_view text) {
  if (text == "plain") return StalenessPolicy::plain;
  if (text == "visit-mark" || text == "visit_mark") return StalenessPolicy::visit_mark;
  throw ConfigError("unknown staleness policy '" + std::string(text) + "' (plain|visit-mark)");
}

void PipelineConfig::validate() const {
  if (playout_lanes < 1) throw ConfigError("playout_lanes must be >= 1");
  if (in_flight_limit < 1) throw ConfigError("in_flight_limit must be >= 1");
  if (effective_buffer_capacity() < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (drain_timeout.count() <= 0) throw ConfigError("drain_timeout must be positive");
}

// ---------------------------------------------------------------------------
// Stage functions

namespace {

void require_phase(const TrajectoryToken& token, Phase expected, Stage stage) {
  if (token.phase != expected) {
    std::ostringstream msg;
    msg << to_string(stage) << " stage received token " << token.trajectory.iteration_index << " in phase "
        << to_string(token.phase) << ", expected " << to_string(expected);
    throw InvariantViolation(msg.str());
  }
}

}  // namespace

TrajectoryToken select_stage(StageContext ctx, std::uint64_t iteration, std::uint64_t backed_before) {
  TrajectoryToken token;
  token.trajectory = select(ctx.tree, ctx.params.c_p, iteration);
  token.rng = RandomStream(ctx.params.seed, iteration);
  token.selected_stop = token.trajectory.leaf();
  token.backed_before = backed_before;
  if (ctx.config.staleness == StalenessPolicy::visit_mark) {
    for (NodeId id : token.trajectory.path) ctx.tree.add_visit(id);
    token.marked = token.trajectory.path.size();
  }
  token.phase = Phase::selected;
  return token;
}

void expand_stage(StageContext ctx, TrajectoryToken& token) {
  require_phase(token, Phase::selected, Stage::expand);
  Trajectory& traj = token.trajectory;
  const NodeId stop = traj.leaf();
  if (!ctx.tree.node(stop).is_terminal && ctx.tree.untried_count(stop) == 0) {
    descend(ctx.tree, ctx.params.c_p, stop, traj);
  }
  const SearchNode& leaf = ctx.tree.node(traj.leaf());
  if (leaf.is_terminal) {
    traj.perspective = leaf.mover;
    traj.delta = traj.leaf_state.terminal_reward(traj.perspective);
    token.fast_path = true;
    token.phase = Phase::played;
    return;
  }
  expand(ctx.tree, traj, token.rng);
  token.phase = Phase::expanded;
}

void playout_stage(StageContext ctx, TrajectoryToken& token, std::uint32_t lane) {
  token.lane = lane;
  if (token.fast_path && token.phase == Phase::played) return;
  require_phase(token, Phase::expanded, Stage::playout);
  Trajectory& traj = token.trajectory;
  traj.perspective = ctx.tree.node(traj.leaf()).mover;
  traj.delta = playout(traj.leaf_state, traj.perspective, token.rng);
  token.phase = Phase::played;
}

void backup_stage(StageContext ctx, TrajectoryToken& token) {
  require_phase(token, Phase::played, Stage::backup);
  backup(ctx.tree, token.trajectory, token.marked);
  token.phase = Phase::backed;
}

// ---------------------------------------------------------------------------
// Engine

namespace {

using Clock = std::chrono::steady_clock;

void sleep_if(std::chrono::nanoseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

class Engine {
 public:
  Engine(const GameState& root, const UctParams& params, const PipelineConfig& config)
      : params_(params),
        config_(config),
        tree_(root, params.budget_m + 1),
        to_expand_(config.effective_buffer_capacity()),
        to_backup_(config.effective_buffer_capacity()) {
    const std::size_t queues = config.lane_assignment == LaneAssignment::round_robin ? config.playout_lanes : 1;
    for (std::size_t i = 0; i < queues; ++i) {
      to_playout_.push_back(std::make_unique<BoundedBuffer<TrajectoryToken>>(config.effective_buffer_capacity()));
    }
    stats_[Stage::playout].lanes.resize(config.playout_lanes);
    lane_events_.resize(config.playout_lanes);
    audit_.records.reserve(params.budget_m);
  }

  PipelineRun run() {
    start_ = Clock::now();
    std::vector<std::thread> workers;
    workers.emplace_back([this] { guarded([this] { select_worker(); }); });
    workers.emplace_back([this] { guarded([this] { expand_worker(); }); });
    for (std::uint32_t lane = 0; lane < config_.playout_lanes; ++lane) {
      workers.emplace_back([this, lane] { guarded([this, lane] { playout_worker(lane); }); });
    }
    workers.emplace_back([this] { guarded([this] { backup_worker(); }); });

    const bool drained = wait_drained();
    std::string occupancy;
    if (!drained) occupancy = describe_occupancy();
    shutdown();
    for (auto& t : workers) t.join();
    const std::int64_t wall = since_start();

    if (error_) std::rethrow_exception(error_);
    if (!drained) {
      throw PipelineTimeout("pipeline did not drain within " + std::to_string(config_.drain_timeout.count()) +
                            " ms; " + occupancy);
    }
    verify_audit();

    stats_.wall_ns = wall;
    StageStat& playout = stats_[Stage::playout];
    for (auto& lane : playout.lanes) {
      lane.utilization = wall > 0 ? static_cast<double>(lane.busy_ns) / static_cast<double>(wall) : 0.0;
    }
    playout.idle_ns = static_cast<std::int64_t>(playout.lanes.size()) * wall - playout.busy_ns;

    PipelineRun out{summarize(tree_, wall), stats_, std::move(audit_), collect_events(), std::move(tree_)};
    return out;
  }

 private:
  StageContext ctx() { return {tree_, params_, config_}; }

  std::int64_t since_start() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start_).count();
  }

  template <class F>
  void guarded(F&& body) {
    try {
      body();
    } catch (...) {
      {
        std::lock_guard lock(gate_mu_);
        if (!error_) error_ = std::current_exception();
      }
      shutdown();
    }
  }

  void shutdown() {
    {
      std::lock_guard lock(gate_mu_);
      stop_ = true;
    }
    gate_cv_.notify_all();
    to_expand_.close();
    for (auto& q : to_playout_) q->close();
    to_backup_.close();
  }

  bool wait_drained() {
    std::unique_lock lock(gate_mu_);
    return gate_cv_.wait_for(lock, config_.drain_timeout,
                             [&] { return error_ || backed_ == params_.budget_m; });
  }

  std::string describe_occupancy() {
    std::ostringstream os;
    {
      std::lock_guard lock(gate_mu_);
      os << "created=" << created_ << " backed=" << backed_ << " in_flight=" << in_flight_;
    }
    os << " buffers: select->expand=" << to_expand_.size();
    for (std::size_t i = 0; i < to_playout_.size(); ++i) os << " expand->playout[" << i << "]=" << to_playout_[i]->size();
    os << " playout->backup=" << to_backup_.size();
    return os.str();
  }

  void record(std::vector<StageEvent>& log, std::uint64_t token, Stage stage, std::uint32_t lane,
              std::int64_t start, std::int64_t end) {
    if (config_.record_events) log.push_back({token, stage, lane, start, end});
  }

  void select_worker() {
    StageStat& st = stats_[Stage::select];
    for (std::uint64_t i = 0; i < params_.budget_m; ++i) {
      const std::int64_t t0 = since_start();
      std::uint64_t backed_before = 0;
      {
        std::unique_lock lock(gate_mu_);
        gate_cv_.wait(lock, [&] { return stop_ || in_flight_ < config_.in_flight_limit; });
        if (stop_) return;
        ++in_flight_;
        ++created_;
        backed_before = backed_;
      }
      const std::int64_t t1 = since_start();
      TrajectoryToken token = select_stage(ctx(), i, backed_before);
      sleep_if(config_.stage_delay[0]);
      const std::int64_t t2 = since_start();
      ++st.items;
      st.busy_ns += t2 - t1;
      record(select_events_, i, Stage::select, 0, t1, t2);
      if (!to_expand_.push(std::move(token))) return;
      st.idle_ns += (t1 - t0) + (since_start() - t2);
    }
  }

  void expand_worker() {
    StageStat& st = stats_[Stage::expand];
    std::uint64_t sent = 0;
    std::int64_t idle_from = since_start();
    while (auto token = to_expand_.pop()) {
      const std::int64_t t1 = since_start();
      st.idle_ns += t1 - idle_from;
      expand_stage(ctx(), *token);
      sleep_if(config_.stage_delay[1]);
      const std::int64_t t2 = since_start();
      ++st.items;
      if (token->fast_path) ++st.skipped;
      st.busy_ns += t2 - t1;
      record(expand_events_, token->trajectory.iteration_index, Stage::expand, 0, t1, t2);
      auto& queue = *to_playout_[to_playout_.size() == 1 ? 0 : sent % to_playout_.size()];
      ++sent;
      if (!queue.push(std::move(*token))) return;
      idle_from = since_start();
    }
  }

  void playout_worker(std::uint32_t lane) {
    LaneStats& ls = stats_[Stage::playout].lanes[lane];
    auto& queue = *to_playout_[to_playout_.size() == 1 ? 0 : lane];
    auto& log = lane_events_[lane];
    while (auto token = queue.pop()) {
      const std::int64_t t1 = since_start();
      playout_stage(ctx(), *token, lane);
      if (!token->fast_path) {
        sleep_if(config_.stage_delay[2]);
        if (config_.playout_delay) sleep_if(config_.playout_delay(token->trajectory.iteration_index));
      }
      const std::int64_t t2 = since_start();
      ++ls.items;
      ls.busy_ns += t2 - t1;
      record(log, token->trajectory.iteration_index, Stage::playout, lane, t1, t2);
      if (!to_backup_.push(std::move(*token))) return;
    }
  }

  void backup_worker() {
    StageStat& st = stats_[Stage::backup];
    std::int64_t idle_from = since_start();
    while (auto token = to_backup_.pop()) {
      const std::int64_t t1 = since_start();
      st.idle_ns += t1 - idle_from;
      backup_stage(ctx(), *token);
      sleep_if(config_.stage_delay[3]);
      const std::int64_t t2 = since_start();
      ++st.items;
      st.busy_ns += t2 - t1;
      const Trajectory& traj = token->trajectory;
      record(backup_events_, traj.iteration_index, Stage::backup, 0, t1, t2);

      TokenRecord rec;
      rec.iteration = traj.iteration_index;
      rec.backup_ordinal = audit_.records.size();
      rec.backed_before = token->backed_before;
      rec.selected_stop = token->selected_stop;
      rec.lane = token->lane.value_or(0);
      rec.fast_path = token->fast_path;
      rec.path = traj.path;
      rec.delta = *traj.delta;
      rec.perspective = traj.perspective;
      audit_.records.push_back(std::move(rec));
      {
        std::lock_guard lock(gate_mu_);
        --in_flight_;
        ++backed_;
      }
      gate_cv_.notify_all();
      idle_from = since_start();
    }
  }

  void verify_audit() {
    audit_.created = created_;
    audit_.backed = backed_;
    const std::uint64_t m = params_.budget_m;
    if (created_ != m || backed_ != m || audit_.records.size() != m) {
      throw InvariantViolation("token audit: created=" + std::to_string(created_) +
                               " backed=" + std::to_string(backed_) + " expected " + std::to_string(m));
    }
    std::vector<char> seen(m, 0);
    for (const auto& r : audit_.records) {
      if (r.iteration >= m || seen[r.iteration]++) {
        throw InvariantViolation("token audit: iteration " + std::to_string(r.iteration) + " lost or duplicated");
      }
    }
    if (tree_.n(SearchTree::root()) != static_cast<std::int64_t>(m)) {
      throw InvariantViolation("root visit count " + std::to_string(tree_.n(SearchTree::root())) +
                               " != budget " + std::to_string(m));
    }
    StageStat& playout = stats_[Stage::playout];
    for (const auto& lane : playout.lanes) {
      playout.items += lane.items;
      playout.busy_ns += lane.busy_ns;
    }
    playout.skipped = stats_[Stage::expand].skipped;
  }

  std::vector<StageEvent> collect_events() {
    std::vector<StageEvent> all;
    if (!config_.record_events) return all;
    for (auto* log : {&select_events_, &expand_events_, &backup_events_}) all.insert(all.end(), log->begin(), log->end());
    for (auto& log : lane_events_) all.insert(all.end(), log.begin(), log.end());
    std::sort(all.begin(), all.end(), [](const StageEvent& a, const StageEvent& b) {
      if (a.start_ns != b.start_ns) return a.start_ns < b.start_ns;
      return a.stage < b.stage;
    });
    return all;
  }

  UctParams params_;
  PipelineConfig config_;
  SearchTree tree_;

  BoundedBuffer<TrajectoryToken> to_expand_;
  std::vector<std::unique_ptr<BoundedBuffer<TrajectoryToken>>> to_playout_;
  BoundedBuffer<TrajectoryToken> to_backup_;

  std::mutex gate_mu_;
  std::condition_variable gate_cv_;
  std::uint64_t in_flight_ = 0;
  std::uint64_t created_ = 0;
  std::uint64_t backed_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;

  Clock::time_point start_;
  StageStats stats_;
  TokenAudit audit_;
  std::vector<StageEvent> select_events_, expand_events_, backup_events_;
  std::vector<std::vector<StageEvent>> lane_events_;
};

}  // namespace

PipelineRun run_pipeline(const GameState& root, const UctParams& params, const PipelineConfig& config) {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  config.validate();
  if (root.is_terminal()) throw ConfigError("search root is terminal");
  Engine engine(root, params, config);
  return engine.run();
}

std::uint64_t max_staleness(const TokenAudit& audit) {
  std::uint64_t worst = 0;
  for (const auto& r : audit.records) worst = std::max(worst, r.iteration - r.backed_before);
  return worst;
}

void to_json(nlohmann::json& j, const StageStats& s) {
  j = nlohmann::json::object();
  j["wall_ns"] = s.wall_ns;
  for (std::size_t i = 0; i < kNumStages; ++i) {
    const StageStat& st = s.stages[i];
    nlohmann::json e = {{"items", st.items}, {"skipped", st.skipped}, {"busy_ns", st.busy_ns}, {"idle_ns", st.idle_ns}};
    if (!st.lanes.empty()) {
      nlohmann::json lanes = nlohmann::json::array();
      for (const auto& l : st.lanes) {
        lanes.push_back({{"items", l.items}, {"busy_ns", l.busy_ns}, {"utilization", l.utilization}});
      }
      e["lanes"] = std::move(lanes);
    }
    j[std::string(to_string(static_cast<Stage>(i)))] = std::move(e);
  }
}

void to_json(nlohmann::json& j, const TokenAudit& a) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : a.records) {
    recs.push_back({{"iteration", r.iteration},
                    {"backup_ordinal", r.backup_ordinal},
                    {"backed_before", r.backed_before},
                    {"selected_stop", r.selected_stop},
                    {"lane", r.lane},
                    {"fast_path", r.fast_path},
                    {"path", r.path},
                    {"delta", r.delta},
                    {"perspective", static_cast<int>(r.perspective)}});
  }
  j = {{"created", a.created}, {"backed", a.backed}, {"records", std::move(recs)}};
}

void write_events_csv(std::ostream& out, const std::vector<StageEvent>& events) {
  out << "token,stage,lane,start_ns,end_ns\n";
  for (const auto& e : events) {
    out << e.token << ',' << to_string(e.stage) << ',' << e.lane << ',' << e.start_ns << ',' << e.end_ns << '\n';
  }
}

}  // namespace pmcts
