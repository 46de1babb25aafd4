#include "cutsched/simkernel.hpp"

#include "cutsched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <queue>
#include <set>
#include <tuple>

namespace cutsched {

std::string_view to_string(TraceKind kind) {
  switch (kind) {
  case TraceKind::Arrival:
    return "arrival";
  case TraceKind::GroupStart:
    return "start";
  case TraceKind::GroupFinish:
    return "finish";
  case TraceKind::Precedence:
    return "precedence";
  case TraceKind::Drop:
    return "drop";
  }
  return "arrival";
}

namespace {

// Starts planned within this distance of the current time are committed.
constexpr Seconds kStartSlack = 1e-9;

struct Event {
  Seconds time = 0.0;
  EventKind kind = EventKind::Arrival;
  std::uint64_t seq = 0;
  std::size_t job = 0;
  std::uint64_t placement = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.kind, a.seq) > std::tie(b.time, b.kind, b.seq);
  }
};

struct InFlight {
  std::vector<Job> remaining;
  std::vector<CommittedUpstream> upstream;
};

class Simulation {
public:
  Simulation(const std::vector<Job>& workload, const Fleet& fleet,
             const SchedulerConfig& config)
      : jobs_(workload), fleet_(fleet), config_(config) {}

  SimResult run() {
    std::vector<std::size_t> order(jobs_.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(jobs_[a].arrival_time, jobs_[a].id) <
             std::tie(jobs_[b].arrival_time, jobs_[b].id);
    });
    for (std::size_t i : order) {
      push({jobs_[i].arrival_time, EventKind::Arrival, 0, i, 0});
    }

    while (!events_.empty()) {
      const Seconds now = events_.top().time;
      bool replan = false;
      while (!events_.empty() && events_.top().time == now) {
        Event ev = events_.top();
        events_.pop();
        replan = handle(ev) || replan;
      }
      if (replan) {
        dispatch(now);
      }
    }

    result_.metrics = compute_metrics(result_.trace);
    result_.executed.makespan = makespan(result_.executed);
    return std::move(result_);
  }

private:
  void push(Event ev) {
    ev.seq = next_seq_++;
    events_.push(ev);
  }

  bool handle(const Event& ev) {
    switch (ev.kind) {
    case EventKind::Arrival: {
      pending_.push_back(ev.job);
      TraceRecord rec;
      rec.kind = TraceKind::Arrival;
      rec.time = ev.time;
      rec.job = jobs_[ev.job].id;
      result_.trace.push_back(std::move(rec));
      return true;
    }
    case EventKind::GroupStart: {
      const Placement& p = *result_.executed.find(ev.placement);
      const Device& device = *fleet_.find(p.device);
      TraceRecord rec;
      rec.kind = TraceKind::GroupStart;
      rec.time = p.start;
      rec.placement = p.id;
      rec.device = p.device;
      rec.finish = p.finish;
      rec.mode_tag = p.mode_tag;
      for (const Job& m : p.group.members) {
        rec.members.push_back(
            {m.id, m.root_id(), fragment_id(m), m.stage, m.cut_index, m.n_cut, m.shots,
             m.qubits(), lpst(m, device)});
      }
      result_.trace.push_back(std::move(rec));
      for (const auto& edge : result_.executed.precedence) {
        if (edge.downstream == p.id) {
          TraceRecord e;
          e.kind = TraceKind::Precedence;
          e.time = p.start;
          e.placement = p.id;
          e.upstream = edge.upstream;
          e.delay = edge.delay;
          result_.trace.push_back(std::move(e));
        }
      }
      push({p.finish, EventKind::GroupFinish, 0, 0, p.id});
      return false;
    }
    case EventKind::GroupFinish: {
      const Placement& p = *result_.executed.find(ev.placement);
      busy_until_.erase(p.device);
      TraceRecord rec;
      rec.kind = TraceKind::GroupFinish;
      rec.time = ev.time;
      rec.placement = p.id;
      rec.device = p.device;
      result_.trace.push_back(std::move(rec));
      return true;
    }
    case EventKind::WindowDispatch:
      wakeups_.erase(ev.time);
      return true;
    }
    return false;
  }

  bool has_work() const { return !pending_.empty() || !in_flight_.empty(); }

  bool any_idle() const {
    return std::any_of(fleet_.devices.begin(), fleet_.devices.end(),
                       [&](const Device& d) { return !busy_until_.contains(d.name); });
  }

  void drop(const std::string& id, Seconds now, const std::string& reason) {
    std::string root = id;
    for (const auto& [parent, flight] : in_flight_) {
      for (const auto& j : flight.remaining) {
        if (j.id == id) {
          root = parent;
        }
      }
    }
    if (auto it = in_flight_.find(root); it != in_flight_.end()) {
      in_flight_.erase(it);
    } else {
      auto it2 = std::find_if(pending_.begin(), pending_.end(),
                              [&](std::size_t i) { return jobs_[i].id == root; });
      if (it2 == pending_.end()) {
        throw std::logic_error("simulation: cannot drop unknown job " + id);
      }
      pending_.erase(it2);
    }
    result_.dropped.push_back(root);
    TraceRecord rec;
    rec.kind = TraceKind::Drop;
    rec.time = now;
    rec.job = root;
    rec.reason = reason;
    result_.trace.push_back(std::move(rec));
  }

  void dispatch(Seconds now) {
    for (;;) {
      if (!has_work() || !any_idle()) {
        return;
      }
      std::vector<Job> candidates;
      PlanningContext ctx;
      ctx.now = now;
      ctx.first_placement_id = next_placement_;
      ctx.cut_cache = &cache_;
      for (const auto& [device, until] : busy_until_) {
        ctx.device_ready[device] = until;
      }
      for (const auto& [root, flight] : in_flight_) {
        ctx.in_flight.insert(root);
        candidates.insert(candidates.end(), flight.remaining.begin(), flight.remaining.end());
        ctx.committed_upstream.insert(ctx.committed_upstream.end(), flight.upstream.begin(),
                                      flight.upstream.end());
      }
      const auto window = static_cast<std::size_t>(config_.window);
      for (std::size_t k = 0; k < pending_.size() && k < window; ++k) {
        candidates.push_back(jobs_[pending_[k]]);
      }

      PlanResult plan;
      try {
        ++result_.dispatches;
        plan = adaptive_schedule(candidates, fleet_, config_, ctx);
      } catch (const UnschedulableError& e) {
        drop(e.job_id(), now, e.what());
        continue;
      }
      const auto& spans = plan.iteration_makespans;
      if (std::adjacent_find(spans.begin(), spans.end(), std::less<>()) != spans.end()) {
        ++result_.plans_non_monotone;
      }
      if (plan.outer_iterations > static_cast<int>(candidates.size()) + 1) {
        ++result_.plans_over_bound;
      }
      commit(plan.schedule, now);
      return;
    }
  }

  void commit(const Schedule& plan, Seconds now) {
    std::vector<const Placement*> starting;
    std::set<std::string> claimed;
    for (const auto& p : plan.placements) {
      if (p.start <= now + kStartSlack && !busy_until_.contains(p.device) &&
          claimed.insert(p.device).second) {
        starting.push_back(&p);
      }
    }

    std::set<std::string> started_ids;
    for (const Placement* p : starting) {
      for (const auto& m : p->group.members) {
        started_ids.insert(m.id);
      }
    }

    for (const Placement* p : starting) {
      Placement placed = *p;
      next_placement_ = std::max(next_placement_, placed.id + 1);
      busy_until_[placed.device] = placed.finish;
      const Device& device = *fleet_.find(placed.device);
      for (const auto& m : placed.group.members) {
        if (!m.is_sub_job()) {
          erase_pending(m.id);
          continue;
        }
        const std::string& root = *m.parent_id;
        auto [it, fresh] = in_flight_.try_emplace(root);
        if (fresh) {
          erase_pending(root);
          for (const auto& q : plan.placements) {
            for (const auto& sib : q.group.members) {
              if (sib.root_id() == root && !started_ids.contains(sib.id)) {
                it->second.remaining.push_back(sib);
              }
            }
          }
        } else {
          auto& rem = it->second.remaining;
          rem.erase(std::remove_if(rem.begin(), rem.end(),
                                   [&](const Job& j) { return j.id == m.id; }),
                    rem.end());
        }
        if (m.stage == Stage::Upstream) {
          auto& ups = it->second.upstream;
          const int cut = m.cut_index.value_or(0);
          const bool known = std::any_of(ups.begin(), ups.end(), [&](const CommittedUpstream& u) {
            return u.placement_id == placed.id && u.cut_index == cut;
          });
          if (!known) {
            ups.push_back({placed.id, device.name, placed.finish, root, cut});
          }
        }
      }
      for (const auto& edge : plan.precedence) {
        if (edge.downstream == placed.id) {
          result_.executed.precedence.push_back(edge);
        }
      }
      push({placed.start, EventKind::GroupStart, 0, 0, placed.id});
      result_.executed.placements.push_back(std::move(placed));
    }

    for (auto it = in_flight_.begin(); it != in_flight_.end();) {
      it = it->second.remaining.empty() ? in_flight_.erase(it) : std::next(it);
    }

    // Wake up for planned work that waits on an idle device, e.g. a
    // downstream group held back by its classical feed.
    Seconds wake = std::numeric_limits<Seconds>::infinity();
    for (const auto& p : plan.placements) {
      if (!busy_until_.contains(p.device) && p.start > now + kStartSlack) {
        wake = std::min(wake, p.start);
      }
    }
    if (wake < std::numeric_limits<Seconds>::infinity() && wakeups_.insert(wake).second) {
      push({wake, EventKind::WindowDispatch, 0, 0, 0});
    }
  }

  void erase_pending(const std::string& id) {
    auto it = std::find_if(pending_.begin(), pending_.end(),
                           [&](std::size_t i) { return jobs_[i].id == id; });
    if (it != pending_.end()) {
      pending_.erase(it);
    }
  }

  const std::vector<Job>& jobs_;
  const Fleet& fleet_;
  const SchedulerConfig& config_;

  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_placement_ = 0;
  std::deque<std::size_t> pending_;
  std::map<std::string, InFlight> in_flight_;
  std::map<std::string, Seconds> busy_until_;
  std::set<Seconds> wakeups_;
  CutCache cache_;
  SimResult result_;
};

} // namespace

SimResult simulate(const std::vector<Job>& workload, const Fleet& fleet,
                   const SchedulerConfig& config) {
  validate(config);
  validate(fleet);
  std::set<std::string> ids;
  for (const auto& job : workload) {
    validate(job);
    if (job.is_sub_job()) {
      throw ValidationError("workload job " + job.id + " is already a sub-job");
    }
    if (!ids.insert(job.id).second) {
      throw ValidationError("duplicate job id " + job.id);
    }
  }
  return Simulation(workload, fleet, config).run();
}

double time_weighted_queue_length(const Trace& trace) {
  Seconds horizon = 0.0;
  std::map<std::string, Seconds> arrival;
  std::map<std::string, Seconds> left;
  for (const auto& rec : trace) {
    horizon = std::max(horizon, rec.time);
    switch (rec.kind) {
    case TraceKind::Arrival:
      arrival.emplace(rec.job, rec.time);
      break;
    case TraceKind::GroupStart:
      horizon = std::max(horizon, rec.finish);
      for (const auto& m : rec.members) {
        left.emplace(m.root_id, rec.time);
      }
      break;
    case TraceKind::Drop:
      left.emplace(rec.job, rec.time);
      break;
    default:
      break;
    }
  }
  if (!(horizon > 0.0)) {
    return 0.0;
  }
  double area = 0.0;
  for (const auto& [id, t_in] : arrival) {
    auto it = left.find(id);
    const Seconds t_out = it == left.end() ? horizon : it->second;
    area += std::max(0.0, t_out - t_in);
  }
  return area / horizon;
}

Metrics compute_metrics(const Trace& trace) {
  struct Span {
    Seconds first = std::numeric_limits<Seconds>::infinity();
    Seconds last = 0.0;
  };
  Metrics out;
  std::map<std::string, Seconds> arrival;
  std::map<std::string, Span> spans;
  std::set<std::string> dropped;
  std::map<std::string, std::vector<std::string>> last_members;
  // root -> fragment -> (LPST sum, variant count)
  std::map<std::string, std::map<std::string, std::pair<double, std::int64_t>>> fragments;

  for (const auto& rec : trace) {
    switch (rec.kind) {
    case TraceKind::Arrival:
      arrival.emplace(rec.job, rec.time);
      break;
    case TraceKind::Drop:
      dropped.insert(rec.job);
      break;
    case TraceKind::GroupStart: {
      std::vector<std::string> ids;
      for (const auto& m : rec.members) {
        auto& span = spans[m.root_id];
        span.first = std::min(span.first, rec.time);
        span.last = std::max(span.last, rec.finish);
        auto& frag = fragments[m.root_id][m.fragment];
        frag.first += m.lpst;
        ++frag.second;
        ids.push_back(m.id);
      }
      std::sort(ids.begin(), ids.end());
      auto [it, fresh] = last_members.try_emplace(rec.device, ids);
      if (fresh || it->second != ids) {
        ++out.workload_changes;
        it->second = std::move(ids);
      }
      out.makespan = std::max(out.makespan, rec.finish);
      break;
    }
    default:
      break;
    }
  }

  double wait_sum = 0.0;
  double run_sum = 0.0;
  double total_sum = 0.0;
  double lpst_sum = 0.0;
  std::int64_t n = 0;
  for (const auto& [id, t_arrive] : arrival) {
    auto it = spans.find(id);
    if (dropped.contains(id) || it == spans.end()) {
      continue;
    }
    const Seconds wait = it->second.first - t_arrive;
    const Seconds run = it->second.last - it->second.first;
    wait_sum += wait;
    run_sum += run;
    total_sum += wait + run;
    for (const auto& [frag, acc] : fragments[id]) {
      lpst_sum += acc.first / static_cast<double>(acc.second);
    }
    ++n;
  }
  if (n > 0) {
    out.t_wait = wait_sum / static_cast<double>(n);
    out.t_run = run_sum / static_cast<double>(n);
    out.t_total = total_sum / static_cast<double>(n);
    out.mean_lpst = lpst_sum / static_cast<double>(n);
  }
  out.avg_queue_length = time_weighted_queue_length(trace);
  return out;
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<TraceKind> parse_trace_kind(std::string_view text) {
  for (auto k : {TraceKind::Arrival, TraceKind::GroupStart, TraceKind::GroupFinish,
                 TraceKind::Precedence, TraceKind::Drop}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  return std::nullopt;
}

std::optional<ModeTag> parse_mode_tag(std::string_view text) {
  for (auto t : {ModeTag::Plain, ModeTag::UpstreamGroup, ModeTag::DownstreamGroup}) {
    if (to_string(t) == text) {
      return t;
    }
  }
  return std::nullopt;
}

// JSON has no infinities; LPST of a certain-failure run is written as null.
json lpst_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

std::string serialize_trace(const Trace& trace) {
  std::string out;
  for (const auto& rec : trace) {
    ordered_json j;
    j["kind"] = to_string(rec.kind);
    j["t"] = rec.time;
    switch (rec.kind) {
    case TraceKind::Arrival:
      j["job"] = rec.job;
      break;
    case TraceKind::GroupStart: {
      j["placement"] = rec.placement;
      j["device"] = rec.device;
      j["finish"] = rec.finish;
      j["mode_tag"] = to_string(rec.mode_tag);
      ordered_json members = ordered_json::array();
      for (const auto& m : rec.members) {
        ordered_json mj;
        mj["id"] = m.id;
        mj["root"] = m.root_id;
        mj["fragment"] = m.fragment;
        mj["stage"] = to_string(m.stage);
        mj["cut_index"] = m.cut_index ? json(*m.cut_index) : json(nullptr);
        mj["n_cut"] = m.n_cut;
        mj["shots"] = m.shots;
        mj["qubits"] = m.qubits;
        mj["lpst"] = lpst_to_json(m.lpst);
        members.push_back(std::move(mj));
      }
      j["members"] = std::move(members);
      break;
    }
    case TraceKind::GroupFinish:
      j["placement"] = rec.placement;
      j["device"] = rec.device;
      break;
    case TraceKind::Precedence:
      j["placement"] = rec.placement;
      j["upstream"] = rec.upstream;
      j["delay"] = rec.delay;
      break;
    case TraceKind::Drop:
      j["job"] = rec.job;
      j["reason"] = rec.reason;
      break;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

Trace parse_trace(std::string_view text) {
  Trace trace;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      const json j = json::parse(line);
      TraceRecord rec;
      auto kind = parse_trace_kind(j.at("kind").get<std::string>());
      if (!kind) {
        throw ParseError(where + "field 'kind': unknown record kind");
      }
      rec.kind = *kind;
      rec.time = j.at("t").get<double>();
      switch (rec.kind) {
      case TraceKind::Arrival:
        rec.job = j.at("job").get<std::string>();
        break;
      case TraceKind::GroupStart: {
        rec.placement = j.at("placement").get<std::uint64_t>();
        rec.device = j.at("device").get<std::string>();
        rec.finish = j.at("finish").get<double>();
        auto tag = parse_mode_tag(j.at("mode_tag").get<std::string>());
        if (!tag) {
          throw ParseError(where + "field 'mode_tag': unknown tag");
        }
        rec.mode_tag = *tag;
        for (const auto& mj : j.at("members")) {
          TraceMember m;
          m.id = mj.at("id").get<std::string>();
          m.root_id = mj.at("root").get<std::string>();
          m.fragment = mj.at("fragment").get<std::string>();
          auto stage = parse_stage(mj.at("stage").get<std::string>());
          if (!stage) {
            throw ParseError(where + "field 'stage': unknown stage");
          }
          m.stage = *stage;
          if (const auto& ci = mj.at("cut_index"); !ci.is_null()) {
            m.cut_index = ci.get<int>();
          }
          m.n_cut = mj.at("n_cut").get<int>();
          m.shots = mj.at("shots").get<std::int64_t>();
          m.qubits = mj.at("qubits").get<int>();
          const auto& l = mj.at("lpst");
          m.lpst = l.is_null() ? -std::numeric_limits<double>::infinity() : l.get<double>();
          rec.members.push_back(std::move(m));
        }
        break;
      }
      case TraceKind::GroupFinish:
        rec.placement = j.at("placement").get<std::uint64_t>();
        rec.device = j.at("device").get<std::string>();
        break;
      case TraceKind::Precedence:
        rec.placement = j.at("placement").get<std::uint64_t>();
        rec.upstream = j.at("upstream").get<std::uint64_t>();
        rec.delay = j.at("delay").get<double>();
        break;
      case TraceKind::Drop:
        rec.job = j.at("job").get<std::string>();
        rec.reason = j.at("reason").get<std::string>();
        break;
      }
      trace.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw ParseError(where + e.what());
    }
  }
  return trace;
}

} // namespace cutsched
