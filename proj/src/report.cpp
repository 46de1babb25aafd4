#include "cutsched/report.hpp"

#include "cutsched/errors.hpp"
#include "cutsched/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace cutsched {

using nlohmann::ordered_json;

namespace {

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

} // namespace

std::string schedule_report_json(const PlanResult& plan, CutMode mode) {
  ordered_json out;
  out["format"] = "cutsched.schedule";
  out["version"] = 1;
  out["mode"] = to_string(mode);
  out["makespan"] = plan.schedule.makespan;
  out["outer_iterations"] = plan.outer_iterations;
  out["iteration_makespans"] = plan.iteration_makespans;

  ordered_json placements = ordered_json::array();
  for (const auto& p : plan.schedule.placements) {
    ordered_json pj;
    pj["id"] = p.id;
    pj["device"] = p.device;
    pj["start"] = p.start;
    pj["finish"] = p.finish;
    pj["mode_tag"] = to_string(p.mode_tag);
    pj["qubit_demand"] = p.group.qubit_demand;
    ordered_json members = ordered_json::array();
    for (const auto& m : p.group.members) {
      ordered_json mj;
      mj["id"] = m.id;
      mj["root"] = m.root_id();
      mj["stage"] = to_string(m.stage);
      mj["qubits"] = m.qubits();
      mj["shots"] = m.shots;
      members.push_back(std::move(mj));
    }
    pj["members"] = std::move(members);
    placements.push_back(std::move(pj));
  }
  out["placements"] = std::move(placements);

  ordered_json edges = ordered_json::array();
  for (const auto& e : plan.schedule.precedence) {
    ordered_json ej;
    ej["upstream"] = e.upstream;
    ej["downstream"] = e.downstream;
    ej["delay"] = e.delay;
    edges.push_back(std::move(ej));
  }
  out["precedence"] = std::move(edges);

  ordered_json cuts = ordered_json::array();
  for (const auto& c : plan.cuts) {
    ordered_json cj;
    cj["parent"] = c.parent_id;
    cj["mode"] = to_string(c.mode);
    cj["n_cut"] = c.n_cut;
    cj["overhead"] = c.overhead;
    cj["sub_jobs"] = c.sub_job_count();
    cj["ancilla_per_side"] = c.ancilla_per_side;
    cj["part_a"] = c.part_a;
    cj["part_b"] = c.part_b;
    cuts.push_back(std::move(cj));
  }
  out["cuts"] = std::move(cuts);
  out["adaptive_cuts"] = plan.adaptive_cuts;
  return out.dump(2) + "\n";
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "Mode,Length,T_wait,T_run,T_total,LPST,WorkloadChanges\n";
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    out += r.mode + ',' + format_double(m.avg_queue_length) + ',' + format_double(m.t_wait) +
           ',' + format_double(m.t_run) + ',' + format_double(m.t_total) + ',' +
           format_double(m.mean_lpst) + ',' + std::to_string(m.workload_changes) + '\n';
  }
  return out;
}

namespace {

double parse_double_field(std::string_view text, std::size_t line, const char* field) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ParseError("line " + std::to_string(line) + ": field '" + field +
                     "': expected number");
  }
  return v;
}

} // namespace

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  std::vector<MetricsRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  static const char* kFields[] = {"Mode", "Length", "T_wait", "T_run",
                                  "T_total", "LPST", "WorkloadChanges"};
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (cells.size() != 7) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 7 columns");
    }
    MetricsRow r;
    r.mode = cells[0];
    r.metrics.avg_queue_length = parse_double_field(cells[1], line_no, kFields[1]);
    r.metrics.t_wait = parse_double_field(cells[2], line_no, kFields[2]);
    r.metrics.t_run = parse_double_field(cells[3], line_no, kFields[3]);
    r.metrics.t_total = parse_double_field(cells[4], line_no, kFields[4]);
    r.metrics.mean_lpst = parse_double_field(cells[5], line_no, kFields[5]);
    std::int64_t changes = 0;
    auto [end, ec] = std::from_chars(cells[6].data(), cells[6].data() + cells[6].size(), changes);
    if (ec != std::errc{} || end != cells[6].data() + cells[6].size()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": field 'WorkloadChanges': expected integer");
    }
    r.metrics.workload_changes = changes;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string metrics_json(const std::vector<MetricsRow>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j;
    j["mode"] = r.mode;
    j["avg_queue_length"] = r.metrics.avg_queue_length;
    j["t_wait"] = r.metrics.t_wait;
    j["t_run"] = r.metrics.t_run;
    j["t_total"] = r.metrics.t_total;
    j["mean_lpst"] = number_or_null(r.metrics.mean_lpst);
    j["workload_changes"] = r.metrics.workload_changes;
    j["makespan"] = r.metrics.makespan;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

namespace {

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261U;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619U;
  }
  return h;
}

std::string job_color(std::string_view root) {
  const auto h = fnv1a(root);
  return "hsl(" + std::to_string(h % 360) + "," + std::to_string(55 + (h >> 9) % 30) + "%," +
         std::to_string(45 + (h >> 17) % 20) + "%)";
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << v;
  std::string out = s.str();
  out.erase(out.find_last_not_of('0') + 1);
  if (out.back() == '.') {
    out.pop_back();
  }
  return out;
}

} // namespace

std::string gantt_svg(const Schedule& schedule, const Fleet& fleet, std::string_view title) {
  constexpr double kLabel = 110.0;
  constexpr double kPlot = 900.0;
  constexpr double kLane = 28.0;
  constexpr double kTop = 40.0;
  const double span = std::max(makespan(schedule), 1e-9);
  const double height = kTop + kLane * static_cast<double>(fleet.devices.size()) + 30.0;
  const double width = kLabel + kPlot + 20.0;

  std::map<std::string, std::size_t> lane;
  for (std::size_t i = 0; i < fleet.devices.size(); ++i) {
    lane.emplace(fleet.devices[i].name, i);
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<title>" << escape_xml(title) << "</title>\n";
  svg << "<text x=\"" << fmt(kLabel) << "\" y=\"20\" font-size=\"13\">" << escape_xml(title)
      << " (makespan " << fmt(schedule.makespan) << " s)</text>\n";
  for (const auto& [name, i] : lane) {
    const double y = kTop + kLane * static_cast<double>(i);
    svg << "<text x=\"4\" y=\"" << fmt(y + kLane * 0.65) << "\">" << escape_xml(name)
        << "</text>\n";
    svg << "<line x1=\"" << fmt(kLabel) << "\" y1=\"" << fmt(y + kLane) << "\" x2=\""
        << fmt(kLabel + kPlot) << "\" y2=\"" << fmt(y + kLane)
        << "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }

  for (const auto& p : schedule.placements) {
    auto it = lane.find(p.device);
    if (it == lane.end()) {
      throw ValidationError("gantt: placement on unknown device " + p.device);
    }
    const double y = kTop + kLane * static_cast<double>(it->second) + 3.0;
    const double h = kLane - 6.0;
    const double x0 = kLabel + kPlot * p.start / span;
    const double x1 = kLabel + kPlot * p.finish / span;
    const std::string first_root =
        p.group.members.empty() ? std::string() : p.group.members.front().root_id();
    svg << "<g>\n";
    svg << "<rect class=\"bar\" data-device=\"" << escape_xml(p.device) << "\" data-start=\""
        << format_double(p.start) << "\" data-finish=\"" << format_double(p.finish)
        << "\" x=\"" << fmt(x0) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(x1 - x0)
        << "\" height=\"" << fmt(h) << "\" fill=\"" << job_color(first_root)
        << "\" stroke=\"black\" stroke-width=\"0.4\"/>\n";
    const double stripe = h / static_cast<double>(std::max<std::size_t>(1, p.group.members.size()));
    std::string tip;
    for (std::size_t k = 0; k < p.group.members.size(); ++k) {
      const Job& m = p.group.members[k];
      svg << "<rect class=\"member\" x=\"" << fmt(x0) << "\" y=\""
          << fmt(y + stripe * static_cast<double>(k)) << "\" width=\"" << fmt(x1 - x0)
          << "\" height=\"" << fmt(stripe) << "\" fill=\"" << job_color(m.root_id())
          << "\"/>\n";
      tip += (k ? ", " : "") + m.id;
    }
    svg << "<title>" << escape_xml(p.device) << " [" << fmt(p.start) << ", " << fmt(p.finish)
        << "] " << escape_xml(tip) << "</title>\n";
    svg << "</g>\n";
  }
  svg << "<text x=\"" << fmt(kLabel) << "\" y=\"" << fmt(height - 8.0)
      << "\">0 s</text>\n<text x=\"" << fmt(kLabel + kPlot - 60.0) << "\" y=\""
      << fmt(height - 8.0) << "\">" << fmt(span) << " s</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

Schedule schedule_from_trace(const Trace& trace) {
  Schedule s;
  for (const auto& rec : trace) {
    if (rec.kind == TraceKind::GroupStart) {
      Placement p;
      p.id = rec.placement;
      p.device = rec.device;
      p.start = rec.time;
      p.finish = rec.finish;
      p.mode_tag = rec.mode_tag;
      for (const auto& m : rec.members) {
        Job j;
        j.id = m.id;
        j.circuit.id = m.id;
        j.circuit.num_qubits = m.qubits;
        j.shots = m.shots;
        j.stage = m.stage;
        j.cut_index = m.cut_index;
        j.n_cut = m.n_cut;
        if (m.root_id != m.id) {
          j.parent_id = m.root_id;
        }
        p.group.members.push_back(std::move(j));
        p.group.qubit_demand += m.qubits;
      }
      s.placements.push_back(std::move(p));
    } else if (rec.kind == TraceKind::Precedence) {
      s.precedence.push_back({rec.upstream, rec.placement, rec.delay});
    }
  }
  s.makespan = makespan(s);
  return s;
}

} // namespace cutsched
