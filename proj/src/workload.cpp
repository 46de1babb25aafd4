#include "cutsched/workload.hpp"

#include "cutsched/errors.hpp"
#include "cutsched/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace cutsched {

using nlohmann::json;
using nlohmann::ordered_json;

std::int64_t Circuit::two_q_gates() const {
  std::int64_t total = 0;
  for (const auto& e : coupling) {
    total += e.weight;
  }
  return total;
}

std::vector<CouplingEdge> canonical_coupling(std::vector<CouplingEdge> edges) {
  std::map<std::pair<int, int>, int> merged;
  for (const auto& e : edges) {
    if (e.a == e.b || e.weight <= 0) {
      continue;
    }
    merged[{std::min(e.a, e.b), std::max(e.a, e.b)}] += e.weight;
  }
  std::vector<CouplingEdge> out;
  out.reserve(merged.size());
  for (const auto& [pair, weight] : merged) {
    out.push_back({pair.first, pair.second, weight});
  }
  return out;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
  case Stage::Flat:
    return "flat";
  case Stage::Upstream:
    return "upstream";
  case Stage::Downstream:
    return "downstream";
  }
  return "flat";
}

std::optional<Stage> parse_stage(std::string_view text) {
  if (text == "flat") {
    return Stage::Flat;
  }
  if (text == "upstream") {
    return Stage::Upstream;
  }
  if (text == "downstream") {
    return Stage::Downstream;
  }
  return std::nullopt;
}

std::string_view to_string(WorkloadClass cls) {
  switch (cls) {
  case WorkloadClass::Small:
    return "small";
  case WorkloadClass::LargeMandatory:
    return "large";
  case WorkloadClass::RandomHeterogeneous:
    return "random";
  }
  return "small";
}

std::optional<WorkloadClass> parse_workload_class(std::string_view text) {
  if (text == "small") {
    return WorkloadClass::Small;
  }
  if (text == "large") {
    return WorkloadClass::LargeMandatory;
  }
  if (text == "random") {
    return WorkloadClass::RandomHeterogeneous;
  }
  return std::nullopt;
}

void validate(const Circuit& circuit) {
  if (circuit.num_qubits < 1) {
    throw ValidationError("circuit " + circuit.id + ": num_qubits must be >= 1");
  }
  if (circuit.depth < 1) {
    throw ValidationError("circuit " + circuit.id + ": depth must be >= 1");
  }
  if (circuit.one_q_gates < 0) {
    throw ValidationError("circuit " + circuit.id +
                          ": one_q_gates must be non-negative");
  }
  for (const auto& e : circuit.coupling) {
    if (e.a < 0 || e.b < 0 || e.a >= circuit.num_qubits ||
        e.b >= circuit.num_qubits) {
      throw ValidationError("circuit " + circuit.id +
                            ": coupling qubit index out of range");
    }
    if (e.a == e.b) {
      throw ValidationError("circuit " + circuit.id + ": coupling self loop");
    }
    if (e.weight < 1) {
      throw ValidationError("circuit " + circuit.id +
                            ": coupling weight must be positive");
    }
  }
}

void validate(const Job& job) {
  if (job.id.empty()) {
    throw ValidationError("job id must not be empty");
  }
  if (job.shots < 1) {
    throw ValidationError("job " + job.id + ": shots must be positive");
  }
  if (!(job.arrival_time >= 0.0) || !std::isfinite(job.arrival_time)) {
    throw ValidationError("job " + job.id +
                          ": arrival_time must be finite and non-negative");
  }
  if (job.n_cut < 0) {
    throw ValidationError("job " + job.id + ": n_cut must be non-negative");
  }
  // LO fragments keep stage Flat while carrying a parent, so only the
  // direction stage != Flat => parent holds.
  if (job.stage != Stage::Flat && !job.parent_id) {
    throw ValidationError("job " + job.id + ": stage " +
                          std::string(to_string(job.stage)) +
                          " requires parent_id");
  }
  if (job.parent_id.has_value() != job.cut_index.has_value()) {
    throw ValidationError("job " + job.id +
                          ": parent_id and cut_index must be set together");
  }
  if (job.cut_index && *job.cut_index < 0) {
    throw ValidationError("job " + job.id + ": cut_index must be non-negative");
  }
  if (job.stage != Stage::Flat && job.n_cut < 1) {
    throw ValidationError("job " + job.id +
                          ": upstream/downstream sub-jobs need n_cut >= 1");
  }
  if (!job.parent_id && job.n_cut != 0) {
    throw ValidationError("job " + job.id + ": uncut job must have n_cut = 0");
  }
  validate(job.circuit);
}

WorkloadSpec WorkloadSpec::defaults(WorkloadClass cls) {
  WorkloadSpec spec;
  spec.cls = cls;
  switch (cls) {
  case WorkloadClass::Small:
    spec.count = 50;
    spec.arrival_rate = 50.0;
    spec.width_range = {2, 40};
    spec.depth_range = {5, 50};
    spec.large_fraction = 0.0;
    break;
  case WorkloadClass::LargeMandatory:
    spec.count = 30;
    spec.arrival_rate = 5.0;
    spec.width_range = {5, 40};
    spec.depth_range = {10, 60};
    spec.large_fraction = 0.1;
    spec.large_width_range = {128, 150};
    break;
  case WorkloadClass::RandomHeterogeneous:
    spec.count = 158;
    spec.arrival_rate = 1.0;
    spec.width_range = {5, 160};
    spec.depth_range = {10, 200};
    spec.large_fraction = 0.2;
    spec.large_width_range = {128, 160};
    break;
  }
  return spec;
}

void validate(const WorkloadSpec& spec) {
  if (spec.count < 0) {
    throw ValidationError("workload count must be non-negative");
  }
  if (!(spec.arrival_rate > 0.0) || !std::isfinite(spec.arrival_rate)) {
    throw ValidationError("arrival_rate must be positive");
  }
  if (spec.width_range.empty() || spec.width_range.lo < 1) {
    throw ValidationError("width_range must be a non-empty range of positive widths");
  }
  if (spec.depth_range.empty() || spec.depth_range.lo < 1) {
    throw ValidationError("depth_range must be a non-empty range of positive depths");
  }
  if (!(spec.large_fraction >= 0.0 && spec.large_fraction <= 1.0)) {
    throw ValidationError("large_fraction must lie in [0, 1]");
  }
  if (spec.cls == WorkloadClass::Small && spec.large_fraction != 0.0) {
    throw ValidationError("large_fraction must be 0 for the small class");
  }
  if (spec.large_fraction > 0.0) {
    const int lo = std::max(spec.large_width_range.lo, spec.capacity_threshold + 1);
    if (spec.large_width_range.hi < lo) {
      throw ValidationError("large_width_range must contain widths above capacity_threshold");
    }
  }
  if (spec.large_fraction < 1.0 && spec.width_range.lo > spec.capacity_threshold) {
    throw ValidationError("width_range must contain widths up to capacity_threshold");
  }
  if (spec.circuit.block_size < 2) {
    throw ValidationError("circuit block_size must be >= 2");
  }
  if (!(spec.circuit.long_range_fraction >= 0.0 &&
        spec.circuit.long_range_fraction <= 1.0)) {
    throw ValidationError("long_range_fraction must lie in [0, 1]");
  }
}

std::int64_t shots_for_volume(int width, int depth, std::int64_t base,
                              double factor) {
  const std::int64_t volume =
      std::max<std::int64_t>(static_cast<std::int64_t>(width) * depth, 1);
  // Integer decade count avoids log10 rounding at exact powers of ten.
  int decade = 0;
  for (std::int64_t v = volume; v >= 10; v /= 10) {
    ++decade;
  }
  return std::llround(static_cast<double>(base) * std::pow(factor, decade));
}

Circuit gen_random_circuit(int width, int depth, std::mt19937_64& rng,
                           const CircuitGenParams& params, std::string id) {
  Circuit c;
  c.id = std::move(id);
  c.num_qubits = std::max(width, 1);
  c.depth = std::max(depth, 1);
  const int n = c.num_qubits;
  const int block = std::max(params.block_size, 2);
  auto block_of = [block](int q) { return q / block; };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::map<std::pair<int, int>, int> weights;
  std::vector<char> busy(static_cast<std::size_t>(n));

  for (int layer = 0; layer < c.depth; ++layer) {
    std::fill(busy.begin(), busy.end(), 0);
    for (int i = layer % 2; i + 1 < n; i += 2) {
      if (block_of(i) != block_of(i + 1)) {
        continue;
      }
      int a = i;
      int b = i + 1;
      const int lo = block_of(i) * block;
      const int hi = std::min(lo + block, n) - 1;
      // Needs four qubits so every qubit has a partner two or more away.
      if (hi - lo >= 3 && unit(rng) < params.long_range_fraction) {
        std::uniform_int_distribution<int> pick(lo, hi);
        a = pick(rng);
        do {
          b = pick(rng);
        } while (std::abs(a - b) < 2);
      }
      ++weights[{std::min(a, b), std::max(a, b)}];
      busy[static_cast<std::size_t>(i)] = 1;
      busy[static_cast<std::size_t>(i + 1)] = 1;
    }
    for (int q = 0; q < n; ++q) {
      if (!busy[static_cast<std::size_t>(q)] && unit(rng) < 0.5) {
        ++c.one_q_gates;
      }
    }
  }
  // Connectivity: every adjacent in-block pair carries at least one gate and
  // every block boundary exactly one.
  for (int i = 0; i + 1 < n; ++i) {
    auto& w = weights[{i, i + 1}];
    if (block_of(i) != block_of(i + 1)) {
      w = 1;
    } else if (w == 0) {
      w = 1;
    }
  }
  for (const auto& [pair, weight] : weights) {
    c.coupling.push_back({pair.first, pair.second, weight});
  }
  return c;
}

namespace {

std::string job_name(int index, int count) {
  const int digits = std::max(4, static_cast<int>(std::to_string(count).size()));
  std::string num = std::to_string(index);
  return "j" + std::string(static_cast<std::size_t>(digits) - num.size(), '0') + num;
}

} // namespace

std::vector<Job> gen_workload(const WorkloadSpec& spec, const ShotRule& shots) {
  validate(spec);
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(spec.count));
  std::mt19937_64 rng(spec.seed);
  std::exponential_distribution<double> gap(spec.arrival_rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int small_hi = std::min(spec.width_range.hi, spec.capacity_threshold);
  const int large_lo = std::max(spec.large_width_range.lo, spec.capacity_threshold + 1);

  Seconds clock = 0.0;
  for (int i = 0; i < spec.count; ++i) {
    clock += gap(rng);
    const bool large = spec.large_fraction > 0.0 && unit(rng) < spec.large_fraction;
    std::uniform_int_distribution<int> width_dist =
        large ? std::uniform_int_distribution<int>(large_lo, spec.large_width_range.hi)
              : std::uniform_int_distribution<int>(spec.width_range.lo, small_hi);
    std::uniform_int_distribution<int> depth_dist(spec.depth_range.lo,
                                                  spec.depth_range.hi);
    const int width = width_dist(rng);
    const int depth = depth_dist(rng);

    Job job;
    job.id = job_name(i, spec.count);
    job.circuit = gen_random_circuit(width, depth, rng, spec.circuit, job.id);
    job.shots = shots_for_volume(width, depth, shots.base, shots.factor);
    job.arrival_time = clock;
    jobs.push_back(std::move(job));
  }
  return jobs;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::string_view kWorkloadFormat = "cutsched.workload";

ordered_json job_to_json(const Job& job) {
  ordered_json rec;
  rec["id"] = job.id;
  rec["num_qubits"] = job.circuit.num_qubits;
  rec["depth"] = job.circuit.depth;
  rec["one_q_gates"] = job.circuit.one_q_gates;
  auto coupling = ordered_json::array();
  for (const auto& e : job.circuit.coupling) {
    coupling.push_back({e.a, e.b, e.weight});
  }
  rec["coupling"] = std::move(coupling);
  rec["shots"] = job.shots;
  rec["arrival_time"] = job.arrival_time;
  rec["parent_id"] = job.parent_id ? ordered_json(*job.parent_id) : ordered_json(nullptr);
  rec["stage"] = to_string(job.stage);
  rec["cut_index"] = job.cut_index ? ordered_json(*job.cut_index) : ordered_json(nullptr);
  rec["n_cut"] = job.n_cut;
  return rec;
}

[[noreturn]] void fail(std::size_t line, std::string_view field,
                       const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": field '" << field << "': " << what;
  throw ParseError(msg.str());
}

const json& require(const json& rec, std::string_view field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end()) {
    fail(line, field, "missing");
  }
  return *it;
}

std::int64_t get_int(const json& rec, std::string_view field, std::size_t line) {
  const auto& v = require(rec, field, line);
  if (!v.is_number_integer()) {
    fail(line, field, "expected integer");
  }
  return v.get<std::int64_t>();
}

std::string get_string(const json& rec, std::string_view field, std::size_t line) {
  const auto& v = require(rec, field, line);
  if (!v.is_string()) {
    fail(line, field, "expected string");
  }
  return v.get<std::string>();
}

Job job_from_json(const json& rec, std::size_t line) {
  if (!rec.is_object()) {
    throw ParseError("line " + std::to_string(line) + ": record must be an object");
  }
  Job job;
  job.id = get_string(rec, "id", line);
  if (job.id.empty()) {
    fail(line, "id", "must not be empty");
  }
  const auto qubits = get_int(rec, "num_qubits", line);
  if (qubits < 1) {
    fail(line, "num_qubits", "num_qubits must be positive");
  }
  const auto depth = get_int(rec, "depth", line);
  if (depth < 1) {
    fail(line, "depth", "depth must be positive");
  }
  job.circuit.id = job.id;
  job.circuit.num_qubits = static_cast<int>(qubits);
  job.circuit.depth = static_cast<int>(depth);
  job.circuit.one_q_gates = get_int(rec, "one_q_gates", line);
  if (job.circuit.one_q_gates < 0) {
    fail(line, "one_q_gates", "one_q_gates must be non-negative");
  }

  const auto& coupling = require(rec, "coupling", line);
  if (!coupling.is_array()) {
    fail(line, "coupling", "expected array of [a, b, weight]");
  }
  for (const auto& e : coupling) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || !e[2].is_number_integer()) {
      fail(line, "coupling", "expected array of [a, b, weight]");
    }
    CouplingEdge edge{e[0].get<int>(), e[1].get<int>(), e[2].get<int>()};
    if (edge.a < 0 || edge.b < 0 || edge.a >= qubits || edge.b >= qubits) {
      fail(line, "coupling", "qubit index out of range");
    }
    if (edge.a == edge.b) {
      fail(line, "coupling", "self loop");
    }
    if (edge.weight < 1) {
      fail(line, "coupling", "weight must be positive");
    }
    job.circuit.coupling.push_back(edge);
  }
  job.circuit.coupling = canonical_coupling(std::move(job.circuit.coupling));

  job.shots = get_int(rec, "shots", line);
  if (job.shots < 1) {
    fail(line, "shots", "shots must be positive");
  }
  const auto& arrival = require(rec, "arrival_time", line);
  if (!arrival.is_number()) {
    fail(line, "arrival_time", "expected number");
  }
  job.arrival_time = arrival.get<double>();
  if (!(job.arrival_time >= 0.0) || !std::isfinite(job.arrival_time)) {
    fail(line, "arrival_time", "arrival_time must be finite and non-negative");
  }

  const auto& parent = require(rec, "parent_id", line);
  if (parent.is_string()) {
    job.parent_id = parent.get<std::string>();
  } else if (!parent.is_null()) {
    fail(line, "parent_id", "expected string or null");
  }
  const auto stage_text = get_string(rec, "stage", line);
  auto stage = parse_stage(stage_text);
  if (!stage) {
    fail(line, "stage", "unknown stage '" + stage_text + "'");
  }
  job.stage = *stage;
  const auto& cut_index = require(rec, "cut_index", line);
  if (cut_index.is_number_integer()) {
    job.cut_index = cut_index.get<int>();
  } else if (!cut_index.is_null()) {
    fail(line, "cut_index", "expected integer or null");
  }
  job.n_cut = static_cast<int>(get_int(rec, "n_cut", line));

  try {
    validate(job);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line) + ": " + e.what());
  }
  return job;
}

} // namespace

std::string serialize_workload(const std::vector<Job>& jobs) {
  std::string out;
  ordered_json header;
  header["format"] = kWorkloadFormat;
  header["version"] = kWorkloadFormatVersion;
  header["jobs"] = jobs.size();
  out += header.dump();
  out += '\n';
  for (const auto& job : jobs) {
    out += job_to_json(job).dump();
    out += '\n';
  }
  return out;
}

std::vector<Job> parse_workload(std::string_view text) {
  std::vector<Job> jobs;
  std::set<std::string> seen;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (nl == text.size()) {
        break;
      }
      continue;
    }
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed record: " +
                       e.what());
    }
    if (!have_header) {
      if (!rec.is_object() || !rec.contains("format") ||
          rec["format"] != kWorkloadFormat) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": field 'format': expected workload header");
      }
      if (!rec.contains("version") || !rec["version"].is_number_integer() ||
          rec["version"].get<int>() != kWorkloadFormatVersion) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": field 'version': unsupported workload version");
      }
      have_header = true;
      continue;
    }
    Job job = job_from_json(rec, line_no);
    if (!seen.insert(job.id).second) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": duplicate job id '" + job.id + "'");
    }
    jobs.push_back(std::move(job));
  }
  if (!have_header) {
    throw ParseError("line 1: field 'format': missing workload header");
  }
  return jobs;
}

void save_workload(const std::vector<Job>& jobs, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_workload(jobs));
}

std::vector<Job> load_workload(const std::filesystem::path& path) {
  return parse_workload(read_file(path));
}

} // namespace cutsched
