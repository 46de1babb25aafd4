#include "cutsched/fleet.hpp"

#include "cutsched/errors.hpp"
#include "cutsched/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

namespace cutsched {

using nlohmann::json;
using nlohmann::ordered_json;

int Fleet::max_capacity() const {
  int best = 0;
  for (const auto& d : devices) {
    best = std::max(best, d.num_qubits);
  }
  return best;
}

const Device& Fleet::reference_device() const {
  if (devices.empty()) {
    throw ValidationError("fleet must contain at least one device");
  }
  const Device* best = &devices.front();
  for (const auto& d : devices) {
    if (d.num_qubits > best->num_qubits ||
        (d.num_qubits == best->num_qubits && d.name < best->name)) {
      best = &d;
    }
  }
  return *best;
}

const Device* Fleet::find(std::string_view name) const {
  for (const auto& d : devices) {
    if (d.name == name) {
      return &d;
    }
  }
  return nullptr;
}

namespace {

bool is_rate(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace

void validate(const Fleet& fleet) {
  if (fleet.devices.empty()) {
    throw ValidationError("fleet must contain at least one device");
  }
  std::set<std::string> names;
  for (const auto& d : fleet.devices) {
    if (d.name.empty()) {
      throw ValidationError("device name must not be empty");
    }
    if (!names.insert(d.name).second) {
      throw ValidationError("duplicate device name '" + d.name + "'");
    }
    if (d.num_qubits < 1) {
      throw ValidationError("device " + d.name + ": num_qubits must be positive");
    }
    if (!is_rate(d.err_1q) || !is_rate(d.err_2q) || !is_rate(d.err_readout)) {
      throw ValidationError("device " + d.name + ": error rates must lie in [0, 1]");
    }
    if (!(d.t_1q > 0) || !(d.t_2q > 0) || !(d.t_readout > 0) || !(d.tau_link > 0)) {
      throw ValidationError("device " + d.name + ": gate, readout and link times must be positive");
    }
    if (!(d.t_load >= 0) || !(d.gamma_proc >= 0)) {
      throw ValidationError("device " + d.name + ": t_load and gamma_proc must be non-negative");
    }
  }
}

Fleet default_fleet() {
  // Synthetic calibration figures; they follow the ranges of current
  // superconducting modules but are not a snapshot of real hardware.
  auto dev = [](std::string name, int qubits, double e1, double e2, double ero,
                Seconds t2q) {
    Device d;
    d.name = std::move(name);
    d.num_qubits = qubits;
    d.err_1q = e1;
    d.err_2q = e2;
    d.err_readout = ero;
    d.t_1q = 35e-9;
    d.t_2q = t2q;
    d.t_readout = 4e-6;
    d.t_load = 0.25;
    d.tau_link = 1e-6;
    d.gamma_proc = 0.01;
    return d;
  };
  Fleet fleet;
  fleet.devices = {
      dev("mod127-a", 127, 2.4e-4, 7.4e-3, 1.3e-2, 5.3e-7),
      dev("mod127-b", 127, 2.7e-4, 8.1e-3, 1.5e-2, 5.6e-7),
      dev("mod65-a", 65, 3.9e-4, 1.18e-2, 2.4e-2, 4.8e-7),
      dev("mod65-b", 65, 4.3e-4, 1.32e-2, 2.7e-2, 5.1e-7),
      dev("mod53", 53, 5.1e-4, 1.45e-2, 3.1e-2, 4.4e-7),
      dev("mod33-a", 33, 3.6e-4, 1.05e-2, 2.2e-2, 4.0e-7),
      dev("mod33-b", 33, 4.6e-4, 1.26e-2, 2.6e-2, 4.2e-7),
      dev("mod27-a", 27, 3.1e-4, 9.6e-3, 1.9e-2, 3.8e-7),
      dev("mod27-b", 27, 3.4e-4, 1.07e-2, 2.3e-2, 3.9e-7),
      dev("mod27-c", 27, 4.9e-4, 1.38e-2, 2.9e-2, 4.1e-7),
      dev("mod27-d", 27, 5.6e-4, 1.52e-2, 3.4e-2, 4.3e-7),
  };
  return fleet;
}

namespace {

constexpr std::string_view kFleetFormat = "cutsched.fleet";

ordered_json device_to_json(const Device& d) {
  ordered_json rec;
  rec["name"] = d.name;
  rec["num_qubits"] = d.num_qubits;
  rec["err_1q"] = d.err_1q;
  rec["err_2q"] = d.err_2q;
  rec["err_readout"] = d.err_readout;
  rec["t_1q"] = d.t_1q;
  rec["t_2q"] = d.t_2q;
  rec["t_readout"] = d.t_readout;
  rec["t_load"] = d.t_load;
  rec["tau_link"] = d.tau_link;
  rec["gamma_proc"] = d.gamma_proc;
  return rec;
}

double number_field(const json& rec, const char* field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || !it->is_number()) {
    throw ParseError("line " + std::to_string(line) + ": field '" + field +
                     "': expected number");
  }
  return it->get<double>();
}

} // namespace

std::string serialize_fleet(const Fleet& fleet) {
  ordered_json header;
  header["format"] = kFleetFormat;
  header["version"] = kFleetFormatVersion;
  header["note"] = "synthetic calibration values";
  std::string out = header.dump() + "\n";
  for (const auto& d : fleet.devices) {
    out += device_to_json(d).dump();
    out += '\n';
  }
  return out;
}

Fleet parse_fleet(std::string_view text) {
  Fleet fleet;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    }
    if (!rec.is_object()) {
      throw ParseError("line " + std::to_string(line_no) + ": record must be an object");
    }
    if (!have_header) {
      if (!rec.contains("format") || rec["format"] != kFleetFormat) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": field 'format': expected fleet header");
      }
      if (!rec.contains("version") || !rec["version"].is_number_integer() ||
          rec["version"].get<int>() != kFleetFormatVersion) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": field 'version': unsupported fleet version");
      }
      have_header = true;
      continue;
    }
    Device d;
    auto name = rec.find("name");
    if (name == rec.end() || !name->is_string()) {
      throw ParseError("line " + std::to_string(line_no) + ": field 'name': expected string");
    }
    d.name = name->get<std::string>();
    auto qubits = rec.find("num_qubits");
    if (qubits == rec.end() || !qubits->is_number_integer()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": field 'num_qubits': expected integer");
    }
    d.num_qubits = qubits->get<int>();
    d.err_1q = number_field(rec, "err_1q", line_no);
    d.err_2q = number_field(rec, "err_2q", line_no);
    d.err_readout = number_field(rec, "err_readout", line_no);
    d.t_1q = number_field(rec, "t_1q", line_no);
    d.t_2q = number_field(rec, "t_2q", line_no);
    d.t_readout = number_field(rec, "t_readout", line_no);
    d.t_load = number_field(rec, "t_load", line_no);
    d.tau_link = number_field(rec, "tau_link", line_no);
    d.gamma_proc = number_field(rec, "gamma_proc", line_no);
    fleet.devices.push_back(std::move(d));
  }
  validate(fleet);
  return fleet;
}

void save_fleet(const Fleet& fleet, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_fleet(fleet));
}

Fleet load_fleet(const std::filesystem::path& path) {
  return parse_fleet(read_file(path));
}

Seconds runtime_estimate(const Job& job, const Device& device) {
  if (job.qubits() > device.num_qubits) {
    throw CapacityError("job " + job.id + " needs " + std::to_string(job.qubits()) +
                        " qubits but " + device.name + " has " +
                        std::to_string(device.num_qubits));
  }
  const double per_shot = job.circuit.depth * device.t_2q + device.t_readout;
  return static_cast<double>(job.shots) * per_shot + device.t_load;
}

namespace {

double survival_term(std::int64_t count, double error) {
  if (count == 0) {
    return 0.0;
  }
  if (error >= 1.0) {
    return -std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(count) * std::log1p(-error);
}

} // namespace

double lpst(std::int64_t two_q_gates, std::int64_t one_q_gates, int qubits,
            const Device& device) {
  return survival_term(two_q_gates, device.err_2q) +
         survival_term(one_q_gates, device.err_1q) +
         survival_term(qubits, device.err_readout);
}

double lpst(const Circuit& circuit, const Device& device) {
  return lpst(circuit.two_q_gates(), circuit.one_q_gates, circuit.num_qubits, device);
}

double lpst(const Job& job, const Device& device) {
  return lpst(job.circuit, device);
}

} // namespace cutsched
