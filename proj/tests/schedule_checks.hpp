#pragma once

// Safety checks shared by the unit tests and the acceptance runner. They
// recompute delays from the fleet figures instead of trusting the edges.

#include "cutsched/fleet.hpp"
#include "cutsched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace cutsched::testing {

inline double expected_delay(const Job& down, const Device& from, const Device& to,
                             double beta) {
  const double n_sub = 2.0 * std::pow(4.0, down.n_cut);
  return down.n_cut * beta * from.tau_link * static_cast<double>(down.shots) +
         to.gamma_proc * n_sub;
}

/// Human-readable violations; empty when the schedule is safe.
inline std::vector<std::string> schedule_violations(const Schedule& s, const Fleet& fleet,
                                                    double beta = 2.0) {
  constexpr double eps = 1e-9;
  std::vector<std::string> out;
  std::map<std::string, std::vector<const Placement*>> by_device;
  // (parent, cut index) -> placements holding an upstream member.
  std::map<std::pair<std::string, int>, std::vector<const Placement*>> upstream;
  for (const auto& p : s.placements) {
    const Device* d = fleet.find(p.device);
    const std::string tag = "placement " + std::to_string(p.id);
    if (d == nullptr) {
      out.push_back(tag + " on unknown device " + p.device);
      continue;
    }
    if (p.group.members.empty()) {
      out.push_back(tag + " is empty");
    }
    if (!(p.finish > p.start)) {
      out.push_back(tag + " has non-positive duration");
    }
    int demand = 0;
    for (const auto& m : p.group.members) {
      demand += m.qubits();
      if (m.stage == Stage::Upstream) {
        auto& v = upstream[{*m.parent_id, m.cut_index.value_or(0)}];
        if (v.empty() || v.back() != &p) {
          v.push_back(&p);
        }
      }
      for (const auto& o : p.group.members) {
        if (m.parent_id && o.parent_id && *m.parent_id == *o.parent_id &&
            m.stage == Stage::Upstream && o.stage == Stage::Downstream) {
          out.push_back(tag + " mixes upstream and downstream of " + *m.parent_id);
        }
      }
    }
    if (demand > d->num_qubits) {
      out.push_back(tag + " needs " + std::to_string(demand) + " qubits on " + d->name);
    }
    by_device[p.device].push_back(&p);
  }
  for (auto& [name, ps] : by_device) {
    std::sort(ps.begin(), ps.end(),
              [](const Placement* a, const Placement* b) { return a->start < b->start; });
    for (std::size_t i = 1; i < ps.size(); ++i) {
      if (ps[i]->start < ps[i - 1]->finish - eps) {
        out.push_back("device " + name + ": placements " + std::to_string(ps[i - 1]->id) +
                      " and " + std::to_string(ps[i]->id) + " overlap");
      }
    }
  }
  for (const auto& p : s.placements) {
    const Device* to = fleet.find(p.device);
    if (to == nullptr) {
      continue;
    }
    for (const auto& m : p.group.members) {
      if (m.stage != Stage::Downstream) {
        continue;
      }
      const auto it = upstream.find({*m.parent_id, m.cut_index.value_or(0)});
      if (it == upstream.end()) {
        out.push_back("downstream " + m.id + " has no upstream placement");
        continue;
      }
      for (const Placement* u : it->second) {
        const double need = u->finish + expected_delay(m, *fleet.find(u->device), *to, beta);
        if (p.start < need - eps * std::max(1.0, need)) {
          out.push_back("downstream " + m.id + " starts at " + std::to_string(p.start) +
                        " before " + std::to_string(need));
        }
      }
    }
  }
  for (const auto& e : s.precedence) {
    const Placement* u = s.find(e.upstream);
    const Placement* dn = s.find(e.downstream);
    if (u == nullptr || dn == nullptr) {
      out.push_back("precedence edge with unknown endpoint");
    } else if (dn->start < u->finish + e.delay - eps * std::max(1.0, dn->start)) {
      out.push_back("precedence edge " + std::to_string(e.upstream) + "->" +
                    std::to_string(e.downstream) + " violated");
    }
  }
  return out;
}

} // namespace cutsched::testing
