#include "bbassign/validate.hpp"

#include <cmath>
#include <set>

#include "bbassign/linking.hpp"

namespace bbassign {
namespace {

std::map<std::string_view, const SpinSystem*> index_spins(std::span<const SpinSystem> spins) {
  std::map<std::string_view, const SpinSystem*> by_id;
  for (const auto& s : spins) by_id.emplace(s.id, &s);
  return by_id;
}

}  // namespace

std::map<std::size_t, double> adjacent_link_costs(const std::map<std::size_t, std::string>& mapping,
                                                  std::span<const SpinSystem> spins,
                                                  const ScoringConfig& cfg) {
  const auto by_id = index_spins(spins);
  std::map<std::size_t, double> costs;
  for (auto it = mapping.begin(); it != mapping.end(); ++it) {
    const auto next = std::next(it);
    if (next == mapping.end() || next->first != it->first + 1) continue;
    const auto a = by_id.find(it->second);
    const auto b = by_id.find(next->second);
    if (a == by_id.end() || b == by_id.end()) continue;
    costs[it->first] = link_cost(back_face(*a->second), front_face(*b->second), cfg);
  }
  return costs;
}

ValidationReport validate_assignment(const Assignment& a, std::span<const SpinSystem> spins,
                                     const ProteinSequence& seq, const ScoringConfig& cfg) {
  ValidationReport report;
  const auto by_id = index_spins(spins);

  std::map<std::string_view, std::size_t> first_use;
  for (const auto& [pos, id] : a.mapping) {
    if (pos >= seq.size()) {
      report.violations.push_back("position " + std::to_string(pos + 1) + " is past the sequence end");
    }
    if (seq.size() > pos && seq[pos] == Residue::P) {
      report.violations.push_back("spin system '" + id + "' assigned to proline at position " +
                                  std::to_string(pos + 1));
    }
    if (!by_id.contains(id)) {
      report.violations.push_back("unknown spin system '" + id + "'");
    }
    const auto [it, fresh] = first_use.emplace(id, pos);
    if (!fresh) {
      report.violations.push_back("spin system '" + id + "' assigned to positions " +
                                  std::to_string(it->second + 1) + " and " + std::to_string(pos + 1));
    }
  }
  for (const auto& id : a.unassigned) {
    if (first_use.contains(id)) {
      report.violations.push_back("spin system '" + id + "' is both assigned and unassigned");
    }
  }

  const auto costs = adjacent_link_costs(a.mapping, spins, cfg);
  for (const auto& [pos, c] : costs) report.recomputed_error += c;
  if (!(a.total_error >= 0.0)) report.violations.push_back("total_error is negative or NaN");
  if (!(std::abs(report.recomputed_error - a.total_error) <= kErrorTolerance)) {
    report.violations.push_back("total_error " + std::to_string(a.total_error) +
                                " differs from recomputed " + std::to_string(report.recomputed_error));
  }
  for (const auto& [pos, c] : a.link_to_next) {
    const auto it = costs.find(pos);
    if (it == costs.end() || !(std::abs(it->second - c) <= kErrorTolerance)) {
      report.violations.push_back("link error after position " + std::to_string(pos + 1) +
                                  " does not match its recomputed value");
    }
  }
  for (const auto& [pos, c] : costs) {
    if (!a.link_to_next.contains(pos)) {
      report.violations.push_back("missing link error after position " + std::to_string(pos + 1));
    }
  }
  return report;
}

}  // namespace bbassign
