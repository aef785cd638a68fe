#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "bbassign/model.hpp"

namespace bbassign {

inline constexpr double kErrorTolerance = 1e-9;

struct ValidationReport {
  std::vector<std::string> violations;
  double recomputed_error = 0.0;

  bool ok() const { return violations.empty(); }
};

/// Link cost from position p to p+1 for every adjacent pair of assigned
/// positions; the break penalty stands in when no dimension is comparable.
/// Unknown ids are skipped.
std::map<std::size_t, double> adjacent_link_costs(const std::map<std::size_t, std::string>& mapping,
                                                  std::span<const SpinSystem> spins,
                                                  const ScoringConfig& cfg);

/// Re-derives every checkable property of `a` from scratch. Never throws on
/// bad input; problems come back as violations.
ValidationReport validate_assignment(const Assignment& a, std::span<const SpinSystem> spins,
                                     const ProteinSequence& seq, const ScoringConfig& cfg);

}  // namespace bbassign
