#pragma once

#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bbassign/model.hpp"
#include "bbassign/typing.hpp"

namespace bbassign {

struct LinkError {
  double value;   // mean of ((prev(b) - intra(a)) / σ_link)² over compared dims; +inf when none
  int dims_used;  // 0, 1 or 2
};

// The faces a unit shows to its neighbours: `back` links forward, `front` links backward.
inline const CarbonPair& back_face(const SpinSystem& s) { return s.intra; }
inline const CarbonPair& front_face(const SpinSystem& s) { return s.prev; }
inline const CarbonPair& back_face(const Pseudoresidue& p) { return p.back_intra; }
inline const CarbonPair& front_face(const Pseudoresidue& p) { return p.front_prev; }

/// Error of placing a unit whose front is `front` directly after one whose back is `back`.
LinkError link_error(const CarbonPair& back, const CarbonPair& front, const ScoringConfig& cfg);

/// Link error capped at the break penalty, which is also the cost when nothing is comparable.
double link_cost(const CarbonPair& back, const CarbonPair& front, const ScoringConfig& cfg);

template <class A, class B>
LinkError link_error(const A& a, const B& b, const ScoringConfig& cfg) {
  return link_error(back_face(a), front_face(b), cfg);
}

/// True when at least one dimension is compared and every compared one differs by <= tol ppm.
bool within_tolerance(const CarbonPair& back, const CarbonPair& front, double tol);

using LinkSet = std::set<std::pair<std::string, std::string>>;

/// Ordered (a, b) pairs, a != b, whose a->b link passes the raw ppm gate `tol`.
LinkSet enumerate_links(std::span<const SpinSystem> spins, double tol);

/// Throws std::invalid_argument on duplicate or unknown members, or a member
/// pair with no comparable shifts.
Pseudoresidue build_pseudoresidue(const std::vector<std::string>& member_ids,
                                  std::span<const SpinSystem> spins,
                                  std::optional<std::size_t> anchor_pos,
                                  const ScoringConfig& cfg = {});

struct MatchedAnchor {
  AnchorSubset subset;
  Pseudoresidue pseudoresidue;
  double tolerance;  // ppm gate at which the chain became unique
};

struct AnchorMatchResult {
  std::vector<MatchedAnchor> matched;
  std::vector<AnchorSubset> unmatched;
  std::set<std::string> consumed;

  std::vector<Pseudoresidue> pseudoresidues() const;
};

// Walks the tolerance schedule; at each gate every still-unmatched subset (in
// the given priority order) is matched when exactly one chain of unconsumed,
// type-compatible, gate-linked spin systems fits it.
AnchorMatchResult match_anchors(std::span<const AnchorSubset> subsets,
                                std::span<const SpinSystem> spins, const ReferenceStats& stats,
                                const ToleranceSchedule& sched, const TypingParams& typing,
                                const ScoringConfig& cfg = {});

}  // namespace bbassign
