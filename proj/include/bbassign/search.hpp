#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bbassign/model.hpp"

namespace bbassign {

/// A bare spin system or a pseudoresidue, as seen by chain assembly.
struct ChainItem {
  std::string id;
  std::vector<std::string> members;
  CarbonPair front;  // preceding-residue shifts of the first member
  CarbonPair back;   // intra shifts of the last member
  std::vector<CarbonPair> intra;  // intra shifts of each member
  std::optional<std::size_t> anchor_pos;

  std::size_t span() const { return members.size(); }
};

ChainItem make_item(const SpinSystem& spin);
ChainItem make_item(const Pseudoresidue& p);

/// Pseudoresidues first, then every spin system not in `consumed`, sorted by id within each group.
std::vector<ChainItem> make_items(std::span<const Pseudoresidue> pseudoresidues,
                                  std::span<const SpinSystem> spins,
                                  const std::set<std::string>& consumed);

struct Placement {
  std::size_t item;
  std::size_t offset;

  bool operator==(const Placement&) const = default;
};

struct AssemblyResult {
  std::vector<Placement> order;  // chain order; offsets increase along it
  double total_error = 0.0;      // step costs plus unplaced penalties
  std::string start_item;
  std::vector<std::size_t> unplaced;
};

struct SearchConfig {
  ScoringConfig scoring;
  std::size_t astar_limit = 20;
  std::size_t oracle_limit = 9;
  unsigned threads = 1;
};

// Placement rules and costs shared by every assembly strategy.
//
// A chain is an ordered list of items laid on the sequence frame. The first
// item sits at its anchor position, or at the earliest offset where it fits
// when unanchored. Each later item goes to the first non-proline position
// after the tail; when that position starts an anchored item, only that item
// may go there. A chain ends when no item fits the next position.
//
// Step costs: the link error to the tail, capped at the break penalty. An
// item that enters the chain without an observed link (as the first item,
// after a proline gap, or with no shift dimension comparable to the tail)
// pays an entry cost instead: the break penalty when it and some other item
// are each other's best match within `predecessor_evidence`, over a complete
// link (no dimension observed on one side only), else nothing.
// A missing link inside a segment also costs the break penalty when the tail
// has such a match of its own.
// With reference stats, each placed member also adds `type_weight` times its
// residue-type score at its position, capped at the break penalty. Every item
// left out of the chain adds the unplaced penalty.
class AssemblyProblem {
 public:
  struct Slot {
    std::size_t offset;
    bool after_gap;
  };

  // Throws InfeasibleAnchors when anchored spans overlap, overrun the
  // sequence, or cover a proline.
  AssemblyProblem(std::span<const ChainItem> items, const ProteinSequence& seq,
                  const ScoringConfig& cfg, const ReferenceStats* stats = nullptr,
                  double missing_cb_penalty = 1.0);

  std::size_t size() const { return items_.size(); }
  const ChainItem& item(std::size_t i) const { return items_[i]; }
  std::span<const ChainItem> items() const { return items_; }
  std::size_t sequence_length() const { return proline_.size(); }
  const ScoringConfig& scoring() const { return cfg_; }

  bool fits(std::size_t i, std::size_t offset) const;
  std::optional<std::size_t> start_offset(std::size_t i) const;
  /// First usable position at or after `end`; nullopt past the sequence end.
  std::optional<Slot> next_slot(std::size_t end) const;
  std::optional<std::size_t> anchored_at(std::size_t offset) const;

  double step_cost(std::size_t tail, std::size_t next, const Slot& slot) const {
    if (slot.after_gap) return entry_cost(next, slot.offset);
    if (!comparable(tail, next)) {
      return has_successor_[tail] ? cfg_.break_penalty + fit_cost(next, slot.offset)
                                  : entry_cost(next, slot.offset);
    }
    return link_cost_(tail, next) + fit_cost(next, slot.offset);
  }
  bool comparable(std::size_t a, std::size_t b) const { return link_kind(a, b) != LinkKind::None; }
  /// Compared in every dimension either side observed.
  bool complete(std::size_t a, std::size_t b) const { return link_kind(a, b) == LinkKind::Complete; }
  double entry_cost(std::size_t b, std::size_t offset) const {
    return (has_predecessor_[b] ? cfg_.break_penalty : 0.0) + fit_cost(b, offset);
  }
  double fit_cost(std::size_t b, std::size_t offset) const {
    return fit_cost_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(offset));
  }
  bool has_predecessor(std::size_t b) const { return has_predecessor_[b]; }
  double unplaced_penalty() const { return cfg_.unplaced_penalty; }

  /// Lower bound on what item `b` adds to any completion: its cheapest step or being left out.
  double item_lower_bound(std::size_t b) const { return lower_bound_(b); }

  template <class IsPlaced>
  double heuristic(IsPlaced&& placed) const {
    double h = 0.0;
    for (std::size_t b = 0; b < size(); ++b) {
      if (!placed(b)) h += lower_bound_(b);
    }
    return h;
  }

  // Calls fn(b) for each item that may be placed at `slot`.
  template <class IsPlaced, class Fn>
  void visit_candidates(const Slot& slot, IsPlaced&& placed, Fn&& fn) const {
    if (const auto a = anchored_at(slot.offset)) {
      if (!placed(*a)) fn(*a);
      return;
    }
    for (std::size_t b = 0; b < size(); ++b) {
      if (!placed(b) && !items_[b].anchor_pos && fits(b, slot.offset)) fn(b);
    }
  }

  /// Lays `chain` out by the placement rules and prices it. Throws
  /// std::invalid_argument when the chain breaks a rule or is not maximal.
  AssemblyResult realize(std::span<const std::size_t> chain) const;

  const Eigen::MatrixXd& link_costs() const { return link_cost_; }

 private:
  std::vector<ChainItem> items_;
  std::vector<bool> proline_;
  std::vector<std::optional<std::size_t>> claimed_;  // anchored item covering each position
  ScoringConfig cfg_;
  Eigen::MatrixXd link_cost_;
  Eigen::MatrixXd fit_cost_;  // item x offset
  std::vector<bool> has_predecessor_;
  std::vector<bool> has_successor_;
  enum class LinkKind : std::uint8_t { None, Partial, Complete };
  LinkKind link_kind(std::size_t a, std::size_t b) const { return link_kind_[a * items_.size() + b]; }

  std::vector<LinkKind> link_kind_;  // row-major item x item
  Eigen::VectorXd lower_bound_;
};

AssemblyResult greedy_assemble(const AssemblyProblem& problem, std::size_t start);
AssemblyResult greedy_assemble(std::span<const ChainItem> items, const std::string& start_id,
                               const ProteinSequence& seq, const SearchConfig& cfg);

AssemblyResult multi_start_greedy(const AssemblyProblem& problem, unsigned threads = 1);
AssemblyResult multi_start_greedy(std::span<const ChainItem> items, const ProteinSequence& seq,
                                  const SearchConfig& cfg);

AssemblyResult astar_assemble(const AssemblyProblem& problem, std::size_t size_limit = 20);
AssemblyResult astar_assemble(std::span<const ChainItem> items, const ProteinSequence& seq,
                              const SearchConfig& cfg);

AssemblyResult exhaustive_oracle(const AssemblyProblem& problem, std::size_t size_limit = 9);
AssemblyResult exhaustive_oracle(std::span<const ChainItem> items, const ProteinSequence& seq,
                                 const SearchConfig& cfg);

/// Expands placed items into per-position spin ids and prices the result.
Assignment finalize_assignment(const AssemblyResult& result, const AssemblyProblem& problem,
                               std::span<const SpinSystem> spins, const ProteinSequence& seq);

}  // namespace bbassign
