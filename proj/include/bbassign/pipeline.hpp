#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbassign/linking.hpp"
#include "bbassign/model.hpp"
#include "bbassign/search.hpp"
#include "bbassign/typing.hpp"

namespace bbassign {

enum class Strategy { Greedy, AStar };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct PipelineConfig {
  TypingParams typing;
  double schedule_start = 0.05;
  double schedule_step = 0.05;
  double schedule_max = 0.5;
  SearchConfig search;
  Strategy strategy = Strategy::Greedy;

  ToleranceSchedule schedule() const { return {schedule_start, schedule_step, schedule_max}; }
};

/// A chain of spin systems pinned to a 0-based position by the user.
struct FixedAnchor {
  std::size_t pos;
  std::vector<std::string> members;
};

// Anchors file: TSV `pos spin_ids`, 1-based position, comma-separated ids.
std::vector<FixedAnchor> parse_fixed_anchors(std::string_view text);

struct TypeMismatch {
  std::size_t pos;
  std::string spin_id;
  double score;  // type score against the residue at `pos`
};

struct PipelineOutcome {
  std::vector<AnchorSubset> subsets;
  AnchorMatchResult anchors;
  std::vector<Pseudoresidue> fixed;
  std::vector<ChainItem> items;
  AssemblyResult assembly;
  Assignment assignment;
  std::vector<TypeMismatch> mismatches;
};

// Anchor search, anchor matching, chain assembly and expansion to positions.
// Throws InfeasibleAnchors when pinned chains collide and SizeLimitExceeded
// when A* is asked to order too many items.
PipelineOutcome run_pipeline(const ProteinSequence& seq, std::span<const SpinSystem> spins,
                             const ReferenceStats& stats, const PipelineConfig& cfg,
                             std::span<const FixedAnchor> fixed = {});

}  // namespace bbassign
