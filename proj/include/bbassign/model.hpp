#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bbassign {

// One-letter amino-acid alphabet, in the conventional ARNDCQEGHILKMFPSTWYV order.
enum class Residue : std::uint8_t { A, R, N, D, C, Q, E, G, H, I, L, K, M, F, P, S, T, W, Y, V };

inline constexpr std::size_t kResidueCount = 20;
inline constexpr std::string_view kResidueLetters = "ARNDCQEGHILKMFPSTWYV";

/// Case-insensitive lookup; nullopt for anything outside the 20 standard codes.
std::optional<Residue> residue_from_letter(char c);

inline char to_letter(Residue r) { return kResidueLetters[static_cast<std::size_t>(r)]; }
inline std::size_t index_of(Residue r) { return static_cast<std::size_t>(r); }
inline Residue residue_at(std::size_t i) { return static_cast<Residue>(i); }

/// Every residue code in alphabet order.
const std::array<Residue, kResidueCount>& all_residues();

class ProteinSequence {
 public:
  explicit ProteinSequence(std::vector<Residue> residues);

  std::size_t size() const { return residues_.size(); }
  Residue operator[](std::size_t pos) const { return residues_[pos]; }
  const std::vector<Residue>& residues() const { return residues_; }
  std::string str() const;

  bool operator==(const ProteinSequence&) const = default;

 private:
  std::vector<Residue> residues_;
};

// Carbon shifts outside this window are rejected on ingest.
inline constexpr double kCarbonMinPpm = 0.0;
inline constexpr double kCarbonMaxPpm = 100.0;

/// A Cα/Cβ pair, either of which may be unobserved. Shifts are in ppm.
struct CarbonPair {
  std::optional<double> ca;
  std::optional<double> cb;

  bool empty() const { return !ca && !cb; }
  bool operator==(const CarbonPair&) const = default;
};

/// One observed backbone unit: intra-residue (i) and preceding-residue (i-1) carbons.
struct SpinSystem {
  std::string id;
  CarbonPair intra;
  CarbonPair prev;
  // Values of passthrough columns (H, N, ...), in table column order.
  std::vector<std::string> extra;

  bool operator==(const SpinSystem&) const = default;
};

struct ResidueStats {
  double ca_mean = 0.0;
  double ca_sd = 1.0;
  std::optional<double> cb_mean;
  std::optional<double> cb_sd;

  bool operator==(const ResidueStats&) const = default;
};

/// Per-residue-type Cα/Cβ reference statistics. Glycine carries no Cβ.
class ReferenceStats {
 public:
  // Throws std::invalid_argument when a σ is not positive or the glycine rule is broken.
  explicit ReferenceStats(std::array<ResidueStats, kResidueCount> table);

  const ResidueStats& operator[](Residue r) const { return table_[index_of(r)]; }
  const std::array<ResidueStats, kResidueCount>& table() const { return table_; }

  bool operator==(const ReferenceStats&) const = default;

 private:
  std::array<ResidueStats, kResidueCount> table_;
};

/// Rising ppm tolerances: start, start+step, ... up to the first value >= max, clamped to max.
class ToleranceSchedule {
 public:
  ToleranceSchedule(double start, double step, double max);

  double start() const { return start_; }
  double step() const { return step_; }
  double max() const { return max_; }
  std::vector<double> values() const;

 private:
  double start_;
  double step_;
  double max_;
};

struct AnchorSubset {
  std::size_t start_pos = 0;
  std::vector<Residue> residues;
  double uniqueness_score = 0.0;

  std::size_t length() const { return residues.size(); }
  bool operator==(const AnchorSubset&) const = default;
};

/// A chain of linked spin systems collapsed into one linkable unit.
struct Pseudoresidue {
  std::vector<std::string> members;
  std::optional<std::size_t> anchor_pos;
  CarbonPair front_prev;   // i-1 shifts of the first member
  CarbonPair back_intra;   // intra shifts of the last member
  std::vector<CarbonPair> member_intra;  // intra shifts of every member, in order

  bool operator==(const Pseudoresidue&) const = default;
};

/// Position -> spin id map (0-based positions) with its link-error score.
struct Assignment {
  std::map<std::size_t, std::string> mapping;
  // Cost of the link from position p to p+1, present when both are assigned.
  std::map<std::size_t, double> link_to_next;
  double total_error = 0.0;
  std::set<std::string> unassigned;
};

/// Link scoring weights shared by linking, search and validation.
struct ScoringConfig {
  double sigma_link_ca = 0.2;
  double sigma_link_cb = 0.2;
  double break_penalty = 10.0;
  double unplaced_penalty = 10.0;
  // A unit whose best incoming link error is at or below this has an observed predecessor.
  double predecessor_evidence = 1.0;
  // Weight of the residue-type fit of each placed spin system (needs reference stats).
  double type_weight = 0.1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class InfeasibleAnchors : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class SizeLimitExceeded : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bbassign
