#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bbassign/model.hpp"

namespace bbassign {

struct TypingParams {
  double cutoff = 9.0;              // candidate_types acceptance on the σ² scale
  double missing_cb_penalty = 1.0;  // added to the Cα term when a non-Gly spin lacks Cβ
  double glycine_bonus = 3.0;       // separation credit for Gly's absent Cβ
  double min_uniqueness = 2.0;
  std::size_t max_len = 4;
  std::size_t max_subsets = 16;
};

struct TypeScore {
  Residue residue;
  double score;  // σ-normalized squared deviation, averaged over compared dimensions
};

// Scores the intra shifts of `spin` against residue type `res`.
// Throws std::invalid_argument when the spin has no intra shift.
TypeScore type_score(const SpinSystem& spin, Residue res, const ReferenceStats& stats,
                     double missing_cb_penalty = TypingParams{}.missing_cb_penalty);

// Same scoring rule applied to an arbitrary carbon pair (intra or preceding).
double type_score(const CarbonPair& obs, Residue res, const ReferenceStats& stats,
                  double missing_cb_penalty = TypingParams{}.missing_cb_penalty);

/// Residue codes scoring <= cutoff, ascending by score then letter.
std::vector<Residue> candidate_types(const SpinSystem& spin, const ReferenceStats& stats,
                                     double cutoff,
                                     double missing_cb_penalty = TypingParams{}.missing_cb_penalty);

using SeparationMatrix = Eigen::Matrix<double, kResidueCount, kResidueCount>;

/// Pairwise separation between residue-type mean vectors under pooled σ.
/// Diagonal entries are +inf so a row minimum skips the type itself.
SeparationMatrix type_separation(const ReferenceStats& stats,
                                 double glycine_bonus = TypingParams{}.glycine_bonus);

/// Distance to the nearest other residue type; -inf for proline.
double residue_uniqueness(Residue res, const ReferenceStats& stats,
                          double glycine_bonus = TypingParams{}.glycine_bonus);

/// All 20 uniqueness values, indexed by residue.
Eigen::Matrix<double, kResidueCount, 1> uniqueness_table(
    const ReferenceStats& stats, double glycine_bonus = TypingParams{}.glycine_bonus);

std::vector<AnchorSubset> find_anchor_subsets(const ProteinSequence& seq,
                                              const ReferenceStats& stats,
                                              const TypingParams& params);

}  // namespace bbassign
