#include "bbassign/typing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bbassign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double x) { return x * x; }

}  // namespace

double type_score(const CarbonPair& obs, Residue res, const ReferenceStats& stats,
                  double missing_cb_penalty) {
  if (obs.empty()) throw std::invalid_argument("type_score needs at least one carbon shift");
  const auto& ref = stats[res];
  if (res == Residue::G) {
    if (obs.cb) return kInf;
    return sq((*obs.ca - ref.ca_mean) / ref.ca_sd);
  }
  double sum = 0.0;
  int dims = 0;
  if (obs.ca) {
    sum += sq((*obs.ca - ref.ca_mean) / ref.ca_sd);
    ++dims;
  }
  if (obs.cb) {
    sum += sq((*obs.cb - *ref.cb_mean) / *ref.cb_sd);
    ++dims;
  } else {
    sum += missing_cb_penalty;
  }
  return sum / dims;
}

TypeScore type_score(const SpinSystem& spin, Residue res, const ReferenceStats& stats,
                     double missing_cb_penalty) {
  if (spin.intra.empty()) {
    throw std::invalid_argument("spin system '" + spin.id + "' has no intra-residue shifts");
  }
  return {res, type_score(spin.intra, res, stats, missing_cb_penalty)};
}

std::vector<Residue> candidate_types(const SpinSystem& spin, const ReferenceStats& stats,
                                     double cutoff, double missing_cb_penalty) {
  if (!(cutoff >= 0.0)) throw std::invalid_argument("candidate cutoff must be >= 0");
  std::vector<TypeScore> scored;
  if (spin.intra.empty()) return {};
  for (auto r : all_residues()) {
    const auto s = type_score(spin, r, stats, missing_cb_penalty);
    if (s.score <= cutoff) scored.push_back(s);
  }
  std::sort(scored.begin(), scored.end(), [](const TypeScore& a, const TypeScore& b) {
    if (a.score != b.score) return a.score < b.score;
    return to_letter(a.residue) < to_letter(b.residue);
  });
  std::vector<Residue> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.residue);
  return out;
}

SeparationMatrix type_separation(const ReferenceStats& stats, double glycine_bonus) {
  SeparationMatrix d;
  for (std::size_t i = 0; i < kResidueCount; ++i) {
    for (std::size_t j = 0; j < kResidueCount; ++j) {
      if (i == j) {
        d(i, j) = kInf;
        continue;
      }
      const auto& a = stats[residue_at(i)];
      const auto& b = stats[residue_at(j)];
      double d2 = sq(a.ca_mean - b.ca_mean) / ((sq(a.ca_sd) + sq(b.ca_sd)) / 2.0);
      double bonus = 0.0;
      if (a.cb_mean && b.cb_mean) {
        d2 += sq(*a.cb_mean - *b.cb_mean) / ((sq(*a.cb_sd) + sq(*b.cb_sd)) / 2.0);
      } else if (a.cb_mean.has_value() != b.cb_mean.has_value()) {
        bonus = glycine_bonus;
      }
      d(i, j) = std::sqrt(d2) + bonus;
    }
  }
  return d;
}

Eigen::Matrix<double, kResidueCount, 1> uniqueness_table(const ReferenceStats& stats,
                                                         double glycine_bonus) {
  Eigen::Matrix<double, kResidueCount, 1> u = type_separation(stats, glycine_bonus).rowwise().minCoeff();
  // Prolines carry no amide proton and never show up as spin systems.
  u(index_of(Residue::P)) = -kInf;
  return u;
}

double residue_uniqueness(Residue res, const ReferenceStats& stats, double glycine_bonus) {
  return uniqueness_table(stats, glycine_bonus)(index_of(res));
}

std::vector<AnchorSubset> find_anchor_subsets(const ProteinSequence& seq,
                                              const ReferenceStats& stats,
                                              const TypingParams& params) {
  if (params.max_len < 1) throw std::invalid_argument("max subset length must be >= 1");
  const auto u = uniqueness_table(stats, params.glycine_bonus);
  auto unique_at = [&](std::size_t p) { return u(index_of(seq[p])) >= params.min_uniqueness; };

  std::vector<AnchorSubset> subsets;
  std::size_t p = 0;
  while (p < seq.size()) {
    if (!unique_at(p)) {
      ++p;
      continue;
    }
    std::size_t end = p;
    while (end < seq.size() && unique_at(end)) ++end;
    AnchorSubset s;
    s.start_pos = p;
    for (std::size_t k = p; k < std::min(end, p + params.max_len); ++k) {
      s.residues.push_back(seq[k]);
      s.uniqueness_score += u(index_of(seq[k]));
    }
    subsets.push_back(std::move(s));
    p = end;
  }
  std::stable_sort(subsets.begin(), subsets.end(), [](const AnchorSubset& a, const AnchorSubset& b) {
    if (a.uniqueness_score != b.uniqueness_score) return a.uniqueness_score > b.uniqueness_score;
    return a.start_pos < b.start_pos;
  });
  if (subsets.size() > params.max_subsets) subsets.resize(params.max_subsets);
  return subsets;
}

}  // namespace bbassign
