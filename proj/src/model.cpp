#include "bbassign/model.hpp"

#include <cctype>
#include <cmath>

namespace bbassign {

std::optional<Residue> residue_from_letter(char c) {
  const auto upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const auto pos = kResidueLetters.find(upper);
  if (pos == std::string_view::npos) return std::nullopt;
  return residue_at(pos);
}

const std::array<Residue, kResidueCount>& all_residues() {
  static const auto residues = [] {
    std::array<Residue, kResidueCount> out{};
    for (std::size_t i = 0; i < kResidueCount; ++i) out[i] = residue_at(i);
    return out;
  }();
  return residues;
}

ProteinSequence::ProteinSequence(std::vector<Residue> residues) : residues_(std::move(residues)) {
  if (residues_.size() < 2) {
    throw std::invalid_argument("protein sequence needs at least 2 residues");
  }
}

std::string ProteinSequence::str() const {
  std::string out;
  out.reserve(residues_.size());
  for (auto r : residues_) out.push_back(to_letter(r));
  return out;
}

ReferenceStats::ReferenceStats(std::array<ResidueStats, kResidueCount> table) : table_(table) {
  for (auto r : all_residues()) {
    const auto& s = table_[index_of(r)];
    const std::string name(1, to_letter(r));
    if (!std::isfinite(s.ca_mean) || !(s.ca_sd > 0.0)) {
      throw std::invalid_argument("reference stats for " + name + ": ca_sd must be > 0");
    }
    if (r == Residue::G) {
      if (s.cb_mean || s.cb_sd) {
        throw std::invalid_argument("reference stats for G must not carry a Cβ entry");
      }
      continue;
    }
    if (!s.cb_mean || !s.cb_sd) {
      throw std::invalid_argument("reference stats for " + name + ": missing Cβ entry");
    }
    if (!std::isfinite(*s.cb_mean) || !(*s.cb_sd > 0.0)) {
      throw std::invalid_argument("reference stats for " + name + ": cb_sd must be > 0");
    }
  }
}

ToleranceSchedule::ToleranceSchedule(double start, double step, double max)
    : start_(start), step_(step), max_(max) {
  if (!(start > 0.0) || !(start <= max) || !(step > 0.0) || !std::isfinite(max)) {
    throw std::invalid_argument("tolerance schedule needs 0 < start <= max and step > 0");
  }
}

std::vector<double> ToleranceSchedule::values() const {
  // Multiply rather than accumulate so 0.05-steps land on their decimal values.
  constexpr double kSlack = 1e-12;
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double v = start_ + static_cast<double>(k) * step_;
    if (v >= max_ - kSlack) break;
    out.push_back(v);
  }
  out.push_back(max_);
  return out;
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(what), line_(line), column_(column) {}

}  // namespace bbassign
