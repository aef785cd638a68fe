#include "bbassign/linking.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <limits>
#include <map>

namespace bbassign {

LinkError link_error(const CarbonPair& back, const CarbonPair& front, const ScoringConfig& cfg) {
  double sum = 0.0;
  int dims = 0;
  if (back.ca && front.ca) {
    const double z = (*front.ca - *back.ca) / cfg.sigma_link_ca;
    sum += z * z;
    ++dims;
  }
  if (back.cb && front.cb) {
    const double z = (*front.cb - *back.cb) / cfg.sigma_link_cb;
    sum += z * z;
    ++dims;
  }
  if (dims == 0) return {std::numeric_limits<double>::infinity(), 0};
  return {sum / dims, dims};
}

double link_cost(const CarbonPair& back, const CarbonPair& front, const ScoringConfig& cfg) {
  const auto e = link_error(back, front, cfg);
  return e.dims_used > 0 ? std::min(e.value, cfg.break_penalty) : cfg.break_penalty;
}

bool within_tolerance(const CarbonPair& back, const CarbonPair& front, double tol) {
  int dims = 0;
  if (back.ca && front.ca) {
    if (!(std::abs(*front.ca - *back.ca) <= tol)) return false;
    ++dims;
  }
  if (back.cb && front.cb) {
    if (!(std::abs(*front.cb - *back.cb) <= tol)) return false;
    ++dims;
  }
  return dims > 0;
}

LinkSet enumerate_links(std::span<const SpinSystem> spins, double tol) {
  LinkSet links;
  for (std::size_t a = 0; a < spins.size(); ++a) {
    for (std::size_t b = 0; b < spins.size(); ++b) {
      if (a == b) continue;
      if (within_tolerance(spins[a].intra, spins[b].prev, tol)) {
        links.emplace(spins[a].id, spins[b].id);
      }
    }
  }
  return links;
}

Pseudoresidue build_pseudoresidue(const std::vector<std::string>& member_ids,
                                  std::span<const SpinSystem> spins,
                                  std::optional<std::size_t> anchor_pos, const ScoringConfig& cfg) {
  if (member_ids.empty()) throw std::invalid_argument("pseudoresidue needs at least one member");
  std::map<std::string_view, const SpinSystem*> by_id;
  for (const auto& s : spins) by_id.emplace(s.id, &s);

  std::vector<const SpinSystem*> members;
  std::set<std::string_view> seen;
  for (const auto& id : member_ids) {
    if (!seen.insert(id).second) throw std::invalid_argument("duplicate pseudoresidue member '" + id + "'");
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw std::invalid_argument("unknown spin system '" + id + "'");
    members.push_back(it->second);
  }
  for (std::size_t k = 0; k + 1 < members.size(); ++k) {
    if (link_error(*members[k], *members[k + 1], cfg).dims_used == 0) {
      throw std::invalid_argument("no comparable shifts between '" + members[k]->id + "' and '" +
                                  members[k + 1]->id + "'");
    }
  }
  Pseudoresidue p;
  p.members = member_ids;
  p.anchor_pos = anchor_pos;
  p.front_prev = members.front()->prev;
  p.back_intra = members.back()->intra;
  for (const auto* m : members) p.member_intra.push_back(m->intra);
  return p;
}

std::vector<Pseudoresidue> AnchorMatchResult::pseudoresidues() const {
  std::vector<Pseudoresidue> out;
  out.reserve(matched.size());
  for (const auto& m : matched) out.push_back(m.pseudoresidue);
  return out;
}

namespace {

using TypeMask = std::bitset<kResidueCount>;

// Counts chains fitting `subset` at gate `tol`, stopping once a second one turns up.
class ChainCounter {
 public:
  ChainCounter(const AnchorSubset& subset, std::span<const SpinSystem> spins,
               const std::vector<TypeMask>& types, const std::vector<bool>& consumed, double tol)
      : subset_(subset), spins_(spins), types_(types), consumed_(consumed), tol_(tol) {}

  std::size_t count() {
    found_ = 0;
    chain_.clear();
    extend();
    return found_;
  }

  const std::vector<std::size_t>& first_chain() const { return first_; }

 private:
  void extend() {
    if (found_ > 1) return;
    const std::size_t depth = chain_.size();
    if (depth == subset_.length()) {
      if (found_++ == 0) first_ = chain_;
      return;
    }
    const auto want = index_of(subset_.residues[depth]);
    for (std::size_t s = 0; s < spins_.size() && found_ <= 1; ++s) {
      if (consumed_[s] || !types_[s].test(want)) continue;
      if (std::find(chain_.begin(), chain_.end(), s) != chain_.end()) continue;
      if (depth > 0 && !within_tolerance(spins_[chain_.back()].intra, spins_[s].prev, tol_)) continue;
      chain_.push_back(s);
      extend();
      chain_.pop_back();
    }
  }

  const AnchorSubset& subset_;
  std::span<const SpinSystem> spins_;
  const std::vector<TypeMask>& types_;
  const std::vector<bool>& consumed_;
  double tol_;
  std::size_t found_ = 0;
  std::vector<std::size_t> chain_;
  std::vector<std::size_t> first_;
};

}  // namespace

AnchorMatchResult match_anchors(std::span<const AnchorSubset> subsets,
                                std::span<const SpinSystem> spins, const ReferenceStats& stats,
                                const ToleranceSchedule& sched, const TypingParams& typing,
                                const ScoringConfig& cfg) {
  std::vector<TypeMask> types(spins.size());
  for (std::size_t s = 0; s < spins.size(); ++s) {
    for (auto r : candidate_types(spins[s], stats, typing.cutoff, typing.missing_cb_penalty)) {
      types[s].set(index_of(r));
    }
  }

  std::vector<bool> consumed(spins.size(), false);
  std::vector<bool> done(subsets.size(), false);
  AnchorMatchResult result;
  std::size_t remaining = subsets.size();

  for (const double tol : sched.values()) {
    if (remaining == 0) break;
    for (std::size_t k = 0; k < subsets.size(); ++k) {
      if (done[k]) continue;
      ChainCounter counter(subsets[k], spins, types, consumed, tol);
      if (counter.count() != 1) continue;

      std::vector<std::string> ids;
      for (auto s : counter.first_chain()) {
        consumed[s] = true;
        ids.push_back(spins[s].id);
        result.consumed.insert(spins[s].id);
      }
      result.matched.push_back(
          {subsets[k], build_pseudoresidue(ids, spins, subsets[k].start_pos, cfg), tol});
      done[k] = true;
      --remaining;
    }
  }
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    if (!done[k]) result.unmatched.push_back(subsets[k]);
  }
  return result;
}

}  // namespace bbassign
