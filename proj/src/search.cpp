#include "bbassign/search.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <queue>
#include <tuple>
#include <thread>
#include <unordered_map>

#include "bbassign/linking.hpp"
#include "bbassign/typing.hpp"
#include "bbassign/validate.hpp"

namespace bbassign {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kLookaheadDepth = 2;
constexpr std::size_t kMaxContenders = 6;

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += '+';
    out += id;
  }
  return out;
}

std::size_t index_of_id(std::span<const ChainItem> items, const std::string& id) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == id) return i;
  }
  throw std::invalid_argument("no chain item with id '" + id + "'");
}

// Tracks the state of one growing chain.
struct ChainBuilder {
  const AssemblyProblem& problem;
  std::vector<char> placed;
  AssemblyResult result;
  std::size_t tail = 0;
  std::size_t end = 0;

  explicit ChainBuilder(const AssemblyProblem& p) : problem(p), placed(p.size(), 0) {}

  void start(std::size_t i, std::size_t offset) {
    result.total_error += problem.entry_cost(i, offset);
    placed[i] = 1;
    result.order.push_back({i, offset});
    result.start_item = problem.item(i).id;
    tail = i;
    end = offset + problem.item(i).span();
  }

  void append(std::size_t b, const AssemblyProblem::Slot& slot) {
    result.total_error += problem.step_cost(tail, b, slot);
    placed[b] = 1;
    result.order.push_back({b, slot.offset});
    tail = b;
    end = slot.offset + problem.item(b).span();
  }

  AssemblyResult finish() {
    for (std::size_t i = 0; i < problem.size(); ++i) {
      if (!placed[i]) {
        result.unplaced.push_back(i);
        result.total_error += problem.unplaced_penalty();
      }
    }
    return std::move(result);
  }

  auto is_placed() const {
    return [this](std::size_t i) { return placed[i] != 0; };
  }
};

bool better(const AssemblyResult& a, const AssemblyResult& b) {
  if (a.total_error != b.total_error) return a.total_error < b.total_error;
  return a.start_item < b.start_item;
}

AssemblyResult empty_result(const AssemblyProblem& problem) {
  AssemblyResult r;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    r.unplaced.push_back(i);
    r.total_error += problem.unplaced_penalty();
  }
  return r;
}

}  // namespace

ChainItem make_item(const SpinSystem& spin) {
  return ChainItem{spin.id, {spin.id}, spin.prev, spin.intra, {spin.intra}, std::nullopt};
}

ChainItem make_item(const Pseudoresidue& p) {
  return ChainItem{join_ids(p.members), p.members, p.front_prev, p.back_intra, p.member_intra,
                   p.anchor_pos};
}

std::vector<ChainItem> make_items(std::span<const Pseudoresidue> pseudoresidues,
                                  std::span<const SpinSystem> spins,
                                  const std::set<std::string>& consumed) {
  std::vector<ChainItem> items;
  for (const auto& p : pseudoresidues) items.push_back(make_item(p));
  std::sort(items.begin(), items.end(),
            [](const ChainItem& a, const ChainItem& b) { return a.id < b.id; });
  const auto n_pseudo = items.size();
  for (const auto& s : spins) {
    if (!consumed.contains(s.id)) items.push_back(make_item(s));
  }
  std::sort(items.begin() + static_cast<std::ptrdiff_t>(n_pseudo), items.end(),
            [](const ChainItem& a, const ChainItem& b) { return a.id < b.id; });
  return items;
}

AssemblyProblem::AssemblyProblem(std::span<const ChainItem> items, const ProteinSequence& seq,
                                 const ScoringConfig& cfg, const ReferenceStats* stats,
                                 double missing_cb_penalty)
    : items_(items.begin(), items.end()),
      proline_(seq.size()),
      claimed_(seq.size()),
      cfg_(cfg) {
  const auto n = items_.size();
  for (std::size_t p = 0; p < seq.size(); ++p) proline_[p] = seq[p] == Residue::P;

  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& it = items_[i];
    if (it.members.empty()) throw std::invalid_argument("chain item '" + it.id + "' has no members");
    if (!ids.insert(it.id).second) throw std::invalid_argument("duplicate chain item id '" + it.id + "'");
    if (!it.anchor_pos) continue;
    const auto pos = *it.anchor_pos;
    if (pos + it.span() > seq.size()) {
      throw InfeasibleAnchors("anchored item '" + it.id + "' runs past the sequence end");
    }
    for (std::size_t p = pos; p < pos + it.span(); ++p) {
      if (proline_[p]) {
        throw InfeasibleAnchors("anchored item '" + it.id + "' covers proline at position " +
                                std::to_string(p + 1));
      }
      if (claimed_[p]) {
        throw InfeasibleAnchors("anchored items '" + items_[*claimed_[p]].id + "' and '" + it.id +
                                "' overlap at position " + std::to_string(p + 1));
      }
      claimed_[p] = i;
    }
  }

  Eigen::MatrixXd raw(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  link_cost_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const auto e = link_error(items_[a].back, items_[b].front, cfg_);
      raw(a, b) = a == b ? kInf : e.value;
      const auto& x = items_[a].back;
      const auto& y = items_[b].front;
      const bool whole = x.ca.has_value() == y.ca.has_value() && x.cb.has_value() == y.cb.has_value();
      link_kind_.push_back(a == b || e.dims_used == 0 ? LinkKind::None
                           : whole                    ? LinkKind::Complete
                                                      : LinkKind::Partial);
      link_cost_(a, b) = a == b ? kInf : link_cost(items_[a].back, items_[b].front, cfg_);
    }
  }
  auto link_error_at = [&raw](std::size_t a, std::size_t b) {
    return raw(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };

  fit_cost_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(seq.size()));
  has_predecessor_.assign(n, false);
  lower_bound_.resize(static_cast<Eigen::Index>(n));
  if (stats && cfg_.type_weight > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& it = items_[i];
      for (std::size_t q = 0; q + it.span() <= seq.size(); ++q) {
        double fit = 0.0;
        for (std::size_t k = 0; k < it.span() && k < it.intra.size(); ++k) {
          if (it.intra[k].empty()) continue;
          const double t = type_score(it.intra[k], seq[q + k], *stats, missing_cb_penalty);
          fit += cfg_.type_weight * std::min(t, cfg_.break_penalty);
        }
        fit_cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q)) = fit;
      }
    }
  }

  // Evidence counts only for mutual best matches over complete links, so a
  // coincidence in the one dimension left by missing data does not hide a
  // chain head.
  std::vector<std::size_t> best_out(n, n), best_in(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      if (best_out[a] == n || link_error_at(a, b) < link_error_at(a, best_out[a])) best_out[a] = b;
      if (best_in[b] == n || link_error_at(a, b) < link_error_at(best_in[b], b)) best_in[b] = a;
    }
  }
  has_successor_.assign(n, false);
  for (std::size_t b = 0; b < n; ++b) {
    const auto a = best_in[b];
    if (a != n && best_out[a] == b && complete(a, b) && link_error_at(a, b) <= cfg_.predecessor_evidence) {
      has_predecessor_[b] = true;
      has_successor_[a] = true;
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    double cheapest_fit = kInf;
    for (std::size_t p = 0; p < seq.size(); ++p) {
      if (fits(b, p)) cheapest_fit = std::min(cheapest_fit, fit_cost(b, p));
    }
    double cheapest_link = has_predecessor_[b] ? cfg_.break_penalty : 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (comparable(a, b)) cheapest_link = std::min(cheapest_link, link_cost_(a, b));
    }
    lower_bound_(b) = std::min(cheapest_link + cheapest_fit, cfg_.unplaced_penalty);
  }
}

bool AssemblyProblem::fits(std::size_t i, std::size_t offset) const {
  const auto span = items_[i].span();
  if (offset + span > proline_.size()) return false;
  for (std::size_t p = offset; p < offset + span; ++p) {
    if (proline_[p]) return false;
    if (claimed_[p] && *claimed_[p] != i) return false;
  }
  if (items_[i].anchor_pos && *items_[i].anchor_pos != offset) return false;
  return true;
}

std::optional<std::size_t> AssemblyProblem::start_offset(std::size_t i) const {
  if (const auto& a = items_[i].anchor_pos) {
    return fits(i, *a) ? std::optional<std::size_t>(*a) : std::nullopt;
  }
  for (std::size_t p = 0; p < proline_.size(); ++p) {
    if (fits(i, p)) return p;
  }
  return std::nullopt;
}

std::optional<AssemblyProblem::Slot> AssemblyProblem::next_slot(std::size_t end) const {
  Slot slot{end, false};
  while (slot.offset < proline_.size() && proline_[slot.offset]) {
    ++slot.offset;
    slot.after_gap = true;
  }
  if (slot.offset >= proline_.size()) return std::nullopt;
  return slot;
}

std::optional<std::size_t> AssemblyProblem::anchored_at(std::size_t offset) const {
  if (offset >= claimed_.size() || !claimed_[offset]) return std::nullopt;
  const auto i = *claimed_[offset];
  return items_[i].anchor_pos == offset ? claimed_[offset] : std::nullopt;
}

AssemblyResult AssemblyProblem::realize(std::span<const std::size_t> chain) const {
  if (chain.empty()) return empty_result(*this);
  ChainBuilder b(*this);
  for (auto i : chain) {
    if (i >= size()) throw std::invalid_argument("chain item index out of range");
  }
  const auto first = start_offset(chain[0]);
  if (!first) throw std::invalid_argument("chain start '" + items_[chain[0]].id + "' fits nowhere");
  b.start(chain[0], *first);
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const auto slot = next_slot(b.end);
    bool allowed = false;
    if (slot) {
      visit_candidates(*slot, b.is_placed(), [&](std::size_t c) { allowed |= c == chain[k]; });
    }
    if (!allowed) {
      throw std::invalid_argument("item '" + items_[chain[k]].id + "' cannot follow '" +
                                  items_[b.tail].id + "'");
    }
    b.append(chain[k], *slot);
  }
  if (const auto slot = next_slot(b.end)) {
    bool open = false;
    visit_candidates(*slot, b.is_placed(), [&](std::size_t) { open = true; });
    if (open) throw std::invalid_argument("chain is not maximal");
  }
  return b.finish();
}

namespace {

bool prefer(const AssemblyProblem& problem, std::size_t c, double cost, std::optional<std::size_t> best,
            double best_cost) {
  return !best || cost < best_cost || (cost == best_cost && problem.item(c).id < problem.item(*best).id);
}

std::optional<std::size_t> cheapest_candidate(const ChainBuilder& b, const AssemblyProblem::Slot& slot) {
  const auto& problem = b.problem;
  std::optional<std::size_t> best;
  double best_cost = kInf;
  problem.visit_candidates(slot, b.is_placed(), [&](std::size_t c) {
    const double cost = problem.step_cost(b.tail, c, slot);
    if (prefer(problem, c, cost, best, best_cost)) {
      best = c;
      best_cost = cost;
    }
  });
  return best;
}

// A slot is clear when the cheapest candidate is linked to the tail by a
// complete link. One dimension left by missing data is too easily a coincidence.
bool clear_link(const ChainBuilder& b, const AssemblyProblem::Slot& slot, std::size_t next) {
  const auto& problem = b.problem;
  return !slot.after_gap && problem.complete(b.tail, next) &&
         problem.link_costs()(b.tail, next) <= problem.scoring().predecessor_evidence;
}

// Candidates worth a lookahead: the cheapest few below the break penalty, or
// the single cheapest when none is.
std::vector<std::size_t> contenders(const ChainBuilder& b, const AssemblyProblem::Slot& slot) {
  const auto& problem = b.problem;
  std::vector<std::pair<double, std::size_t>> ranked;
  problem.visit_candidates(slot, b.is_placed(), [&](std::size_t c) {
    ranked.emplace_back(problem.step_cost(b.tail, c, slot), c);
  });
  std::sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
    return x.first != y.first ? x.first < y.first : problem.item(x.second).id < problem.item(y.second).id;
  });
  std::vector<std::size_t> out;
  for (const auto& [cost, c] : ranked) {
    if (out.size() == kMaxContenders || (!out.empty() && cost >= problem.scoring().break_penalty)) break;
    out.push_back(c);
  }
  return out;
}

template <class Score>
std::optional<std::size_t> best_by(const ChainBuilder& b, const AssemblyProblem::Slot& slot, Score&& score) {
  std::optional<std::size_t> best;
  double best_score = kInf;
  for (auto c : contenders(b, slot)) {
    const double v = score(c);
    if (prefer(b.problem, c, v, best, best_score)) {
      best = c;
      best_score = v;
    }
  }
  return best;
}

// Extends the chain to its end. Each slot without a candidate linked to the
// tail by the shifts goes to the contender whose own completion, looking
// `depth - 1` levels further, has the lowest total.
void extend(ChainBuilder& b, int depth) {
  for (;;) {
    const auto slot = b.problem.next_slot(b.end);
    if (!slot) return;
    auto next = cheapest_candidate(b, *slot);
    if (!next) return;
    if (depth > 0 && !clear_link(b, *slot, *next)) {
      next = best_by(b, *slot, [&](std::size_t c) {
        ChainBuilder trial = b;
        trial.append(c, *slot);
        extend(trial, depth - 1);
        return trial.finish().total_error;
      });
    }
    b.append(*next, *slot);
  }
}

}  // namespace

AssemblyResult greedy_assemble(const AssemblyProblem& problem, std::size_t start) {
  const auto offset = problem.start_offset(start);
  if (!offset) {
    throw std::invalid_argument("start item '" + problem.item(start).id + "' fits nowhere");
  }
  ChainBuilder b(problem);
  b.start(start, *offset);
  extend(b, kLookaheadDepth);
  return b.finish();
}

AssemblyResult greedy_assemble(std::span<const ChainItem> items, const std::string& start_id,
                               const ProteinSequence& seq, const SearchConfig& cfg) {
  const AssemblyProblem problem(items, seq, cfg.scoring);
  return greedy_assemble(problem, index_of_id(items, start_id));
}

AssemblyResult multi_start_greedy(const AssemblyProblem& problem, unsigned threads) {
  if (problem.size() == 0) throw std::invalid_argument("multi-start greedy needs at least one item");
  std::vector<std::optional<AssemblyResult>> runs(problem.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < problem.size(); i += stride) {
      if (problem.start_offset(i)) runs[i] = greedy_assemble(problem, i);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, problem.size());
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  std::optional<AssemblyResult> best;
  for (auto& r : runs) {
    if (r && (!best || better(*r, *best))) best = std::move(r);
  }
  return best ? std::move(*best) : empty_result(problem);
}

AssemblyResult multi_start_greedy(std::span<const ChainItem> items, const ProteinSequence& seq,
                                  const SearchConfig& cfg) {
  const AssemblyProblem problem(items, seq, cfg.scoring);
  return multi_start_greedy(problem, cfg.threads);
}

namespace {

struct StateKey {
  std::uint64_t placed;
  std::uint32_t tail;
  std::uint32_t end;

  bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const {
    std::size_t h = std::hash<std::uint64_t>{}(k.placed);
    h ^= (static_cast<std::size_t>(k.tail) << 32 | k.end) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct SearchNode {
  StateKey key;
  double g;
  std::size_t parent;  // index into the node arena; npos for chain starts
  bool goal;
};

constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

}  // namespace

AssemblyResult astar_assemble(const AssemblyProblem& problem, std::size_t size_limit) {
  const auto n = problem.size();
  if (n > size_limit || n > 63) {
    throw SizeLimitExceeded("A* is limited to " + std::to_string(std::min<std::size_t>(size_limit, 63)) +
                            " chain items (got " + std::to_string(n) + "); use the greedy strategy");
  }
  if (n == 0) return empty_result(problem);

  std::vector<SearchNode> arena;
  using Entry = std::tuple<double, std::size_t>;  // (f, arena index); index breaks ties FIFO
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::unordered_map<StateKey, double, StateKeyHash> best_g;

  auto push = [&](StateKey key, double g, std::size_t parent, bool goal) {
    if (!goal) {
      auto [it, fresh] = best_g.emplace(key, g);
      if (!fresh) {
        if (g >= it->second) return;
        it->second = g;
      }
    }
    const auto mask = key.placed;
    const double h = goal ? 0.0 : problem.heuristic([mask](std::size_t i) { return (mask >> i) & 1U; });
    arena.push_back({key, g, parent, goal});
    open.emplace(g + h, arena.size() - 1);
  };

  for (std::size_t i = 0; i < n; ++i) {
    const auto offset = problem.start_offset(i);
    if (!offset) continue;
    push({std::uint64_t{1} << i, static_cast<std::uint32_t>(i),
          static_cast<std::uint32_t>(*offset + problem.item(i).span())},
         problem.entry_cost(i, *offset), kNoParent, false);
  }
  if (open.empty()) return empty_result(problem);

  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    const SearchNode node = arena[idx];
    if (node.goal) {
      std::vector<std::size_t> chain;
      for (auto k = node.parent; k != kNoParent; k = arena[k].parent) chain.push_back(arena[k].key.tail);
      std::reverse(chain.begin(), chain.end());
      // Re-price along the rule path so the reported total is the chain's own cost.
      return problem.realize(chain);
    }
    if (node.g > best_g.at(node.key)) continue;

    const auto mask = node.key.placed;
    auto placed = [mask](std::size_t i) { return ((mask >> i) & 1U) != 0; };
    bool expanded = false;
    if (const auto slot = problem.next_slot(node.key.end)) {
      problem.visit_candidates(*slot, placed, [&](std::size_t b) {
        expanded = true;
        const double g = node.g + problem.step_cost(node.key.tail, b, *slot);
        push({mask | (std::uint64_t{1} << b), static_cast<std::uint32_t>(b),
              static_cast<std::uint32_t>(slot->offset + problem.item(b).span())},
             g, idx, false);
      });
    }
    if (!expanded) {
      const auto left = n - static_cast<std::size_t>(std::popcount(mask));
      push(node.key, node.g + problem.unplaced_penalty() * static_cast<double>(left), idx, true);
    }
  }
  return empty_result(problem);
}

AssemblyResult astar_assemble(std::span<const ChainItem> items, const ProteinSequence& seq,
                              const SearchConfig& cfg) {
  if (items.size() > cfg.astar_limit) {
    throw SizeLimitExceeded("A* is limited to " + std::to_string(cfg.astar_limit) +
                            " chain items (got " + std::to_string(items.size()) +
                            "); use the greedy strategy");
  }
  const AssemblyProblem problem(items, seq, cfg.scoring);
  return astar_assemble(problem, cfg.astar_limit);
}

namespace {

class Enumerator {
 public:
  explicit Enumerator(const AssemblyProblem& p) : problem_(p), placed_(p.size(), 0) {}

  std::optional<AssemblyResult> run() {
    for (std::size_t i = 0; i < problem_.size(); ++i) {
      const auto offset = problem_.start_offset(i);
      if (!offset) continue;
      chain_ = {i};
      placed_[i] = 1;
      descend(*offset + problem_.item(i).span(), problem_.entry_cost(i, *offset));
      placed_[i] = 0;
    }
    if (!best_chain_) return std::nullopt;
    AssemblyResult r = problem_.realize(*best_chain_);
    return r;
  }

 private:
  void descend(std::size_t end, double cost) {
    const auto placed = [this](std::size_t i) { return placed_[i] != 0; };
    bool extended = false;
    if (const auto slot = problem_.next_slot(end)) {
      std::vector<std::size_t> next;
      problem_.visit_candidates(*slot, placed, [&](std::size_t b) { next.push_back(b); });
      for (auto b : next) {
        extended = true;
        const double step = problem_.step_cost(chain_.back(), b, *slot);
        chain_.push_back(b);
        placed_[b] = 1;
        descend(slot->offset + problem_.item(b).span(), cost + step);
        placed_[b] = 0;
        chain_.pop_back();
      }
    }
    if (extended) return;
    const double total =
        cost + problem_.unplaced_penalty() * static_cast<double>(problem_.size() - chain_.size());
    if (!best_chain_ || total < best_cost_) {
      best_cost_ = total;
      best_chain_ = chain_;
    }
  }

  const AssemblyProblem& problem_;
  std::vector<char> placed_;
  std::vector<std::size_t> chain_;
  std::optional<std::vector<std::size_t>> best_chain_;
  double best_cost_ = kInf;
};

}  // namespace

AssemblyResult exhaustive_oracle(const AssemblyProblem& problem, std::size_t size_limit) {
  if (problem.size() > size_limit) {
    throw SizeLimitExceeded("exhaustive search is limited to " + std::to_string(size_limit) +
                            " chain items (got " + std::to_string(problem.size()) + ")");
  }
  if (problem.size() == 0) return empty_result(problem);
  auto best = Enumerator(problem).run();
  return best ? std::move(*best) : empty_result(problem);
}

AssemblyResult exhaustive_oracle(std::span<const ChainItem> items, const ProteinSequence& seq,
                                 const SearchConfig& cfg) {
  const AssemblyProblem problem(items, seq, cfg.scoring);
  return exhaustive_oracle(problem, cfg.oracle_limit);
}

Assignment finalize_assignment(const AssemblyResult& result, const AssemblyProblem& problem,
                               std::span<const SpinSystem> spins, const ProteinSequence& seq) {
  Assignment a;
  for (const auto& pl : result.order) {
    const auto& it = problem.item(pl.item);
    if (pl.offset + it.span() > seq.size()) {
      throw std::invalid_argument("item '" + it.id + "' overflows the sequence end");
    }
    for (std::size_t k = 0; k < it.span(); ++k) {
      if (!a.mapping.emplace(pl.offset + k, it.members[k]).second) {
        throw std::invalid_argument("position " + std::to_string(pl.offset + k + 1) + " assigned twice");
      }
    }
  }
  std::set<std::string_view> used;
  for (const auto& [pos, id] : a.mapping) used.insert(id);
  for (const auto& s : spins) {
    if (!used.contains(s.id)) a.unassigned.insert(s.id);
  }
  a.link_to_next = adjacent_link_costs(a.mapping, spins, problem.scoring());
  for (const auto& [pos, c] : a.link_to_next) a.total_error += c;
  return a;
}

}  // namespace bbassign
