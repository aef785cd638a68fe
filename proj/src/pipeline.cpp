#include "bbassign/pipeline.hpp"

#include <charconv>
#include <map>

namespace bbassign {

std::string_view to_string(Strategy s) { return s == Strategy::AStar ? "astar" : "greedy"; }

Strategy parse_strategy(std::string_view s) {
  if (s == "greedy") return Strategy::Greedy;
  if (s == "astar") return Strategy::AStar;
  throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

std::vector<FixedAnchor> parse_fixed_anchors(std::string_view text) {
  std::vector<FixedAnchor> out;
  std::size_t line_no = 0;
  bool header = false;
  std::size_t begin = 0;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (!header) {
      if (line != "pos\tspin_ids") throw ParseError(where + "header must be 'pos spin_ids'", line_no);
      header = true;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(where + "expected 2 columns", line_no);
    std::size_t pos = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + tab, pos);
    if (ec != std::errc() || ptr != line.data() + tab || pos == 0) {
      throw ParseError(where + "invalid position", line_no);
    }
    FixedAnchor a{pos - 1, {}};
    auto ids = line.substr(tab + 1);
    std::size_t b = 0;
    while (b <= ids.size()) {
      auto e = ids.find(',', b);
      if (e == std::string_view::npos) e = ids.size();
      if (e == b) throw ParseError(where + "empty spin id", line_no);
      a.members.emplace_back(ids.substr(b, e - b));
      b = e + 1;
    }
    out.push_back(std::move(a));
  }
  if (!header) throw ParseError("anchors file is empty");
  return out;
}

PipelineOutcome run_pipeline(const ProteinSequence& seq, std::span<const SpinSystem> spins,
                             const ReferenceStats& stats, const PipelineConfig& cfg,
                             std::span<const FixedAnchor> fixed) {
  PipelineOutcome out;
  const auto& scoring = cfg.search.scoring;

  std::set<std::string> pinned_ids;
  std::vector<bool> pinned_pos(seq.size(), false);
  for (const auto& f : fixed) {
    auto p = build_pseudoresidue(f.members, spins, f.pos, scoring);
    for (const auto& id : p.members) {
      if (!pinned_ids.insert(id).second) {
        throw InfeasibleAnchors("spin system '" + id + "' is pinned by more than one anchor");
      }
    }
    for (std::size_t k = 0; k < p.members.size() && f.pos + k < seq.size(); ++k) pinned_pos[f.pos + k] = true;
    out.fixed.push_back(std::move(p));
  }

  // Automatic anchors never compete with pinned positions or spin systems.
  for (auto& s : find_anchor_subsets(seq, stats, cfg.typing)) {
    bool clash = false;
    for (std::size_t k = 0; k < s.length(); ++k) clash |= pinned_pos[s.start_pos + k];
    if (!clash) out.subsets.push_back(std::move(s));
  }
  std::vector<SpinSystem> free_spins;
  for (const auto& s : spins) {
    if (!pinned_ids.contains(s.id)) free_spins.push_back(s);
  }
  out.anchors = match_anchors(out.subsets, free_spins, stats, cfg.schedule(), cfg.typing, scoring);

  auto pseudoresidues = out.fixed;
  for (auto& p : out.anchors.pseudoresidues()) pseudoresidues.push_back(std::move(p));
  auto consumed = out.anchors.consumed;
  consumed.insert(pinned_ids.begin(), pinned_ids.end());
  out.items = make_items(pseudoresidues, spins, consumed);

  const AssemblyProblem problem(out.items, seq, scoring, &stats, cfg.typing.missing_cb_penalty);
  if (out.items.empty()) {
    out.assembly = AssemblyResult{};
  } else if (cfg.strategy == Strategy::AStar) {
    out.assembly = astar_assemble(problem, cfg.search.astar_limit);
  } else {
    out.assembly = multi_start_greedy(problem, cfg.search.threads);
  }
  out.assignment = finalize_assignment(out.assembly, problem, spins, seq);

  std::map<std::string_view, const SpinSystem*> by_id;
  for (const auto& s : spins) by_id.emplace(s.id, &s);
  for (const auto& [pos, id] : out.assignment.mapping) {
    const auto& s = *by_id.at(id);
    if (s.intra.empty()) continue;
    const double score = type_score(s, seq[pos], stats, cfg.typing.missing_cb_penalty).score;
    if (score > cfg.typing.cutoff) out.mismatches.push_back({pos, id, score});
  }
  return out;
}

}  // namespace bbassign
