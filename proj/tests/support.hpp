#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bbassign/cli.hpp"
#include "bbassign/ingest.hpp"
#include "bbassign/linking.hpp"
#include "bbassign/model.hpp"
#include "bbassign/search.hpp"
#include "bbassign/synth.hpp"

namespace testsupport {

inline const bbassign::ReferenceStats& shipped_stats() {
  static const bbassign::ReferenceStats stats =
      bbassign::load_reference_stats(bbassign::read_text_file(BBASSIGN_TEST_STATS));
  return stats;
}

inline bbassign::SpinSystem spin(std::string id, std::optional<double> ca_i, std::optional<double> cb_i,
                                 std::optional<double> ca_prev, std::optional<double> cb_prev) {
  return {std::move(id), {ca_i, cb_i}, {ca_prev, cb_prev}, {}};
}

// A stats table where every residue has the same means except where overridden.
inline std::array<bbassign::ResidueStats, bbassign::kResidueCount> flat_table() {
  std::array<bbassign::ResidueStats, bbassign::kResidueCount> t{};
  for (std::size_t i = 0; i < bbassign::kResidueCount; ++i) {
    t[i] = {40.0 + 2.0 * static_cast<double>(i), 1.0, 20.0 + 3.0 * static_cast<double>(i), 1.0};
  }
  t[bbassign::index_of(bbassign::Residue::G)].cb_mean.reset();
  t[bbassign::index_of(bbassign::Residue::G)].cb_sd.reset();
  return t;
}

// A small seeded assembly instance: a short sequence (prolines allowed), its
// synthetic spin systems, and chain items that may include an anchored pair.
struct Instance {
  bbassign::ProteinSequence seq;
  std::vector<bbassign::SpinSystem> spins;
  std::vector<bbassign::ChainItem> items;
};

inline Instance random_instance(std::uint64_t seed, std::size_t max_items) {
  using namespace bbassign;
  PortableRng rng(seed * 7919 + 17);
  const std::size_t len = 3 + rng.below(max_items + 1);
  const auto seq = random_sequence(len, rng);
  GeneratorConfig g;
  g.seed = seed;
  const double noise[] = {0.0, 0.05, 0.3, 1.0};
  const double missing[] = {0.0, 0.1, 0.3};
  g.noise_sigma = noise[rng.below(4)];
  g.missing_prob = missing[rng.below(3)];
  auto data = generate_dataset(seq, shipped_stats(), g);

  Instance inst{seq, data.spins, {}};
  std::set<std::string> consumed;
  std::vector<Pseudoresidue> pseudo;
  if (rng.bernoulli(0.4) && seq.size() >= 2) {
    const auto p = rng.below(seq.size() - 1);
    const auto a = data.truth.mapping.find(p);
    const auto b = data.truth.mapping.find(p + 1);
    if (a != data.truth.mapping.end() && b != data.truth.mapping.end()) {
      try {
        pseudo.push_back(build_pseudoresidue({a->second, b->second}, data.spins, p));
        consumed = {a->second, b->second};
      } catch (const std::invalid_argument&) {
      }
    }
  }
  inst.items = make_items(pseudo, data.spins, consumed);
  if (inst.items.size() > max_items) inst.items.resize(max_items);
  return inst;
}

// Cheapest cost of finishing a chain whose tail is `tail` and whose next free
// position is `end`, found by trying every continuation.
inline double brute_remaining(const bbassign::AssemblyProblem& problem, std::vector<char>& placed,
                              std::size_t tail, std::size_t end) {
  double best = std::numeric_limits<double>::infinity();
  bool extended = false;
  if (const auto slot = problem.next_slot(end)) {
    std::vector<std::size_t> next;
    problem.visit_candidates(*slot, [&](std::size_t i) { return placed[i] != 0; },
                             [&](std::size_t b) { next.push_back(b); });
    for (auto b : next) {
      extended = true;
      placed[b] = 1;
      const double rest = brute_remaining(problem, placed, b, slot->offset + problem.item(b).span());
      placed[b] = 0;
      best = std::min(best, problem.step_cost(tail, b, *slot) + rest);
    }
  }
  if (extended) return best;
  double left = 0.0;
  for (char c : placed) left += c ? 0.0 : problem.unplaced_penalty();
  return left;
}

// Minimum total over every maximal chain, from scratch.
inline double brute_optimum(const bbassign::AssemblyProblem& problem) {
  double best = static_cast<double>(problem.size()) * problem.unplaced_penalty();
  bool any = false;
  std::vector<char> placed(problem.size(), 0);
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const auto offset = problem.start_offset(i);
    if (!offset) continue;
    placed[i] = 1;
    const double total = problem.entry_cost(i, *offset) +
                         brute_remaining(problem, placed, i, *offset + problem.item(i).span());
    placed[i] = 0;
    best = any ? std::min(best, total) : total;
    any = true;
  }
  return best;
}

// Every regular file under `dir`, keyed by relative path.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[std::filesystem::relative(e.path(), dir).string()] = bbassign::read_text_file(e.path());
    }
  }
  return files;
}

// Runs the command-line tool in-process; stdout and stderr are captured.
struct CliRun {
  int code;
  std::string out;
  std::string err;
};

inline CliRun run_tool(std::vector<std::string> args) {
  args.insert(args.begin(), "bbassign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = bbassign::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace testsupport
