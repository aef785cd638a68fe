#include "bbassign/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bbassign/ingest.hpp"
#include "bbassign/pipeline.hpp"
#include "bbassign/synth.hpp"
#include "bbassign/validate.hpp"

#ifndef BBASSIGN_DEFAULT_STATS
#define BBASSIGN_DEFAULT_STATS "data/reference_stats.tsv"
#endif

namespace bbassign {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

fs::path default_stats_path() {
  if (const char* env = std::getenv("BACKBONE_ASSIGN_STATS"); env && *env) return env;
  return BBASSIGN_DEFAULT_STATS;
}

namespace {

struct AssignOptions {
  std::string sequence;
  std::string spins;
  std::string stats;
  std::string anchors;
  std::string out;
  std::string strategy = "greedy";
  std::uint64_t seed = 1;
  double sigma_link = ScoringConfig{}.sigma_link_ca;
  PipelineConfig pipeline;
};

struct GenerateOptions {
  std::string sequence;
  std::string stats;
  std::string out;
  GeneratorConfig gen;
};

struct EvaluateOptions {
  std::string assignment;
  std::string truth;
  std::string spins;
  std::string sequence;
  std::string out;
  double sigma_link = ScoringConfig{}.sigma_link_ca;
  ScoringConfig scoring;
};

std::string resolve_stats(const std::string& flag) {
  return flag.empty() ? default_stats_path().string() : flag;
}

template <class Fn>
auto with_context(const std::string& path, Fn&& fn) {
  const auto text = read_text_file(path);
  try {
    return fn(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line(), e.column());
  }
}

Json scoring_json(const ScoringConfig& s) {
  Json j;
  j["sigma_link_ca"] = s.sigma_link_ca;
  j["sigma_link_cb"] = s.sigma_link_cb;
  j["break_penalty"] = s.break_penalty;
  j["unplaced_penalty"] = s.unplaced_penalty;
  j["predecessor_evidence"] = s.predecessor_evidence;
  j["type_weight"] = s.type_weight;
  return j;
}

Json params_json(const AssignOptions& o) {
  const auto& p = o.pipeline;
  Json j;
  j["strategy"] = std::string(to_string(p.strategy));
  j["cutoff"] = p.typing.cutoff;
  j["missing_cb_penalty"] = p.typing.missing_cb_penalty;
  j["glycine_bonus"] = p.typing.glycine_bonus;
  j["min_uniqueness"] = p.typing.min_uniqueness;
  j["max_subset_len"] = p.typing.max_len;
  j["max_subsets"] = p.typing.max_subsets;
  j["schedule"] = {{"start", p.schedule_start}, {"step", p.schedule_step}, {"max", p.schedule_max}};
  j["scoring"] = scoring_json(p.search.scoring);
  j["astar_limit"] = p.search.astar_limit;
  j["threads"] = p.search.threads;
  j["seed"] = o.seed;
  return j;
}

Json subset_json(const AnchorSubset& s) {
  std::string residues;
  for (auto r : s.residues) residues += to_letter(r);
  return Json{{"start_pos", s.start_pos + 1}, {"residues", residues}, {"uniqueness", s.uniqueness_score}};
}

// Non-blank lines after the header; the assignment file has one per position.
std::size_t count_data_rows(std::string_view text) {
  std::size_t rows = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    if (text.substr(begin, end - begin).find_first_not_of(" \t\r") != std::string_view::npos) ++rows;
    begin = end + 1;
  }
  return rows > 0 ? rows - 1 : 0;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

int cmd_assign(const AssignOptions& o, std::ostream& err) {
  const auto stats_path = resolve_stats(o.stats);
  const auto dataset = load_dataset(o.sequence, o.spins, stats_path);
  std::vector<FixedAnchor> fixed;
  if (!o.anchors.empty()) {
    fixed = with_context(o.anchors, [](const std::string& t) { return parse_fixed_anchors(t); });
  }

  auto cfg = o.pipeline;
  cfg.strategy = parse_strategy(o.strategy);
  cfg.search.scoring.sigma_link_ca = o.sigma_link;
  cfg.search.scoring.sigma_link_cb = o.sigma_link;
  (void)cfg.schedule();  // validates the schedule before any work

  const auto& spins = dataset.spins.spins;
  PipelineOutcome result;
  try {
    result = run_pipeline(dataset.sequence, spins, dataset.stats, cfg, fixed);
  } catch (const std::invalid_argument& e) {
    // Anchors naming unknown or duplicated spin systems are input errors.
    if (o.anchors.empty()) throw;
    throw ParseError(o.anchors + ": " + e.what());
  }
  const auto check = validate_assignment(result.assignment, spins, dataset.sequence, cfg.search.scoring);
  if (!check.ok()) {
    for (const auto& v : check.violations) err << "internal validation failure: " << v << "\n";
    return kExitFailure;
  }

  ensure_dir(o.out);
  const fs::path out_dir(o.out);
  write_text_file(out_dir / "assignment.tsv", write_assignment(result.assignment, dataset.sequence));

  AssignOptions echo = o;
  echo.pipeline = cfg;
  Json report;
  report["strategy"] = std::string(to_string(cfg.strategy));
  report["n_positions"] = dataset.sequence.size();
  report["n_spin_systems"] = spins.size();
  report["n_chain_items"] = result.items.size();
  report["n_assigned"] = result.assignment.mapping.size();
  report["assembly_error"] = result.assembly.total_error;
  report["assignment_error"] = result.assignment.total_error;
  report["start_item"] = result.assembly.start_item;
  Json matched = Json::array();
  for (const auto& m : result.anchors.matched) {
    auto j = subset_json(m.subset);
    j["members"] = m.pseudoresidue.members;
    j["tolerance"] = m.tolerance;
    matched.push_back(j);
  }
  report["matched_subsets"] = matched;
  Json unmatched = Json::array();
  for (const auto& s : result.anchors.unmatched) unmatched.push_back(subset_json(s));
  report["unmatched_subsets"] = unmatched;
  Json pinned = Json::array();
  for (const auto& p : result.fixed) pinned.push_back({{"pos", *p.anchor_pos + 1}, {"members", p.members}});
  report["pinned_anchors"] = pinned;
  Json mismatches = Json::array();
  for (const auto& m : result.mismatches) {
    mismatches.push_back({{"pos", m.pos + 1},
                          {"res", std::string(1, to_letter(dataset.sequence[m.pos]))},
                          {"spin_id", m.spin_id},
                          {"type_score", m.score}});
  }
  report["type_mismatches"] = mismatches;
  report["unassigned"] = result.assignment.unassigned;
  write_text_file(out_dir / "report.json", report.dump(2) + "\n");

  Json run;
  run["command"] = "assign";
  run["inputs"] = {{"sequence", o.sequence}, {"spins", o.spins}, {"stats", stats_path}, {"anchors", o.anchors}};
  run["params"] = params_json(echo);
  write_text_file(out_dir / "run.json", run.dump(2) + "\n");

  err << "assigned " << result.assignment.mapping.size() << "/" << dataset.sequence.size()
      << " positions, assembly error " << result.assembly.total_error << "\n";
  return kExitOk;
}

int cmd_generate(const GenerateOptions& o) {
  const auto stats_path = resolve_stats(o.stats);
  const auto seq = with_context(o.sequence, [](const std::string& t) { return parse_sequence(t); });
  const auto stats = with_context(stats_path, [](const std::string& t) { return load_reference_stats(t); });
  const auto data = generate_dataset(seq, stats, o.gen);

  ensure_dir(o.out);
  const fs::path out_dir(o.out);
  write_text_file(out_dir / "spins.tsv", write_spin_table(SpinTable{{}, data.spins}));
  write_text_file(out_dir / "truth.tsv", write_truth(data.truth));
  write_text_file(out_dir / "sequence.fasta", write_sequence(seq));

  Json config = Json::parse(write_generator_config(o.gen));
  config["sequence"] = o.sequence;
  config["stats"] = stats_path;
  config["n_positions"] = seq.size();
  config["n_spin_systems"] = data.spins.size();
  write_text_file(out_dir / "config.json", config.dump(2) + "\n");
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  const auto pred = with_context(o.assignment, [](const std::string& t) { return parse_assignment(t); });
  const auto truth = with_context(o.truth, [](const std::string& t) { return parse_truth(t); });

  const auto n_positions = count_data_rows(read_text_file(o.assignment));

  EvaluationReport report;
  try {
    report = evaluate_assignment(pred, truth, n_positions);
  } catch (const std::invalid_argument& e) {
    throw ParseError(o.assignment + ": " + e.what());
  }

  Json j;
  j["n_positions"] = report.n_positions;
  j["n_detectable"] = report.n_detectable;
  j["n_assigned"] = report.n_assigned;
  j["n_correct"] = report.n_correct;
  j["accuracy"] = report.accuracy;
  j["total_error_pred"] = report.total_error_pred;
  j["total_error_truth"] = nullptr;

  if (!o.spins.empty() && !o.sequence.empty()) {
    const auto table = with_context(o.spins, [](const std::string& t) { return parse_spin_table(t); });
    const auto seq = with_context(o.sequence, [](const std::string& t) { return parse_sequence(t); });
    ScoringConfig scoring = o.scoring;
    scoring.sigma_link_ca = scoring.sigma_link_cb = o.sigma_link;
    j["total_error_truth"] = truth_assignment(truth, table.spins, scoring).total_error;
    const auto check = validate_assignment(pred, table.spins, seq, scoring);
    j["violations"] = check.violations;
  } else if (!o.spins.empty() || !o.sequence.empty()) {
    err << "note: --spins and --sequence are needed together to price the truth\n";
  }

  const auto text = j.dump(2) + "\n";
  out << text;
  if (!o.out.empty()) {
    ensure_dir(o.out);
    write_text_file(fs::path(o.out) / "evaluation.json", text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential assignment of protein backbone NMR spin systems"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  AssignOptions a;
  auto* assign = app.add_subcommand("assign", "Assign spin systems to sequence positions");
  assign->add_option("--sequence", a.sequence, "Protein sequence (FASTA-like)")->required();
  assign->add_option("--spins", a.spins, "Spin-system table (TSV)")->required();
  assign->add_option("--stats", a.stats, "Reference statistics (TSV); default $BACKBONE_ASSIGN_STATS or the shipped table");
  assign->add_option("--anchors", a.anchors, "Optional TSV of pinned chains: pos, comma-separated spin ids");
  assign->add_option("--out", a.out, "Output directory")->required();
  assign->add_option("--strategy", a.strategy, "greedy | astar")
      ->check(CLI::IsMember({"greedy", "astar"}))
      ->capture_default_str();
  assign->add_option("--schedule-start", a.pipeline.schedule_start, "First anchor-matching tolerance (ppm)")
      ->capture_default_str();
  assign->add_option("--schedule-step", a.pipeline.schedule_step, "Tolerance increment (ppm)")->capture_default_str();
  assign->add_option("--schedule-max", a.pipeline.schedule_max, "Last tolerance (ppm)")->capture_default_str();
  assign->add_option("--sigma-link", a.sigma_link, "Link noise scale for Cα and Cβ (ppm)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  assign->add_option("--min-uniqueness", a.pipeline.typing.min_uniqueness, "Anchor residue uniqueness threshold")
      ->capture_default_str();
  assign->add_option("--cutoff", a.pipeline.typing.cutoff, "Residue-type candidate cutoff (σ² units)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  assign->add_option("--max-subset-len", a.pipeline.typing.max_len, "Longest anchor subset")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  assign->add_option("--max-subsets", a.pipeline.typing.max_subsets, "Most anchor subsets kept")->capture_default_str();
  assign->add_option("--missing-cb-penalty", a.pipeline.typing.missing_cb_penalty, "Typing penalty for an absent Cβ")
      ->capture_default_str();
  assign->add_option("--glycine-bonus", a.pipeline.typing.glycine_bonus, "Uniqueness credit for glycine")
      ->capture_default_str();
  assign->add_option("--break-penalty", a.pipeline.search.scoring.break_penalty, "Cost of a chain break; caps every link cost")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  assign->add_option("--unplaced-penalty", a.pipeline.search.scoring.unplaced_penalty, "Cost per item left out of the chain")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  assign->add_option("--predecessor-evidence", a.pipeline.search.scoring.predecessor_evidence,
                     "Link error at or below which a mutual best match counts as observed")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  assign->add_option("--type-weight", a.pipeline.search.scoring.type_weight,
                     "Weight of the residue-type fit of each placed spin system")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  assign->add_option("--astar-limit", a.pipeline.search.astar_limit, "Most chain items A* accepts")->capture_default_str();
  assign->add_option("--seed", a.seed, "Recorded in run metadata")->capture_default_str();
  assign->add_option("--threads", a.pipeline.search.threads, "Worker threads for multi-start greedy")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  GenerateOptions g;
  auto* generate = app.add_subcommand("generate", "Simulate a spin-system table with known truth");
  generate->add_option("--sequence", g.sequence, "Protein sequence (FASTA-like)")->required();
  generate->add_option("--stats", g.stats, "Reference statistics (TSV)");
  generate->add_option("--out", g.out, "Output directory")->required();
  generate->add_option("--noise-sigma", g.gen.noise_sigma, "Gaussian shift noise (ppm)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  generate->add_option("--missing-prob", g.gen.missing_prob, "Per-field dropout probability")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  generate->add_option("--seed", g.gen.seed, "Random seed")->capture_default_str();
  generate->add_flag("--strict-proline", g.gen.strict_proline, "Drop i-1 shifts of residues following a proline");

  EvaluateOptions e;
  auto* evaluate = app.add_subcommand("evaluate", "Compare an assignment with ground truth");
  evaluate->add_option("--assignment", e.assignment, "Assignment TSV from `assign`")->required();
  evaluate->add_option("--truth", e.truth, "truth.tsv from `generate`")->required();
  evaluate->add_option("--spins", e.spins, "Spin table, to price the truth and validate");
  evaluate->add_option("--sequence", e.sequence, "Sequence, to price the truth and validate");
  evaluate->add_option("--sigma-link", e.sigma_link, "Link noise scale (ppm)")->capture_default_str();
  evaluate->add_option("--break-penalty", e.scoring.break_penalty, "Cost of a chain break; caps every link cost")
      ->capture_default_str();
  evaluate->add_option("--out", e.out, "Also write evaluation.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitParseError;
  }

  try {
    if (*assign) return cmd_assign(a, err);
    if (*generate) return cmd_generate(g);
    if (*evaluate) return cmd_evaluate(e, out, err);
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitParseError;
  } catch (const InfeasibleAnchors& ex) {
    err << "error: infeasible anchors: " << ex.what() << "\n";
    return kExitInfeasibleAnchors;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace bbassign
