#include "doctest.h"

#include <filesystem>

#include "bbassign/cli.hpp"
#include "bbassign/ingest.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace bbassign;
namespace fs = std::filesystem;
using testsupport::run_tool;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(BBASSIGN_TEST_WORKDIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kSeq40 = "MKWLGSEVHAYTGDNRCAIKLWEGMFTSYAGHVDKLRNEQ";

}  // namespace

TEST_CASE("generate, assign and evaluate on a noise-free 40-residue sequence") {
  const auto dir = fresh_dir("roundtrip");
  write_text_file(dir / "seq.fasta", ">t\n" + kSeq40 + "\n");
  const auto gen = run_tool({"generate", "--sequence", (dir / "seq.fasta").string(), "--stats", BBASSIGN_TEST_STATS,
                             "--out", (dir / "data").string(), "--seed", "1"});
  REQUIRE(gen.code == kExitOk);
  CHECK(gen.out.empty());
  for (auto f : {"spins.tsv", "truth.tsv", "sequence.fasta", "config.json"}) CHECK(fs::exists(dir / "data" / f));

  const auto assign = run_tool({"assign", "--sequence", (dir / "seq.fasta").string(), "--spins",
                                (dir / "data/spins.tsv").string(), "--stats", BBASSIGN_TEST_STATS, "--out",
                                (dir / "out").string()});
  REQUIRE(assign.code == kExitOk);
  CHECK(assign.out.empty());
  const auto rows = read_text_file(dir / "out/assignment.tsv");
  CHECK(std::count(rows.begin(), rows.end(), '\n') == static_cast<long>(kSeq40.size() + 1));
  const auto report = nlohmann::json::parse(read_text_file(dir / "out/report.json"));
  CHECK_FALSE(report["matched_subsets"].empty());
  const auto run = nlohmann::json::parse(read_text_file(dir / "out/run.json"));
  CHECK(run["params"]["cutoff"] == 9.0);
  CHECK(run["params"]["scoring"]["break_penalty"] == 10.0);

  const auto eval = run_tool({"evaluate", "--assignment", (dir / "out/assignment.tsv").string(), "--truth",
                              (dir / "data/truth.tsv").string(), "--spins", (dir / "data/spins.tsv").string(),
                              "--sequence", (dir / "seq.fasta").string()});
  REQUIRE(eval.code == kExitOk);
  const auto j = nlohmann::json::parse(eval.out);
  CHECK(j["accuracy"] == 1.0);
  CHECK(j["violations"].empty());
  CHECK(j["total_error_pred"].get<double>() == doctest::Approx(j["total_error_truth"].get<double>()));
}

TEST_CASE("evaluate with an empty assignment reports zero accuracy") {
  const auto dir = fresh_dir("empty_eval");
  write_text_file(dir / "a.tsv", "pos\tres\tspin_id\tlink_error_to_next\n1\tM\t.\t.\n2\tK\t.\t.\n");
  write_text_file(dir / "t.tsv", "pos\tspin_id\n1\tss001\n2\tss002\n");
  const auto r = run_tool({"evaluate", "--assignment", (dir / "a.tsv").string(), "--truth", (dir / "t.tsv").string()});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["accuracy"] == 0.0);
  CHECK(j["n_assigned"] == 0);
}

TEST_CASE("greedy and A* reports on the same instance") {
  const auto dir = fresh_dir("strategies");
  write_text_file(dir / "seq.fasta", ">t\nMKWLGSEVHA\n");
  REQUIRE(run_tool({"generate", "--sequence", (dir / "seq.fasta").string(), "--stats", BBASSIGN_TEST_STATS, "--out",
                    (dir / "data").string(), "--seed", "3", "--noise-sigma", "0.3", "--missing-prob", "0.1"})
              .code == kExitOk);
  double totals[2] = {0.0, 0.0};
  const char* names[2] = {"greedy", "astar"};
  for (int k = 0; k < 2; ++k) {
    const auto out = dir / names[k];
    REQUIRE(run_tool({"assign", "--sequence", (dir / "seq.fasta").string(), "--spins",
                      (dir / "data/spins.tsv").string(), "--stats", BBASSIGN_TEST_STATS, "--out", out.string(),
                      "--strategy", names[k]})
                .code == kExitOk);
    totals[k] = nlohmann::json::parse(read_text_file(out / "report.json"))["assembly_error"].get<double>();
  }
  CHECK(totals[1] <= totals[0] + 1e-9);
}

TEST_CASE("exit codes") {
  const auto dir = fresh_dir("exit_codes");
  write_text_file(dir / "seq.fasta", "MKVGL\n");
  write_text_file(dir / "bad_spins.tsv", "id\tca_i\tcb_i\tca_prev\tcb_prev\ns1\tabc\t.\t.\t.\n");
  const auto bad = run_tool({"assign", "--sequence", (dir / "seq.fasta").string(), "--spins",
                             (dir / "bad_spins.tsv").string(), "--stats", BBASSIGN_TEST_STATS, "--out",
                             (dir / "o").string()});
  CHECK(bad.code == kExitParseError);
  CHECK(bad.err.find("bad_spins.tsv") != std::string::npos);
  CHECK(bad.out.empty());

  const auto no_stats = run_tool({"generate", "--sequence", (dir / "seq.fasta").string(), "--stats",
                                  (dir / "missing.tsv").string(), "--out", (dir / "g").string()});
  CHECK(no_stats.code == kExitParseError);

  CHECK(run_tool({"assign"}).code == kExitParseError);
  CHECK(run_tool({"frobnicate"}).code == kExitParseError);

  REQUIRE(run_tool({"generate", "--sequence", (dir / "seq.fasta").string(), "--stats", BBASSIGN_TEST_STATS, "--out",
                    (dir / "data").string()})
              .code == kExitOk);
  write_text_file(dir / "anchors.tsv", "pos\tspin_ids\n2\tss001,ss002\n3\tss003\n");
  const auto clash = run_tool({"assign", "--sequence", (dir / "seq.fasta").string(), "--spins",
                               (dir / "data/spins.tsv").string(), "--stats", BBASSIGN_TEST_STATS, "--anchors",
                               (dir / "anchors.tsv").string(), "--out", (dir / "o").string()});
  CHECK(clash.code == kExitInfeasibleAnchors);
}

TEST_CASE("every subcommand is byte-for-byte deterministic") {
  const auto dir = fresh_dir("determinism");
  write_text_file(dir / "seq.fasta", ">t\n" + kSeq40 + "\n");
  for (const char* run : {"r1", "r2"}) {
    const auto base = dir / run;
    REQUIRE(run_tool({"generate", "--sequence", (dir / "seq.fasta").string(), "--stats", BBASSIGN_TEST_STATS,
                      "--out", (base / "gen").string(), "--seed", "7", "--noise-sigma", "0.05"})
                .code == kExitOk);
  }
  CHECK(testsupport::read_tree(dir / "r1/gen") == testsupport::read_tree(dir / "r2/gen"));
  for (const char* run : {"r1", "r2"}) {
    REQUIRE(run_tool({"assign", "--sequence", (dir / "seq.fasta").string(), "--spins",
                      (dir / "r1/gen/spins.tsv").string(), "--stats", BBASSIGN_TEST_STATS, "--out",
                      (dir / run / "assign").string(), "--threads", "4"})
                .code == kExitOk);
  }
  CHECK(testsupport::read_tree(dir / "r1/assign") == testsupport::read_tree(dir / "r2/assign"));
  std::string printed[2];
  for (int k = 0; k < 2; ++k) {
    const auto r = run_tool({"evaluate", "--assignment", (dir / "r1/assign/assignment.tsv").string(), "--truth",
                             (dir / "r1/gen/truth.tsv").string(), "--out", (dir / (k ? "r2" : "r1") / "eval").string()});
    REQUIRE(r.code == kExitOk);
    printed[k] = r.out;
  }
  CHECK(printed[0] == printed[1]);
  CHECK(testsupport::read_tree(dir / "r1/eval") == testsupport::read_tree(dir / "r2/eval"));
}

TEST_CASE("the stats path falls back to the environment") {
  ::setenv("BACKBONE_ASSIGN_STATS", "/tmp/somewhere/stats.tsv", 1);
  CHECK(default_stats_path() == fs::path("/tmp/somewhere/stats.tsv"));
  ::unsetenv("BACKBONE_ASSIGN_STATS");
  CHECK(default_stats_path().filename() == "reference_stats.tsv");
}
