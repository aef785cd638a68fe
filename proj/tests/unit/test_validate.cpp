#include "doctest.h"

#include "bbassign/ingest.hpp"
#include "bbassign/linking.hpp"
#include "bbassign/pipeline.hpp"
#include "bbassign/synth.hpp"
#include "bbassign/validate.hpp"
#include "support.hpp"

using namespace bbassign;
using testsupport::spin;

namespace {

const std::vector<SpinSystem> kSpins = {
    spin("a", 56.0, 30.0, {}, {}),
    spin("b", 58.0, 40.0, 56.1, 30.1),
    spin("c", 45.0, {}, 58.0, 40.0),
};

}  // namespace

TEST_CASE("empty mapping is valid with zero error") {
  const auto seq = parse_sequence("MKV");
  const auto report = validate_assignment(Assignment{}, kSpins, seq, ScoringConfig{});
  CHECK(report.ok());
  CHECK(report.recomputed_error == 0.0);

  Assignment nonzero;
  nonzero.total_error = 1.0;
  CHECK_FALSE(validate_assignment(nonzero, kSpins, seq, ScoringConfig{}).ok());
}

TEST_CASE("a duplicated id is an injectivity violation") {
  const auto seq = parse_sequence("MKVL");
  Assignment a;
  a.mapping = {{0, "a"}, {2, "a"}};
  const auto report = validate_assignment(a, kSpins, seq, ScoringConfig{});
  REQUIRE_FALSE(report.ok());
  bool named = false;
  for (const auto& v : report.violations) named = named || v.find("'a'") != std::string::npos;
  CHECK(named);
}

TEST_CASE("validator recomputes link errors and flags bad entries") {
  const auto seq = parse_sequence("MKGP");
  const ScoringConfig cfg;
  Assignment a;
  a.mapping = {{0, "a"}, {1, "b"}, {2, "c"}};
  a.link_to_next = adjacent_link_costs(a.mapping, kSpins, cfg);
  REQUIRE(a.link_to_next.size() == 2);
  CHECK(a.link_to_next[0] == doctest::Approx(link_error(kSpins[0], kSpins[1], cfg).value));
  a.total_error = a.link_to_next[0] + a.link_to_next[1];
  const auto good = validate_assignment(a, kSpins, seq, cfg);
  CHECK(good.ok());
  CHECK(good.recomputed_error == doctest::Approx(a.total_error).epsilon(1e-12));

  auto wrong_total = a;
  wrong_total.total_error += 1e-6;
  CHECK_FALSE(validate_assignment(wrong_total, kSpins, seq, cfg).ok());

  auto unknown = a;
  unknown.mapping[1] = "zz";
  CHECK_FALSE(validate_assignment(unknown, kSpins, seq, cfg).ok());

  auto on_proline = a;
  on_proline.mapping = {{3, "a"}};
  on_proline.link_to_next.clear();
  on_proline.total_error = 0.0;
  CHECK_FALSE(validate_assignment(on_proline, kSpins, seq, cfg).ok());

  auto past_end = on_proline;
  past_end.mapping = {{9, "a"}};
  CHECK_FALSE(validate_assignment(past_end, kSpins, seq, cfg).ok());

  auto both = on_proline;
  both.mapping = {{0, "a"}};
  both.unassigned = {"a"};
  CHECK_FALSE(validate_assignment(both, kSpins, seq, cfg).ok());
}

TEST_CASE("pipeline output on a 10-residue synthetic instance validates") {
  const auto& stats = testsupport::shipped_stats();
  const auto seq = parse_sequence("MGKAWLGSEV");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorConfig g;
    g.seed = seed;
    g.noise_sigma = seed % 2 ? 0.0 : 0.05;
    const auto data = generate_dataset(seq, stats, g);
    const PipelineConfig cfg;
    const auto out = run_pipeline(seq, data.spins, stats, cfg);
    const auto report = validate_assignment(out.assignment, data.spins, seq, cfg.search.scoring);
    CHECK(report.ok());
    CHECK(std::abs(report.recomputed_error - out.assignment.total_error) <= kErrorTolerance);
  }
}
