#include "doctest.h"

#include <cmath>
#include <string>

#include "bbassign/ingest.hpp"
#include "bbassign/synth.hpp"
#include "support.hpp"

using namespace bbassign;

namespace {

std::string stats_without(char letter) {
  std::string text = write_reference_stats(testsupport::shipped_stats());
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const auto line = text.substr(start, end - start + 1);
    if (line.empty() || line[0] != letter || line[1] != '\t') out += line;
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("parse_sequence") {
  CHECK(parse_sequence(">x\nMKV").str() == "MKV");
  CHECK(parse_sequence("mkv").str() == "MKV");
  CHECK(parse_sequence(">a\n>b\nMK V\n  gg\r\n").str() == "MKVGG");

  try {
    parse_sequence(">x\nMKZ");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
    CHECK(std::string(e.what()).find('Z') != std::string::npos);
  }
  CHECK_THROWS_AS(parse_sequence(">only a header\n"), ParseError);
  CHECK_THROWS_AS(parse_sequence(""), ParseError);
}

TEST_CASE("parse_spin_table rows") {
  const auto table = parse_spin_table(
      "id\tca_i\tcb_i\tca_prev\tcb_prev\n"
      "s1\t58.1\t32.4\t62.0\t69.5\n"
      "s2\t45.2\t.\t58.1\t32.4\n");
  REQUIRE(table.spins.size() == 2);
  const auto& s1 = table.spins[0];
  CHECK(s1.id == "s1");
  CHECK(s1.intra.ca == 58.1);
  CHECK(s1.intra.cb == 32.4);
  CHECK(s1.prev.ca == 62.0);
  CHECK(s1.prev.cb == 69.5);
  const auto& s2 = table.spins[1];
  CHECK_FALSE(s2.intra.cb.has_value());
  CHECK(s2.intra.ca == 45.2);

  try {
    parse_spin_table("id\tca_i\tcb_i\tca_prev\tcb_prev\ns3\t.\t.\t.\t.\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("no observable shifts") != std::string::npos);
    CHECK(e.line() == 2);
  }
}

TEST_CASE("parse_spin_table rejects bad input") {
  const std::string header = "id\tca_i\tcb_i\tca_prev\tcb_prev\n";
  CHECK_THROWS_AS(parse_spin_table(header + "s1\t58\t.\t.\t.\ns1\t59\t.\t.\t.\n"), ParseError);
  CHECK_THROWS_AS(parse_spin_table(header + "s1\tfoo\t.\t.\t.\n"), ParseError);
  CHECK_THROWS_AS(parse_spin_table(header + "s1\t58\t.\t.\n"), ParseError);
  CHECK_THROWS_AS(parse_spin_table("id\tca_i\tcb_i\tca_prev\ns1\t1\t2\t3\n"), ParseError);
  CHECK_THROWS_AS(parse_spin_table(""), ParseError);
}

TEST_CASE("spin table keeps passthrough columns and any column order") {
  const auto table = parse_spin_table(
      "H\tcb_prev\tid\tN\tca_prev\tcb_i\tca_i\n"
      "8.1\t.\tx\t120.5\t56.0\t30.0\t55.0\n");
  CHECK(table.extra_columns == std::vector<std::string>{"H", "N"});
  REQUIRE(table.spins.size() == 1);
  CHECK(table.spins[0].extra == std::vector<std::string>{"8.1", "120.5"});
  CHECK(table.spins[0].intra.ca == 55.0);
  CHECK(table.spins[0].prev.ca == 56.0);
  CHECK(parse_spin_table(write_spin_table(table)) == table);
}

TEST_CASE("load_reference_stats") {
  const auto& stats = testsupport::shipped_stats();
  CHECK_FALSE(stats[Residue::G].cb_mean.has_value());
  CHECK(stats[Residue::A].ca_mean == 53.13);

  try {
    load_reference_stats(stats_without('W'));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find('W') != std::string::npos);
  }

  std::string zero_sd = write_reference_stats(stats);
  const auto at = zero_sd.find("\nA\t");
  REQUIRE(at != std::string::npos);
  const auto line_end = zero_sd.find('\n', at + 1);
  zero_sd.replace(at + 1, line_end - at - 1, "A\t53.13\t0\t19.01\t1.83");
  CHECK_THROWS_AS(load_reference_stats(zero_sd), ParseError);

  std::string dup = write_reference_stats(stats) + "A\t53.13\t1.98\t19.01\t1.83\n";
  CHECK_THROWS_AS(load_reference_stats(dup), ParseError);
}

TEST_CASE("write_assignment") {
  const auto seq = parse_sequence("MKV");
  const Assignment empty;
  const auto text = write_assignment(empty, seq);
  CHECK(text ==
        "pos\tres\tspin_id\tlink_error_to_next\n"
        "1\tM\t.\t.\n"
        "2\tK\t.\t.\n"
        "3\tV\t.\t.\n");
  CHECK(write_assignment(empty, seq) == text);

  Assignment a;
  a.mapping = {{0, "s7"}, {1, "s2"}};
  a.link_to_next = {{0, 0.25}};
  a.total_error = 0.25;
  const auto back = parse_assignment(write_assignment(a, seq));
  CHECK(back.mapping == a.mapping);
  CHECK(back.link_to_next == a.link_to_next);
  CHECK(back.total_error == doctest::Approx(0.25));
}

TEST_CASE("format_number is shortest round trip") {
  CHECK(format_number(58.1) == "58.1");
  CHECK(format_number(0.0) == "0");
  for (double v : {0.1, 1.0 / 3.0, 57.123456789012, 1e-7}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("generated spin tables survive a write and parse") {
  PortableRng rng(7);
  for (int k = 0; k < 20; ++k) {
    const auto seq = random_sequence(10 + rng.below(30), rng);
    GeneratorConfig g;
    g.seed = static_cast<std::uint64_t>(k);
    g.noise_sigma = 0.3;
    g.missing_prob = 0.2;
    const auto data = generate_dataset(seq, testsupport::shipped_stats(), g);
    const SpinTable table{{}, data.spins};
    CHECK(parse_spin_table(write_spin_table(table)) == table);
    CHECK(parse_sequence(write_sequence(seq)) == seq);
  }
}

TEST_CASE("read_text_file names the missing path") {
  try {
    read_text_file("/nonexistent/dir/file.tsv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/file.tsv") != std::string::npos);
  }
}
