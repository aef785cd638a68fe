#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bbassign/model.hpp"

namespace bbassign {

/// Spin systems plus the names of any passthrough columns, in file order.
struct SpinTable {
  std::vector<std::string> extra_columns;
  std::vector<SpinSystem> spins;

  bool operator==(const SpinTable&) const = default;
};

struct DatasetBundle {
  ProteinSequence sequence;
  SpinTable spins;
  ReferenceStats stats;
};

// FASTA-like: optional '>' header lines, then residue letters. Whitespace is
// ignored and letters are case-folded.
ProteinSequence parse_sequence(std::string_view text);
std::string write_sequence(const ProteinSequence& seq, std::string_view header = "sequence");

// TSV with required columns id, ca_i, cb_i, ca_prev, cb_prev; "." marks a
// missing shift. Other columns are kept verbatim.
SpinTable parse_spin_table(std::string_view text);
std::string write_spin_table(const SpinTable& table);

// TSV `res ca_mean ca_sd cb_mean cb_sd`, one row per residue code.
ReferenceStats load_reference_stats(std::string_view text);
std::string write_reference_stats(const ReferenceStats& stats);

// TSV `pos res spin_id link_error_to_next`, positions 1-based.
std::string write_assignment(const Assignment& a, const ProteinSequence& seq);
Assignment parse_assignment(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Whole-file read; throws ParseError naming the path when unreadable.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

DatasetBundle load_dataset(const std::filesystem::path& sequence_path,
                           const std::filesystem::path& spins_path,
                           const std::filesystem::path& stats_path);

}  // namespace bbassign
