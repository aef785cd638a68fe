#include "bbassign/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace bbassign {
namespace {

constexpr std::string_view kMissing = ".";

ParseError parse_error(const std::string& msg, std::size_t line, std::size_t column = 0) {
  std::string where = "line " + std::to_string(line);
  if (column > 0) where += ", column " + std::to_string(column);
  return ParseError(where + ": " + msg, line, column);
}

// Splits on '\n', dropping a trailing '\r' from each line (CRLF input).
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(begin, end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    begin = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t begin = 0;
  for (;;) {
    const auto end = line.find('\t', begin);
    if (end == std::string_view::npos) {
      cells.push_back(line.substr(begin));
      return cells;
    }
    cells.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<double> parse_double(std::string_view cell) {
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// A carbon shift cell: "." or a finite number inside the sanity window.
std::optional<double> parse_carbon(std::string_view cell, std::string_view column, std::size_t line) {
  if (cell == kMissing) return std::nullopt;
  const auto value = parse_double(cell);
  if (!value) {
    throw parse_error("non-numeric value '" + std::string(cell) + "' in column " +
                          std::string(column),
                      line);
  }
  if (*value < kCarbonMinPpm || *value > kCarbonMaxPpm) {
    throw parse_error("carbon shift " + std::string(cell) + " in column " + std::string(column) +
                          " outside [0, 100] ppm",
                      line);
  }
  return value;
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string(kMissing);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

ProteinSequence parse_sequence(std::string_view text) {
  std::vector<Residue> residues;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = lines[ln];
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '>') continue;
    for (std::size_t col = 0; col < line.size(); ++col) {
      const char c = line[col];
      if (c == ' ' || c == '\t') continue;
      const auto r = residue_from_letter(c);
      if (!r) {
        throw parse_error(std::string("unknown residue letter '") + c + "'", ln + 1, col + 1);
      }
      residues.push_back(*r);
    }
  }
  if (residues.empty()) throw ParseError("empty protein sequence");
  if (residues.size() < 2) throw ParseError("protein sequence needs at least 2 residues");
  return ProteinSequence(std::move(residues));
}

std::string write_sequence(const ProteinSequence& seq, std::string_view header) {
  constexpr std::size_t kWidth = 60;
  std::string out = ">" + std::string(header) + "\n";
  const auto letters = seq.str();
  for (std::size_t i = 0; i < letters.size(); i += kWidth) {
    out += letters.substr(i, kWidth);
    out += '\n';
  }
  return out;
}

SpinTable parse_spin_table(std::string_view text) {
  static constexpr std::array<std::string_view, 5> kRequired = {"id", "ca_i", "cb_i", "ca_prev",
                                                                "cb_prev"};
  const auto lines = split_lines(text);
  std::size_t ln = 0;
  while (ln < lines.size() && is_blank(lines[ln])) ++ln;
  if (ln == lines.size()) throw ParseError("spin table is empty (header required)");

  const auto header = split_tabs(lines[ln]);
  std::array<std::size_t, 5> column_of{};
  column_of.fill(header.size());
  SpinTable table;
  std::vector<std::size_t> extra_index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    bool required = false;
    for (std::size_t k = 0; k < kRequired.size(); ++k) {
      if (header[c] == kRequired[k]) {
        if (column_of[k] != header.size()) {
          throw parse_error("duplicate column '" + std::string(header[c]) + "'", ln + 1);
        }
        column_of[k] = c;
        required = true;
      }
    }
    if (!required) {
      table.extra_columns.emplace_back(header[c]);
      extra_index.push_back(c);
    }
  }
  for (std::size_t k = 0; k < kRequired.size(); ++k) {
    if (column_of[k] == header.size()) {
      throw parse_error("missing required column '" + std::string(kRequired[k]) + "'", ln + 1);
    }
  }

  std::set<std::string> seen;
  for (++ln; ln < lines.size(); ++ln) {
    if (is_blank(lines[ln])) continue;
    const auto cells = split_tabs(lines[ln]);
    const auto line_no = ln + 1;
    if (cells.size() != header.size()) {
      throw parse_error("expected " + std::to_string(header.size()) + " columns, found " +
                            std::to_string(cells.size()),
                        line_no);
    }
    SpinSystem s;
    s.id = std::string(cells[column_of[0]]);
    if (s.id.empty() || s.id == kMissing) throw parse_error("missing spin system id", line_no);
    if (!seen.insert(s.id).second) throw parse_error("duplicate spin system id '" + s.id + "'", line_no);
    s.intra.ca = parse_carbon(cells[column_of[1]], kRequired[1], line_no);
    s.intra.cb = parse_carbon(cells[column_of[2]], kRequired[2], line_no);
    s.prev.ca = parse_carbon(cells[column_of[3]], kRequired[3], line_no);
    s.prev.cb = parse_carbon(cells[column_of[4]], kRequired[4], line_no);
    if (s.intra.empty() && s.prev.empty()) {
      throw parse_error("spin system '" + s.id + "' has no observable shifts", line_no);
    }
    for (auto c : extra_index) s.extra.emplace_back(cells[c]);
    table.spins.push_back(std::move(s));
  }
  return table;
}

std::string write_spin_table(const SpinTable& table) {
  std::string out = "id\tca_i\tcb_i\tca_prev\tcb_prev";
  for (const auto& c : table.extra_columns) out += "\t" + c;
  out += '\n';
  for (const auto& s : table.spins) {
    out += s.id;
    out += "\t" + optional_cell(s.intra.ca);
    out += "\t" + optional_cell(s.intra.cb);
    out += "\t" + optional_cell(s.prev.ca);
    out += "\t" + optional_cell(s.prev.cb);
    for (const auto& v : s.extra) out += "\t" + v;
    out += '\n';
  }
  return out;
}

ReferenceStats load_reference_stats(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t ln = 0;
  while (ln < lines.size() && is_blank(lines[ln])) ++ln;
  if (ln == lines.size()) throw ParseError("reference stats file is empty");
  const auto header = split_tabs(lines[ln]);
  const std::vector<std::string_view> expected = {"res", "ca_mean", "ca_sd", "cb_mean", "cb_sd"};
  if (header != expected) {
    throw parse_error("header must be 'res ca_mean ca_sd cb_mean cb_sd'", ln + 1);
  }

  std::array<ResidueStats, kResidueCount> table{};
  std::array<bool, kResidueCount> present{};
  for (++ln; ln < lines.size(); ++ln) {
    if (is_blank(lines[ln])) continue;
    const auto line_no = ln + 1;
    const auto cells = split_tabs(lines[ln]);
    if (cells.size() != 5) throw parse_error("expected 5 columns", line_no);
    if (cells[0].size() != 1 || !residue_from_letter(cells[0][0])) {
      throw parse_error("unknown residue '" + std::string(cells[0]) + "'", line_no);
    }
    const auto res = *residue_from_letter(cells[0][0]);
    const std::string name(1, to_letter(res));
    if (present[index_of(res)]) throw parse_error("duplicate residue " + name, line_no);
    present[index_of(res)] = true;

    auto number = [&](std::size_t c) {
      const auto v = parse_double(cells[c]);
      if (!v) {
        throw parse_error("non-numeric value '" + std::string(cells[c]) + "' for " + name, line_no);
      }
      return *v;
    };
    auto& s = table[index_of(res)];
    s.ca_mean = number(1);
    s.ca_sd = number(2);
    if (!(s.ca_sd > 0.0)) throw parse_error("ca_sd for " + name + " must be > 0", line_no);
    if (res == Residue::G) {
      if (cells[3] != kMissing || cells[4] != kMissing) {
        throw parse_error("glycine has no Cβ; use '.' for cb_mean and cb_sd", line_no);
      }
      continue;
    }
    if (cells[3] == kMissing || cells[4] == kMissing) {
      throw parse_error("missing Cβ statistics for " + name, line_no);
    }
    s.cb_mean = number(3);
    s.cb_sd = number(4);
    if (!(*s.cb_sd > 0.0)) throw parse_error("cb_sd for " + name + " must be > 0", line_no);
  }
  for (auto r : all_residues()) {
    if (!present[index_of(r)]) {
      throw ParseError(std::string("reference stats missing residue ") + to_letter(r));
    }
  }
  return ReferenceStats(table);
}

std::string write_reference_stats(const ReferenceStats& stats) {
  std::string out = "res\tca_mean\tca_sd\tcb_mean\tcb_sd\n";
  for (auto r : all_residues()) {
    const auto& s = stats[r];
    out += to_letter(r);
    out += "\t" + format_number(s.ca_mean) + "\t" + format_number(s.ca_sd);
    out += "\t" + optional_cell(s.cb_mean) + "\t" + optional_cell(s.cb_sd) + "\n";
  }
  return out;
}

std::string write_assignment(const Assignment& a, const ProteinSequence& seq) {
  std::string out = "pos\tres\tspin_id\tlink_error_to_next\n";
  for (std::size_t p = 0; p < seq.size(); ++p) {
    out += std::to_string(p + 1);
    out += '\t';
    out += to_letter(seq[p]);
    const auto it = a.mapping.find(p);
    out += "\t" + (it == a.mapping.end() ? std::string(kMissing) : it->second);
    const auto link = a.link_to_next.find(p);
    out += "\t" + (link == a.link_to_next.end() ? std::string(kMissing) : format_number(link->second));
    out += '\n';
  }
  return out;
}

Assignment parse_assignment(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t ln = 0;
  while (ln < lines.size() && is_blank(lines[ln])) ++ln;
  if (ln == lines.size()) throw ParseError("assignment file is empty");
  const std::vector<std::string_view> expected = {"pos", "res", "spin_id", "link_error_to_next"};
  if (split_tabs(lines[ln]) != expected) {
    throw parse_error("header must be 'pos res spin_id link_error_to_next'", ln + 1);
  }
  Assignment a;
  for (++ln; ln < lines.size(); ++ln) {
    if (is_blank(lines[ln])) continue;
    const auto line_no = ln + 1;
    const auto cells = split_tabs(lines[ln]);
    if (cells.size() != 4) throw parse_error("expected 4 columns", line_no);
    std::size_t pos = 0;
    const auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), pos);
    if (ec != std::errc() || ptr != cells[0].data() + cells[0].size() || pos == 0) {
      throw parse_error("invalid position '" + std::string(cells[0]) + "'", line_no);
    }
    --pos;
    if (cells[1].size() != 1 || !residue_from_letter(cells[1][0])) {
      throw parse_error("invalid residue '" + std::string(cells[1]) + "'", line_no);
    }
    if (cells[2] != kMissing) {
      if (!a.mapping.emplace(pos, std::string(cells[2])).second) {
        throw parse_error("duplicate position " + std::string(cells[0]), line_no);
      }
    }
    if (cells[3] != kMissing) {
      const auto v = parse_double(cells[3]);
      if (!v || *v < 0.0) throw parse_error("invalid link error '" + std::string(cells[3]) + "'", line_no);
      a.link_to_next[pos] = *v;
      a.total_error += *v;
    }
  }
  return a;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

template <class Fn>
auto with_file_context(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn(read_text_file(path));
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind("cannot read", 0) == 0) throw;
    throw ParseError(path.string() + ": " + msg, e.line(), e.column());
  }
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& sequence_path,
                           const std::filesystem::path& spins_path,
                           const std::filesystem::path& stats_path) {
  auto seq = with_file_context(sequence_path, [](const std::string& t) { return parse_sequence(t); });
  auto spins = with_file_context(spins_path, [](const std::string& t) { return parse_spin_table(t); });
  auto stats = with_file_context(stats_path, [](const std::string& t) { return load_reference_stats(t); });
  return DatasetBundle{std::move(seq), std::move(spins), std::move(stats)};
}

}  // namespace bbassign
