#include "bbassign/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "bbassign/validate.hpp"

namespace bbassign {

double PortableRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double PortableRng::normal(double mean, double sd) {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t PortableRng::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("below(0)");
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const auto x = engine_();
    if (x < limit) return static_cast<std::size_t>(x % bound);
  }
}

ProteinSequence random_sequence(std::size_t length, PortableRng& rng) {
  std::vector<Residue> residues(length);
  for (auto& r : residues) r = residue_at(rng.below(kResidueCount));
  return ProteinSequence(std::move(residues));
}

namespace {

constexpr int kMaxRedraws = 100000;

CarbonPair draw_truth(Residue res, const ReferenceStats& stats, PortableRng& rng) {
  const auto& ref = stats[res];
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    CarbonPair c;
    c.ca = rng.normal(ref.ca_mean, ref.ca_sd);
    if (ref.cb_mean) c.cb = rng.normal(*ref.cb_mean, *ref.cb_sd);
    const auto inside = [](const std::optional<double>& v) {
      return !v || (*v >= kCarbonMinPpm && *v <= kCarbonMaxPpm);
    };
    if (inside(c.ca) && inside(c.cb)) return c;
  }
  throw std::runtime_error("reference statistics keep producing shifts outside [0, 100] ppm");
}

bool collide(const CarbonPair& a, const CarbonPair& b, double gate) {
  int dims = 0;
  if (a.ca && b.ca) {
    if (std::abs(*a.ca - *b.ca) > gate) return false;
    ++dims;
  }
  if (a.cb && b.cb) {
    if (std::abs(*a.cb - *b.cb) > gate) return false;
    ++dims;
  }
  return dims > 0;
}

std::optional<double> observe(const std::optional<double>& truth, double sigma, PortableRng& rng) {
  if (!truth) return std::nullopt;
  if (sigma == 0.0) return truth;
  return std::clamp(*truth + rng.normal(0.0, sigma), kCarbonMinPpm, kCarbonMaxPpm);
}

std::string spin_id(std::size_t number, std::size_t width) {
  auto digits = std::to_string(number);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "ss" + digits;
}

}  // namespace

SyntheticDataset generate_dataset(const ProteinSequence& seq, const ReferenceStats& stats,
                                  const GeneratorConfig& cfg) {
  if (!(cfg.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (!(cfg.missing_prob >= 0.0 && cfg.missing_prob < 1.0)) {
    throw std::invalid_argument("missing probability must lie in [0, 1)");
  }
  PortableRng rng(cfg.seed);
  const bool certify = cfg.noise_sigma == 0.0 && cfg.missing_prob == 0.0;

  SyntheticDataset out;
  out.truth.config = cfg;
  out.true_shifts.reserve(seq.size());
  for (std::size_t p = 0; p < seq.size(); ++p) {
    CarbonPair c = draw_truth(seq[p], stats, rng);
    if (certify) {
      int attempt = 0;
      while (std::any_of(out.true_shifts.begin(), out.true_shifts.end(),
                         [&](const CarbonPair& q) { return collide(c, q, cfg.collision_gate); })) {
        if (++attempt == kMaxRedraws) {
          throw std::runtime_error("cannot draw collision-free shifts at position " +
                                   std::to_string(p + 1));
        }
        c = draw_truth(seq[p], stats, rng);
      }
    }
    out.true_shifts.push_back(c);
  }

  std::vector<std::size_t> detectable;
  for (std::size_t p = 0; p < seq.size(); ++p) {
    if (seq[p] != Residue::P) detectable.push_back(p);
  }
  std::vector<std::size_t> numbers(detectable.size());
  for (std::size_t k = 0; k < numbers.size(); ++k) numbers[k] = k + 1;
  for (std::size_t k = numbers.size(); k > 1; --k) std::swap(numbers[k - 1], numbers[rng.below(k)]);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(numbers.size()).size());

  for (std::size_t k = 0; k < detectable.size(); ++k) {
    const auto p = detectable[k];
    SpinSystem s;
    s.id = spin_id(numbers[k], width);
    s.intra.ca = observe(out.true_shifts[p].ca, cfg.noise_sigma, rng);
    s.intra.cb = observe(out.true_shifts[p].cb, cfg.noise_sigma, rng);
    const bool after_proline = p > 0 && seq[p - 1] == Residue::P;
    if (p > 0 && !(cfg.strict_proline && after_proline)) {
      s.prev.ca = observe(out.true_shifts[p - 1].ca, cfg.noise_sigma, rng);
      s.prev.cb = observe(out.true_shifts[p - 1].cb, cfg.noise_sigma, rng);
    }
    if (cfg.missing_prob > 0.0) {
      const SpinSystem full = s;
      do {
        s = full;
        for (auto* field : {&s.intra.ca, &s.intra.cb, &s.prev.ca, &s.prev.cb}) {
          if (*field && rng.bernoulli(cfg.missing_prob)) field->reset();
        }
      } while (s.intra.empty() && s.prev.empty());
    }
    out.truth.mapping[p] = s.id;
    out.spins.push_back(std::move(s));
  }
  std::sort(out.spins.begin(), out.spins.end(),
            [](const SpinSystem& a, const SpinSystem& b) { return a.id < b.id; });
  return out;
}

EvaluationReport evaluate_assignment(const Assignment& pred, const GroundTruth& truth,
                                     std::size_t n_positions) {
  std::set<std::string_view> known;
  for (const auto& [pos, id] : truth.mapping) known.insert(id);
  EvaluationReport r;
  r.n_positions = n_positions;
  r.n_detectable = truth.mapping.size();
  r.n_assigned = pred.mapping.size();
  for (const auto& [pos, id] : pred.mapping) {
    if (!known.contains(id)) throw std::invalid_argument("spin system '" + id + "' is not in the truth set");
    const auto it = truth.mapping.find(pos);
    if (it != truth.mapping.end() && it->second == id) ++r.n_correct;
  }
  r.accuracy = r.n_detectable > 0
                   ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_detectable)
                   : 0.0;
  r.total_error_pred = pred.total_error;
  return r;
}

Assignment truth_assignment(const GroundTruth& truth, std::span<const SpinSystem> spins,
                            const ScoringConfig& cfg) {
  Assignment a;
  a.mapping = truth.mapping;
  a.link_to_next = adjacent_link_costs(a.mapping, spins, cfg);
  for (const auto& [pos, c] : a.link_to_next) a.total_error += c;
  std::set<std::string_view> used;
  for (const auto& [pos, id] : a.mapping) used.insert(id);
  for (const auto& s : spins) {
    if (!used.contains(s.id)) a.unassigned.insert(s.id);
  }
  return a;
}

std::string write_truth(const GroundTruth& truth) {
  std::string out = "pos\tspin_id\n";
  for (const auto& [pos, id] : truth.mapping) {
    out += std::to_string(pos + 1) + "\t" + id + "\n";
  }
  return out;
}

GroundTruth parse_truth(std::string_view text) {
  GroundTruth truth;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      if (line != "pos\tspin_id") throw ParseError("line 1: header must be 'pos spin_id'", line_no);
      header = true;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 2 columns", line_no);
    }
    std::size_t pos = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + tab, pos);
    if (ec != std::errc() || ptr != line.data() + tab || pos == 0) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid position", line_no);
    }
    auto id = line.substr(tab + 1);
    if (id.empty() || !ids.insert(id).second) {
      throw ParseError("line " + std::to_string(line_no) + ": missing or duplicate spin id", line_no);
    }
    if (!truth.mapping.emplace(pos - 1, std::move(id)).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate position", line_no);
    }
  }
  if (!header) throw ParseError("truth file is empty");
  return truth;
}

std::string write_generator_config(const GeneratorConfig& cfg) {
  nlohmann::ordered_json j;
  j["noise_sigma"] = cfg.noise_sigma;
  j["missing_prob"] = cfg.missing_prob;
  j["seed"] = cfg.seed;
  j["strict_proline"] = cfg.strict_proline;
  j["collision_gate"] = cfg.collision_gate;
  return j.dump(2) + "\n";
}

}  // namespace bbassign
