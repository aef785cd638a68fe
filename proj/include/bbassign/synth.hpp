#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "bbassign/model.hpp"

namespace bbassign {

/// Seeded generator with platform-independent draws: mt19937_64 bits are
/// fixed by the standard, and the conversions below avoid the
/// implementation-defined std:: distributions.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                                // [0, 1)
  double normal(double mean, double sd);           // Box-Muller
  std::size_t below(std::size_t n);                // uniform in [0, n)
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

struct GeneratorConfig {
  double noise_sigma = 0.0;  // ppm
  double missing_prob = 0.0;
  std::uint64_t seed = 1;
  // Also drop the preceding-residue shifts of the residue after each proline.
  bool strict_proline = false;
  // Two positions whose carbons all agree within this many ppm count as a collision.
  double collision_gate = 0.5;
};

struct GroundTruth {
  std::map<std::size_t, std::string> mapping;  // 0-based position -> spin id
  GeneratorConfig config;
};

struct SyntheticDataset {
  std::vector<SpinSystem> spins;  // sorted by id
  GroundTruth truth;
  std::vector<CarbonPair> true_shifts;  // per position, before noise
};

// Throws std::invalid_argument for a negative noise σ or missing_prob outside [0, 1).
SyntheticDataset generate_dataset(const ProteinSequence& seq, const ReferenceStats& stats,
                                  const GeneratorConfig& cfg);

/// Uniform random sequence over the 20 residue codes.
ProteinSequence random_sequence(std::size_t length, PortableRng& rng);

struct EvaluationReport {
  std::size_t n_positions = 0;
  std::size_t n_detectable = 0;
  std::size_t n_assigned = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  double total_error_pred = 0.0;
  std::optional<double> total_error_truth;
};

// Throws std::invalid_argument when `pred` references an id the truth does not know.
EvaluationReport evaluate_assignment(const Assignment& pred, const GroundTruth& truth,
                                     std::size_t n_positions);

/// The ground truth as an Assignment (used to price it).
Assignment truth_assignment(const GroundTruth& truth, std::span<const SpinSystem> spins,
                            const ScoringConfig& cfg);

// truth.tsv: `pos spin_id`, positions 1-based.
std::string write_truth(const GroundTruth& truth);
GroundTruth parse_truth(std::string_view text);

std::string write_generator_config(const GeneratorConfig& cfg);

}  // namespace bbassign
