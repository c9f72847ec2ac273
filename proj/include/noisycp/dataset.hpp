#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisycp/types.hpp"

namespace noisycp {

// Rows whose entries sum to 1 within this tolerance are renormalized on
// ingestion; anything further off is rejected.
inline constexpr double kRowSumTolerance = 1e-6;

// Rows whose sum is this close to 1 count as exact and are stored untouched,
// so re-reading a written file reproduces every value bit for bit.
inline constexpr double kRowSumExact = 1e-12;

// Validates one probability row in place: entries must be finite and in
// [0, 1] (a slack of kRowSumTolerance above 1 is tolerated pre-renormalization),
// the sum must be within kRowSumTolerance of 1. Renormalizes by the sum
// unless the row is already exact. Throws std::invalid_argument otherwise.
void validate_prob_row(std::span<double> probs);

// Dense row-major n x k matrix of per-sample class probabilities.
class ProbMatrix {
 public:
  explicit ProbMatrix(int k);
  ProbMatrix(std::size_t n, int k);  // n zero rows, to be filled via mutable_row

  int k() const { return k_; }
  std::size_t rows() const { return data_.size() / static_cast<std::size_t>(k_); }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(k_),
            static_cast<std::size_t>(k_)};
  }
  std::span<double> mutable_row(std::size_t i) {
    return {data_.data() + i * static_cast<std::size_t>(k_),
            static_cast<std::size_t>(k_)};
  }

  // Validates + renormalizes, then stores the row.
  void append_validated(std::span<const double> probs);

  // Stores a row that is already known to be a valid distribution.
  void append_unchecked(std::span<const double> probs);

  const std::vector<double>& data() const { return data_; }

 private:
  int k_;
  std::vector<double> data_;
};

// A calibration/evaluation pool: model probabilities plus the labels that
// come with them. `observed` is what calibration sees; `clean` (when
// present) is the uncorrupted truth used for noise-free test evaluation.
// `noise` marks pools whose observed labels were produced by a known
// corruption and carries its level.
struct LabeledPool {
  ProbMatrix probs;
  std::vector<Label> observed;
  std::optional<std::vector<Label>> clean;
  std::optional<NoiseModel> noise;
  std::optional<ProbMatrix> true_probs;  // synthetic pools keep the generator truth

  std::size_t size() const { return observed.size(); }
  int k() const { return probs.k(); }
};

void validate(const LabeledPool& pool);

// True when the observed labels cannot be treated as clean: either noise
// metadata is attached or some observed label differs from its clean twin.
bool pool_is_precorrupted(const LabeledPool& pool);

// CSV dataset format: header "p0,...,p{k-1},label[,clean_label]" (the
// "p_0" spelling is also accepted), one row per sample, '.' decimal,
// full-precision round-trip floats. With softmax_rows the probability
// columns are instead read as raw scores and pushed through a softmax,
// for models that export logits.
LabeledPool read_dataset_csv(const std::string& path, bool softmax_rows = false);
std::string dataset_to_csv(const LabeledPool& pool);
void write_dataset_csv(const std::string& path, const LabeledPool& pool);

// Shortest round-trip decimal formatting used for every float we emit.
std::string format_double(double value);

// Writes content to path via a temp file + rename.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace noisycp
