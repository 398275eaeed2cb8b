#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ordinal/tensor.hpp"

namespace ordinal {

/// Feature matrix, ordinal labels and group ids (the unit that must never
/// straddle a split). Immutable after construction.
struct Dataset {
  Mat X;                            // M x d
  std::vector<int> labels;          // in [0, n_classes)
  std::vector<std::int64_t> groups;
  int n_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return X.cols; }
};

/// Synthetic ordinal data: every group draws one class from class_priors and
/// all of its samples share that class. The informative block places class k
/// at mean k * class_separation * u (u = normalized all-ones direction) plus
/// isotropic Gaussian noise of scale noise_std; distractor_dims standard
/// normal columns are appended. Adjacent classes overlap, so errors
/// concentrate on neighbouring labels.
struct SyntheticConfig {
  int n_classes = 4;
  int n_groups = 600;
  int samples_per_group = 20;
  int feature_dim = 8;
  Vec class_priors = {0.5414, 0.277, 0.1112, 0.0767};
  double class_separation = 1.0;
  double noise_std = 0.55;
  int distractor_dims = 8;
};

Dataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

/// CSV contract: UTF-8, comma separated, LF line endings, header
/// f0,...,f{d-1},label,group. Features are decimal floats, label and group
/// integers. Parse errors carry the 1-based line number.
/// expected_n_classes = 0 infers n_classes as max(label) + 1.
Dataset load_csv(const std::string& path, int expected_n_classes = 0);
void write_csv(const Dataset& dataset, const std::string& path);

/// Shuffles groups with the seed, then accumulates whole groups into the test
/// side until its sample count first reaches test_fraction * M.
std::pair<Dataset, Dataset> group_holdout_split(const Dataset& dataset, double test_fraction,
                                                std::uint64_t seed);

/// Group-level k-fold: groups shuffled with the seed and dealt round-robin.
struct FoldAssignment {
  int k = 0;
  std::vector<std::int64_t> group_ids;           // unique groups, shuffled order
  std::vector<int> fold_of_group;                // parallel to group_ids
  std::vector<std::vector<std::size_t>> train_indices;  // per fold
  std::vector<std::vector<std::size_t>> val_indices;    // per fold
};

FoldAssignment group_kfold(const Dataset& dataset, int k, std::uint64_t seed);

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

}  // namespace ordinal
