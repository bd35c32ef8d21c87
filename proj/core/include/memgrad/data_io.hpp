#pragma once

#include "memgrad/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace memgrad {

/// N x D feature matrix with integer labels in [0, classes).
struct FeatureDataset {
  Matrix features;
  std::vector<int> labels;
  int classes = 0;
  std::string provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  // Throws ParameterError on label range, row-count mismatch or non-finite features.
  void validate() const;

  FeatureDataset subset(const std::vector<std::size_t>& indices) const;
};

/// CSV with header `label,f0,...,f{D-1}`. The class count is max(label) + 1
/// unless `classes` is given, in which case labels >= classes are rejected.
FeatureDataset load_feature_csv(const std::string& path, int classes = 0);

/// Values are written with 9 significant digits.
void save_feature_csv(const FeatureDataset& dataset, const std::string& path);
void write_feature_csv(const FeatureDataset& dataset, std::ostream& out);

/// MNIST-style IDX pair (magic 0x00000803 images, 0x00000801 labels), pixels scaled to [0, 1].
FeatureDataset load_idx(const std::string& images_path, const std::string& labels_path);

struct ClusterTaskParams {
  int classes = 4;
  int dim = 32;
  int n_per_class = 1000;
  double center_scale = 1.0;
  double noise_sigma = 1.6;
  double shift = 0.5;
  std::uint64_t seed = 0;
};

/// Gaussian blobs around per-class centers, shifted and clipped at zero so the
/// features look like post-ReLU backbone activations.
FeatureDataset make_cluster_task(const ClusterTaskParams& params);

struct SplitSpec {
  double train = 0.6;
  double val = 0.3;
  double test = 0.1;
  bool stratified = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Stratified (per-class) shuffled split; each class contributes
/// round(fraction * n_c) samples to train and val, the rest to test.
SplitIndices split_indices(const FeatureDataset& dataset, const SplitSpec& spec);

struct DatasetSplits {
  FeatureDataset train;
  FeatureDataset val;
  FeatureDataset test;
};

DatasetSplits split(const FeatureDataset& dataset, const SplitSpec& spec);

void save_split_json(const SplitIndices& indices, const std::string& path);
SplitIndices load_split_json(const std::string& path);

}  // namespace memgrad
