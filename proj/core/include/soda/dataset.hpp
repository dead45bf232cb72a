#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "soda/numeric.hpp"

namespace soda {

enum class SplitTag : std::uint8_t { train = 0, test = 1 };

/// Feature matrix in [-1,1]^k with integer class labels.
struct DatasetSplit {
  Matrix features;
  std::vector<int> labels;
  std::size_t num_classes = 0;
  SplitTag tag = SplitTag::train;

  std::size_t size() const { return features.rows; }
  std::size_t input_dim() const { return features.cols; }
};

struct CsvSchema {
  /// Name of the label column; empty means the file has no labels
  /// (all columns are features, num_classes stays 0).
  std::string label_column = "label";
  /// Min-max rescale every feature column to [-1,1]. Without it, any value
  /// outside [-1,1] is rejected.
  bool rescale = false;
};

/// Reads a CSV with a header row naming the feature columns and the label
/// column. Values are decimal floats; labels must be non-negative integers.
/// Throws ParseError (with row/column) on malformed cells, DomainError on
/// bad labels or out-of-range features, IoError when unreadable.
DatasetSplit ingest_csv(const std::filesystem::path& path,
                        const CsvSchema& schema);

/// Writes the split back out with columns f0..f{k-1},label.
void write_csv(const DatasetSplit& split, const std::filesystem::path& path);

struct SyntheticConfig {
  std::size_t num_classes = 6;
  std::size_t input_dim = 24;
  std::size_t samples = 2400;
  double spread = 0.12;
  double center_range = 0.7;  // class centers drawn uniformly in +-range
};

/// Balanced Gaussian class clusters clipped to [-1,1]; rows are shuffled.
DatasetSplit make_synthetic(const SyntheticConfig& cfg, Rng& rng);

/// Random row partition into train/test by the given test fraction.
std::pair<DatasetSplit, DatasetSplit> split_dataset(const DatasetSplit& all,
                                                    double test_fraction,
                                                    Rng& rng);

}  // namespace soda
