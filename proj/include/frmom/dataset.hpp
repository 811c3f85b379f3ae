#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "frmom/linalg.hpp"
#include "frmom/rng.hpp"

namespace frmom::objectives {

/// Feature vectors with integer class labels.
///
/// `unit_box` marks image-like data whose coordinates must lie in [0, 1];
/// attacks clip to that range.
struct LabeledDataset {
  std::vector<Vector> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  bool unit_box = false;

  std::size_t size() const { return inputs.size(); }
  std::size_t feature_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }

  /// Throws DimensionError / DomainError when an invariant is broken.
  void validate() const;
};

/// Two interleaved half-circles with Gaussian noise, min-max scaled into [0, 1]^2.
/// Classes alternate so both have n/2 (+-1) samples.
LabeledDataset make_two_moons(std::size_t n, double noise, Rng& rng);

/// Isotropic Gaussian blobs: `classes` centres uniform in [-1, 1]^dim, samples
/// centre + spread * N(0, I). Labels assigned round-robin.
LabeledDataset make_blobs(std::size_t n, std::size_t dim, std::size_t classes, double spread,
                          Rng& rng);

/// CSV with header `f0,...,fk,label`, one sample per row.
void write_dataset_csv(const LabeledDataset& data, std::ostream& out);

/// Inverse of write_dataset_csv. `num_classes` becomes max(label) + 1 unless a
/// larger value is given.
LabeledDataset read_dataset_csv(std::istream& in, bool unit_box = false,
                                std::size_t num_classes = 0);

}  // namespace frmom::objectives
