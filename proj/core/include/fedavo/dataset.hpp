#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedavo/matrix.hpp"

namespace fedavo {

/// In-memory labelled dataset. Inputs live in [0,1], labels in
/// [0, num_classes).
struct Dataset {
    Matrix inputs;
    std::vector<std::int32_t> labels;
    std::int32_t num_classes = 0;

    std::size_t size() const { return inputs.rows; }
    void validate() const;
};

/// Loads an image/label pair in the classic big-endian IDX layout
/// (magic 0x00000803 for images, 0x00000801 for labels). Pixels are scaled
/// by 1/255 and flattened row-major.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Writers for the same format; inputs are quantized back to bytes.
void write_idx_images(const std::string& path, const Matrix& inputs,
                      std::uint32_t img_rows, std::uint32_t img_cols);
void write_idx_labels(const std::string& path,
                      const std::vector<std::int32_t>& labels);

/// Gaussian class blobs centred near the vertices of a scaled simplex
/// (slightly jittered by the seed), labels assigned round-robin, inputs
/// min-max normalized into [0,1].
Dataset synthetic_classification(std::size_t n, std::size_t classes,
                                 std::size_t dims, double spread,
                                 std::uint64_t seed);

/// Seeded draw of n samples without replacement; stratified mode keeps the
/// class proportions within one sample per class.
Dataset subsample(const Dataset& ds, std::size_t n, bool stratified,
                  std::uint64_t seed);

} // namespace fedavo
