#pragma once

#include <string>
#include <vector>

#include "bsnn/spike.hpp"

namespace bsnn {

struct LabeledDataset {
    std::vector<Image> images;
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
};

// Standard IDX readers (big-endian; magic 0x00000803 for images,
// 0x00000801 for labels). Intensities are scaled to [0,1].
std::vector<Image> read_idx_images(const std::string& path);
std::vector<int> read_idx_labels(const std::string& path);

// Loads <dir>/{train,t10k}-{images-idx3,labels-idx1}-ubyte.
LabeledDataset load_idx_split(const std::string& dir, bool train);

// Keeps only the listed digits and remaps labels to class indices
// 0..m-1 in ascending digit order.
LabeledDataset filter_digits(const LabeledDataset& data, const std::vector<int>& digits);

} // namespace bsnn
