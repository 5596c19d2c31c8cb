#include "bsnn/mnist.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>

#include "bsnn/errors.hpp"

namespace bsnn {

namespace {

std::uint32_t read_be32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

} // namespace

std::vector<Image> read_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    if (read_be32(in) != 0x00000803u) throw DataError(path + " is not an IDX image file");
    const std::uint32_t count = read_be32(in);
    const std::uint32_t rows = read_be32(in);
    const std::uint32_t cols = read_be32(in);
    std::vector<Image> images(count);
    std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!in) throw DataError(path + " truncated");
        Image& img = images[i];
        img.width = static_cast<int>(cols);
        img.height = static_cast<int>(rows);
        img.intensities.resize(buf.size());
        std::transform(buf.begin(), buf.end(), img.intensities.begin(),
                       [](unsigned char v) { return v / 255.0; });
    }
    return images;
}

std::vector<int> read_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    if (read_be32(in) != 0x00000801u) throw DataError(path + " is not an IDX label file");
    const std::uint32_t count = read_be32(in);
    std::vector<unsigned char> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw DataError(path + " truncated");
    return std::vector<int>(buf.begin(), buf.end());
}

LabeledDataset load_idx_split(const std::string& dir, bool train) {
    const std::string stem = train ? "train" : "t10k";
    LabeledDataset data;
    data.images = read_idx_images(dir + "/" + stem + "-images-idx3-ubyte");
    data.labels = read_idx_labels(dir + "/" + stem + "-labels-idx1-ubyte");
    if (data.images.size() != data.labels.size())
        throw DataError("image/label count mismatch in " + dir);
    return data;
}

LabeledDataset filter_digits(const LabeledDataset& data, const std::vector<int>& digits) {
    std::vector<int> sorted = digits;
    std::sort(sorted.begin(), sorted.end());
    LabeledDataset out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto it = std::find(sorted.begin(), sorted.end(), data.labels[i]);
        if (it == sorted.end()) continue;
        out.images.push_back(data.images[i]);
        out.labels.push_back(static_cast<int>(it - sorted.begin()));
    }
    return out;
}

} // namespace bsnn
