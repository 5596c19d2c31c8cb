#pragma once

#include <cstdint>
#include <vector>

#include "bsnn/network.hpp"

namespace bsnn {

// Grayscale image with intensities in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> intensities; // row-major, width*height

    int pixel_count() const { return width * height; }
};

// Spike train presented to the input layer over times 1..t_end.
// Time 0 is implicitly silent for every neuron.
class InputSequence {
public:
    InputSequence() = default;
    InputSequence(int input_count, int t_end)
        : input_count_(input_count), t_end_(t_end),
          bits_(static_cast<std::size_t>(input_count) * t_end, 0) {}

    int input_count() const { return input_count_; }
    int t_end() const { return t_end_; }

    int bit(int t, int input) const {
        if (t == 0) return 0;
        return bits_[static_cast<std::size_t>(t - 1) * input_count_ + input];
    }
    void set_bit(int t, int input, int value) {
        bits_[static_cast<std::size_t>(t - 1) * input_count_ + input] = static_cast<std::uint8_t>(value);
    }

    friend bool operator==(const InputSequence&, const InputSequence&) = default;

private:
    int input_count_ = 0;
    int t_end_ = 0;
    std::vector<std::uint8_t> bits_;
};

int quantize_binary(double w);  // {0,1}: 0 at w==0, else (sign(w)+1)/2
int quantize_ternary(double w); // {-1,0,1}: sign(w)

// Each pixel fires at each step independently with probability equal to
// its intensity. Streams are keyed per (seed, pixel, time).
InputSequence poisson_encode(const Image& img, int t_end, std::uint64_t seed);

// One-step scheme: pixel fires at t=1 iff intensity strictly exceeds theta.
InputSequence threshold_encode(const Image& img, double theta = 0.5);

} // namespace bsnn
