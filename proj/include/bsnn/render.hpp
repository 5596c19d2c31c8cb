#pragma once

#include <string>
#include <vector>

#include "bsnn/axp.hpp"
#include "bsnn/network.hpp"
#include "bsnn/shapley.hpp"

namespace bsnn {

struct Rgb {
    unsigned char r = 0, g = 0, b = 0;
};

// binary P6 image
struct Ppm {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::string serialize() const;
    void save(const std::string& path) const;
};

// Explanation rendering: green marks inputs connected to the hidden layer,
// red the positive literals of the term, yellow the negative ones.
Ppm render_explanation(const Explanation& expl, const NetworkArchitecture& arch,
                       const CausalModel& model, int width, int height);

// Attribution rendering: green marks connected inputs, purple the features
// flagged relevant.
Ppm render_attribution(const AttributionReport& report, const NetworkArchitecture& arch, int width,
                       int height);

// Plain grayscale view of an image.
Ppm render_image(const Image& image);

} // namespace bsnn
