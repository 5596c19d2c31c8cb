#include "bsnn/render.hpp"

#include <fstream>

#include "bsnn/errors.hpp"

namespace bsnn {

namespace {
constexpr Rgb kBackground{20, 20, 20};
constexpr Rgb kConnected{0, 160, 60};
constexpr Rgb kPositive{220, 40, 30};
constexpr Rgb kNegative{235, 200, 40};
constexpr Rgb kRelevant{150, 60, 200};
} // namespace

std::string Ppm::serialize() const {
    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.reserve(out.size() + pixels.size() * 3);
    for (const Rgb& p : pixels) {
        out.push_back(static_cast<char>(p.r));
        out.push_back(static_cast<char>(p.g));
        out.push_back(static_cast<char>(p.b));
    }
    return out;
}

void Ppm::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    const std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

Ppm connected_base(const NetworkArchitecture& arch, int width, int height) {
    Ppm img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, kBackground);
    for (int i = 0; i < arch.input_count() && i < width * height; ++i)
        if (!arch.disconnected_input(i)) img.pixels[i] = kConnected;
    return img;
}

} // namespace

Ppm render_explanation(const Explanation& expl, const NetworkArchitecture& arch,
                       const CausalModel& model, int width, int height) {
    Ppm img = connected_base(arch, width, height);
    for (const TermLit& lit : expl.term.literals) {
        const Variable v = model.var_of(lit.var);
        if (v.neuron.layer != Layer::Input) continue;
        if (v.neuron.index >= width * height) continue;
        img.pixels[v.neuron.index] = lit.positive ? kPositive : kNegative;
    }
    return img;
}

Ppm render_attribution(const AttributionReport& report, const NetworkArchitecture& arch, int width,
                       int height) {
    Ppm img = connected_base(arch, width, height);
    for (const int f : report.relevant)
        if (f < width * height) img.pixels[f] = kRelevant;
    return img;
}

Ppm render_image(const Image& image) {
    Ppm img;
    img.width = image.width;
    img.height = image.height;
    img.pixels.resize(image.intensities.size());
    for (std::size_t i = 0; i < image.intensities.size(); ++i) {
        const auto v = static_cast<unsigned char>(image.intensities[i] * 255.0 + 0.5);
        img.pixels[i] = {v, v, v};
    }
    return img;
}

} // namespace bsnn
