#include "bsnn/spike.hpp"

#include <cmath>

#include "bsnn/errors.hpp"
#include "bsnn/rng.hpp"

namespace bsnn {

int quantize_binary(double w) {
    if (!std::isfinite(w)) throw ConfigError("cannot quantize non-finite weight");
    if (w == 0.0) return 0;
    return w > 0.0 ? 1 : 0;
}

int quantize_ternary(double w) {
    if (!std::isfinite(w)) throw ConfigError("cannot quantize non-finite weight");
    if (w > 0.0) return 1;
    if (w < 0.0) return -1;
    return 0;
}

InputSequence poisson_encode(const Image& img, int t_end, std::uint64_t seed) {
    if (t_end < 1) throw ConfigError("poisson encoding needs t_end >= 1");
    const int n = img.pixel_count();
    InputSequence seq(n, t_end);
    for (int i = 0; i < n; ++i) {
        const double p = img.intensities[i];
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("pixel intensity outside [0,1]");
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        for (int t = 1; t <= t_end; ++t)
            seq.set_bit(t, i, rng.double_at(static_cast<std::uint64_t>(t)) < p ? 1 : 0);
    }
    return seq;
}

InputSequence threshold_encode(const Image& img, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("threshold must lie in (0,1)");
    const int n = img.pixel_count();
    InputSequence seq(n, 1);
    for (int i = 0; i < n; ++i) {
        const double p = img.intensities[i];
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("pixel intensity outside [0,1]");
        seq.set_bit(1, i, p > theta ? 1 : 0);
    }
    return seq;
}

} // namespace bsnn
