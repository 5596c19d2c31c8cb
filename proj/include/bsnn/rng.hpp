#pragma once

#include <cstdint>

namespace bsnn {

// Counter-based generator (splitmix64 finalizer over a keyed counter).
// Every draw is a pure function of (seed, stream, counter), so encoders
// and samplers are reproducible across platforms and safe to evaluate
// in parallel per stream.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ 0x9e3779b97f4a7c15ULL) ^ mix(stream + 0xbf58476d1ce4e5b9ULL)) {}

    static std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
        CounterRng r(seed, stream);
        return r.at(counter);
    }

    std::uint64_t at(std::uint64_t counter) const { return mix(key_ + counter * 0x2545f4914f6cdd1dULL); }

    std::uint64_t next() { return at(counter_++); }

    // uniform in [0,1)
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double double_at(std::uint64_t counter) const {
        return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
    }

    // uniform in [0, n)
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Platform-stable Fisher-Yates shuffle driven by CounterRng.
template <typename Vec>
void shuffle(Vec& v, std::uint64_t seed, std::uint64_t stream = 0) {
    CounterRng rng(seed, stream);
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace bsnn
