#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "bsnn/errors.hpp"
#include "bsnn/mnist.hpp"
#include "bsnn/network.hpp"
#include "bsnn/rng.hpp"
#include "bsnn/simulate.hpp"
#include "bsnn/spike.hpp"

using namespace bsnn;

TEST_CASE("binary quantizer follows the sign rule with a zero special case") {
    CHECK(quantize_binary(0.0) == 0);
    CHECK(quantize_binary(-0.3) == 0);
    CHECK(quantize_binary(0.7) == 1);
    CHECK(quantize_binary(1e-12) == 1);
    CHECK_THROWS_AS(quantize_binary(std::nan("")), ConfigError);
}

TEST_CASE("ternary quantizer is the sign function") {
    CHECK(quantize_ternary(-0.5) == -1);
    CHECK(quantize_ternary(0.0) == 0);
    CHECK(quantize_ternary(2.3) == 1);
    CHECK_THROWS_AS(quantize_ternary(std::numeric_limits<double>::infinity()), ConfigError);
}

namespace {

Image uniform_image(int n, double value) {
    Image img;
    img.width = n;
    img.height = 1;
    img.intensities.assign(n, value);
    return img;
}

} // namespace

TEST_CASE("poisson encoding hits the extremes exactly") {
    const Image dark = uniform_image(4, 0.0);
    const Image bright = uniform_image(4, 1.0);
    const auto zero = poisson_encode(dark, 50, 7);
    const auto one = poisson_encode(bright, 50, 7);
    for (int t = 1; t <= 50; ++t)
        for (int i = 0; i < 4; ++i) {
            CHECK(zero.bit(t, i) == 0);
            CHECK(one.bit(t, i) == 1);
        }
}

TEST_CASE("poisson encoding rate matches the intensity") {
    // binomial(10000, .5): tolerance 0.02 is a ~4 sigma band
    const Image img = uniform_image(1, 0.5);
    const auto seq = poisson_encode(img, 10000, 123);
    int count = 0;
    for (int t = 1; t <= 10000; ++t) count += seq.bit(t, 0);
    CHECK(std::abs(count / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("poisson encoding is deterministic per seed and rejects bad intensities") {
    const Image img = uniform_image(8, 0.3);
    CHECK(poisson_encode(img, 20, 5) == poisson_encode(img, 20, 5));
    CHECK(poisson_encode(img, 20, 5) != poisson_encode(img, 20, 6));
    Image bad = img;
    bad.intensities[3] = 1.5;
    CHECK_THROWS_AS(poisson_encode(bad, 20, 5), DataError);
}

TEST_CASE("threshold encoding uses a strict comparison at one step") {
    Image img = uniform_image(3, 0.0);
    img.intensities = {0.6, 0.5, 0.0};
    const auto seq = threshold_encode(img, 0.5);
    CHECK(seq.t_end() == 1);
    CHECK(seq.bit(1, 0) == 1);
    CHECK(seq.bit(1, 1) == 0); // exactly at theta stays dark
    CHECK(seq.bit(1, 2) == 0);
    CHECK(seq.bit(0, 0) == 0); // time zero is silent
}

TEST_CASE("simulation follows the integrate-fire-reset recurrence") {
    // one input firing every step, weight +1, threshold 2:
    // potential 1,2 -> fire at t=2, reset, fire again at t=4
    NetworkArchitecture arch(1, 1, 1, WeightScale::Binary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 1);
    arch.set_weight({Layer::Output, 0}, {Layer::Hidden, 0}, 1);
    arch.set_threshold({Layer::Hidden, 0}, 2);
    arch.set_threshold({Layer::Output, 0}, 1);

    InputSequence input(1, 4);
    for (int t = 1; t <= 4; ++t) input.set_bit(t, 0, 1);
    const auto trace = simulate(arch, input);

    const int h = arch.global_index({Layer::Hidden, 0});
    CHECK(trace.firing(1, h) == 0);
    CHECK(trace.firing(2, h) == 1);
    CHECK(trace.firing(3, h) == 0);
    CHECK(trace.firing(4, h) == 1);
    CHECK(trace.potential(1, 0) == 1);
    CHECK(trace.potential(2, 0) == 2);
    CHECK(trace.potential(3, 0) == 1); // reset after the spike
    CHECK(trace.potential(4, 0) == 2);
}

TEST_CASE("a lone inhibitory edge never fires its target") {
    NetworkArchitecture arch(1, 1, 1, WeightScale::Ternary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, -1);
    arch.set_threshold({Layer::Hidden, 0}, 1);
    InputSequence input(1, 6);
    for (int t = 1; t <= 6; ++t) input.set_bit(t, 0, 1);
    const auto trace = simulate(arch, input);
    for (int t = 0; t <= 6; ++t) CHECK(trace.firing(t, arch.global_index({Layer::Hidden, 0})) == 0);
}

TEST_CASE("zero-length input gives an all-zero trace") {
    NetworkArchitecture arch(2, 2, 1, WeightScale::Binary);
    const auto trace = simulate(arch, InputSequence(2, 0));
    CHECK(trace.t_end() == 0);
    for (int g = 0; g < arch.neuron_count(); ++g) CHECK(trace.firing(0, g) == 0);
}

TEST_CASE("simulation is a pure function of its inputs") {
    CounterRng rng(99);
    NetworkArchitecture arch(3, 2, 2, WeightScale::Ternary);
    for (int h = 0; h < 2; ++h)
        for (int i = 0; i < 3; ++i)
            arch.set_weight({Layer::Hidden, h}, {Layer::Input, i},
                            static_cast<int>(rng.next_below(3)) - 1);
    for (int z = 0; z < 2; ++z)
        for (int h = 0; h < 2; ++h)
            arch.set_weight({Layer::Output, z}, {Layer::Hidden, h},
                            static_cast<int>(rng.next_below(3)) - 1);
    InputSequence input(3, 5);
    for (int t = 1; t <= 5; ++t)
        for (int i = 0; i < 3; ++i) input.set_bit(t, i, static_cast<int>(rng.next_below(2)));
    CHECK(simulate(arch, input) == simulate(arch, input));
}

TEST_CASE("reset and firing laws hold on random ternary networks") {
    for (int trial = 0; trial < 50; ++trial) {
        CounterRng rng(trial);
        NetworkArchitecture arch(4, 3, 2, WeightScale::Ternary);
        for (int h = 0; h < 3; ++h)
            for (int i = 0; i < 4; ++i)
                arch.set_weight({Layer::Hidden, h}, {Layer::Input, i},
                                static_cast<int>(rng.next_below(3)) - 1);
        for (int z = 0; z < 2; ++z)
            for (int h = 0; h < 3; ++h)
                arch.set_weight({Layer::Output, z}, {Layer::Hidden, h},
                                static_cast<int>(rng.next_below(3)) - 1);
        for (int g = arch.input_count(); g < arch.neuron_count(); ++g)
            arch.set_threshold(arch.neuron_at(g), static_cast<int>(rng.next_below(4)) - 1);

        InputSequence input(4, 3);
        for (int t = 1; t <= 3; ++t)
            for (int i = 0; i < 4; ++i) input.set_bit(t, i, static_cast<int>(rng.next_below(2)));
        const auto trace = simulate(arch, input);

        for (int t = 1; t <= 3; ++t) {
            for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
                const NeuronId id = arch.neuron_at(g);
                const int ni = arch.non_input_index(id);
                // firing law
                CHECK((trace.potential(t, ni) >= arch.threshold(id)) ==
                      (trace.firing(t, g) == 1));
                // reset law: after a spike only the fresh stimulus remains
                if (trace.firing(t - 1, g) == 1) {
                    int stimulus = 0;
                    const Layer pre = id.layer == Layer::Hidden ? Layer::Input : Layer::Hidden;
                    for (int p = 0; p < arch.fan_in(id); ++p)
                        stimulus += arch.weight(id, {pre, p}) *
                                    trace.firing(t, arch.global_index({pre, p}));
                    CHECK(trace.potential(t, ni) == stimulus);
                }
                // integer bound
                CHECK(std::abs(trace.potential(t, ni)) <= t * arch.fan_in(id));
            }
        }
    }
}

TEST_CASE("adding binary-weight input spikes never lowers hidden potential") {
    for (int trial = 0; trial < 30; ++trial) {
        CounterRng rng(1000 + trial);
        NetworkArchitecture arch(5, 3, 1, WeightScale::Binary);
        for (int h = 0; h < 3; ++h)
            for (int i = 0; i < 5; ++i)
                arch.set_weight({Layer::Hidden, h}, {Layer::Input, i},
                                static_cast<int>(rng.next_below(2)));
        for (int h = 0; h < 3; ++h)
            arch.set_weight({Layer::Output, 0}, {Layer::Hidden, h}, 1);
        // single-step stimulus keeps the comparison at one slice
        InputSequence base(5, 1), more(5, 1);
        for (int i = 0; i < 5; ++i) {
            const int bit = static_cast<int>(rng.next_below(2));
            base.set_bit(1, i, bit);
            more.set_bit(1, i, 1);
        }
        const auto t0 = simulate(arch, base);
        const auto t1 = simulate(arch, more);
        for (int h = 0; h < 3; ++h) CHECK(t1.potential(1, h) >= t0.potential(1, h));
    }
}

TEST_CASE("classification is spike-count argmax with lowest-index ties") {
    // craft traces directly
    NetworkArchitecture arch(1, 1, 3, WeightScale::Binary);
    DynamicsTrace trace(1, 4, 2);
    const int o0 = arch.global_index({Layer::Output, 0});
    const int o1 = arch.global_index({Layer::Output, 1});
    const int o2 = arch.global_index({Layer::Output, 2});

    // counts (3,1,0) -> class 0... here (1,1,0) at two steps: tie -> 0
    trace.set_firing(1, o0, 1);
    trace.set_firing(1, o1, 1);
    CHECK(classify(arch, trace) == 0);

    trace.set_firing(2, o1, 1); // counts (1,2,0) -> class 1
    CHECK(classify(arch, trace) == 1);

    DynamicsTrace silent(1, 4, 2);
    CHECK(classify(arch, silent) == 0);
    (void)o2;
}

TEST_CASE("network JSON round-trips and validates") {
    NetworkArchitecture arch(3, 2, 2, WeightScale::Ternary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 1}, -1);
    arch.set_weight({Layer::Hidden, 1}, {Layer::Input, 2}, 1);
    arch.set_weight({Layer::Output, 1}, {Layer::Hidden, 0}, 1);
    arch.set_threshold({Layer::Hidden, 0}, 3);
    const auto copy = NetworkArchitecture::from_json(arch.to_json());
    CHECK(copy == arch);

    CHECK_THROWS_AS(arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 2), ConfigError);
    NetworkArchitecture bin(2, 1, 1, WeightScale::Binary);
    CHECK_THROWS_AS(bin.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, -1), ConfigError);
}

TEST_CASE("dimension mismatch is rejected") {
    NetworkArchitecture arch(3, 2, 1, WeightScale::Binary);
    CHECK_THROWS_AS(simulate(arch, InputSequence(4, 2)), ConfigError);
}

TEST_CASE("IDX files round-trip through the loader") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bsnn_idx_test";
    fs::create_directories(dir);

    // two 2x3 images + labels, big-endian headers
    const unsigned char images[] = {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 3,
                                    0,    51,  102, 153,  204, 255, 10, 20, 30, 40, 50, 60};
    const unsigned char labels[] = {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 7, 3};
    {
        std::ofstream img_out(dir / "train-images-idx3-ubyte", std::ios::binary);
        img_out.write(reinterpret_cast<const char*>(images), sizeof(images));
        std::ofstream lbl_out(dir / "train-labels-idx1-ubyte", std::ios::binary);
        lbl_out.write(reinterpret_cast<const char*>(labels), sizeof(labels));
    }
    const auto data = load_idx_split(dir.string(), true);
    REQUIRE(data.size() == 2);
    CHECK(data.images[0].width == 3);
    CHECK(data.images[0].height == 2);
    CHECK(data.images[0].intensities[1] == doctest::Approx(51 / 255.0));
    CHECK(data.labels == std::vector<int>{7, 3});

    const auto filtered = filter_digits(data, {9, 3});
    REQUIRE(filtered.size() == 1);
    CHECK(filtered.labels[0] == 0); // digit 3 -> class 0 of {3,9}
    fs::remove_all(dir);
}

TEST_CASE("trace JSON round-trips") {
    NetworkArchitecture arch(2, 2, 1, WeightScale::Binary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 1);
    arch.set_weight({Layer::Output, 0}, {Layer::Hidden, 0}, 1);
    InputSequence input(2, 3);
    input.set_bit(1, 0, 1);
    input.set_bit(3, 0, 1);
    const auto trace = simulate(arch, input);
    CHECK(DynamicsTrace::from_json(trace.to_json()) == trace);
}
