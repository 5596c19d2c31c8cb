#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsnn/network.hpp"
#include "bsnn/spike.hpp"

namespace bsnn {

// Firing bits for all neurons and integer membrane potentials for all
// non-input neurons over times 0..t_end. Everything is zero at t=0.
class DynamicsTrace {
public:
    DynamicsTrace() = default;
    DynamicsTrace(int input_count, int non_input_count, int t_end)
        : input_count_(input_count), non_input_count_(non_input_count), t_end_(t_end),
          firing_(static_cast<std::size_t>(t_end + 1) * (input_count + non_input_count), 0),
          potential_(static_cast<std::size_t>(t_end + 1) * non_input_count, 0) {}

    int t_end() const { return t_end_; }
    int input_count() const { return input_count_; }
    int non_input_count() const { return non_input_count_; }

    // `global` follows NetworkArchitecture's dense numbering
    int firing(int t, int global) const {
        return firing_[static_cast<std::size_t>(t) * (input_count_ + non_input_count_) + global];
    }
    void set_firing(int t, int global, int value) {
        firing_[static_cast<std::size_t>(t) * (input_count_ + non_input_count_) + global] =
            static_cast<std::uint8_t>(value);
    }

    // `ni` indexes non-input neurons, hidden block first
    int potential(int t, int ni) const {
        return potential_[static_cast<std::size_t>(t) * non_input_count_ + ni];
    }
    void set_potential(int t, int ni, int value) {
        potential_[static_cast<std::size_t>(t) * non_input_count_ + ni] = value;
    }

    std::string to_json() const;
    static DynamicsTrace from_json(const std::string& text);

    friend bool operator==(const DynamicsTrace&, const DynamicsTrace&) = default;

private:
    int input_count_ = 0;
    int non_input_count_ = 0;
    int t_end_ = 0;
    std::vector<std::uint8_t> firing_;
    std::vector<int> potential_;
};

// Integrate-and-fire dynamics, exact over integers: potentials accumulate
// the weighted same-step stimulus, hard-reset to the fresh stimulus on the
// step after a spike, and a neuron fires iff its potential reaches its
// threshold. Inputs are driven by `input` and are never integrated.
DynamicsTrace simulate(const NetworkArchitecture& arch, const InputSequence& input);

// Spike-count argmax over output neurons; ties go to the lowest class index.
int classify(const NetworkArchitecture& arch, const DynamicsTrace& trace);

std::vector<int> output_spike_counts(const NetworkArchitecture& arch, const DynamicsTrace& trace);

} // namespace bsnn
