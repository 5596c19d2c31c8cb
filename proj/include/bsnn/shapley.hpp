#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bsnn/network.hpp"
#include "bsnn/spike.hpp"

namespace bsnn {

// v(S): payoff of a feature coalition, S given as a 0/1 membership vector.
using CoalitionValue = std::function<double(const std::vector<std::uint8_t>&)>;

enum class SpikeEncoding : std::uint8_t { Thresholded, Poisson };

struct SnnValueOptions {
    SpikeEncoding encoding = SpikeEncoding::Thresholded;
    double theta = 0.5;
    int t_end = 1;
    std::uint64_t seed = 0;
    int target_class = 0;
};

// Target-class spike count with masked-out pixels forced dark. Poisson
// streams are keyed per pixel, so masking one feature never perturbs the
// others (keeps disconnected features exact null players).
CoalitionValue make_snn_value(const NetworkArchitecture& arch, const Image& image,
                              const SnnValueOptions& options);

// Classic Shapley values by full coalition enumeration; n <= 12.
std::vector<double> exact_shapley(const CoalitionValue& v, int n);

struct KernelShapResult {
    std::vector<double> scores;
    int sample_size = 0;
    bool exhaustive = false;  // all interior coalitions enumerated
    bool regularized = false; // ridge term visibly engaged in the solve
};

// KernelSHAP: Shapley-kernel-weighted least squares over sampled coalitions,
// with the efficiency constraint eliminated analytically. Falls back to full
// enumeration when the budget covers every interior coalition.
KernelShapResult sampled_shapley(const CoalitionValue& v, int n, int sample_size,
                                 std::uint64_t seed);

struct AttributionReport {
    std::vector<double> scores;
    int sample_size = 0;
    double delta = 0.0;
    std::vector<int> relevant;          // |score| strictly above delta
    std::vector<int> wrongly_relevant;  // relevant but no hidden-layer connection
    double wrongly_relevant_pct = 0.0;  // share of the relevant set
    bool regularized = false;
    double wall_time_ms = 0.0;
};

// Strict-threshold relevance plus the zero-connection audit.
AttributionReport relevance_audit(const std::vector<double>& scores, double delta,
                                  const NetworkArchitecture& arch);

std::string report_to_json(const AttributionReport& report);

} // namespace bsnn
