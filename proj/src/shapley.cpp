#include "bsnn/shapley.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <memory>

#include "bsnn/errors.hpp"
#include "bsnn/rng.hpp"

namespace bsnn {

namespace {

// trace-free forward pass returning only the target-class spike count
class FastForward {
public:
    FastForward(const NetworkArchitecture& arch, int target) : arch_(arch), target_(target) {
        hidden_potential_.assign(arch.hidden_count(), 0);
        output_potential_.assign(arch.output_count(), 0);
        hidden_fired_.assign(arch.hidden_count(), 0);
        output_fired_.assign(arch.output_count(), 0);
    }

    int run(const std::vector<std::vector<std::uint8_t>>& input_steps) {
        std::fill(hidden_potential_.begin(), hidden_potential_.end(), 0);
        std::fill(output_potential_.begin(), output_potential_.end(), 0);
        std::fill(hidden_fired_.begin(), hidden_fired_.end(), 0);
        std::fill(output_fired_.begin(), output_fired_.end(), 0);
        int count = 0;
        for (const auto& x : input_steps) {
            for (int h = 0; h < arch_.hidden_count(); ++h) {
                int a = hidden_fired_[h] ? 0 : hidden_potential_[h];
                for (int i = 0; i < arch_.input_count(); ++i) {
                    const int w = arch_.weight({Layer::Hidden, h}, {Layer::Input, i});
                    if (w != 0 && x[i]) a += w;
                }
                hidden_potential_[h] = a;
                hidden_fired_[h] = a >= arch_.threshold({Layer::Hidden, h});
            }
            for (int z = 0; z < arch_.output_count(); ++z) {
                int a = output_fired_[z] ? 0 : output_potential_[z];
                for (int h = 0; h < arch_.hidden_count(); ++h) {
                    const int w = arch_.weight({Layer::Output, z}, {Layer::Hidden, h});
                    if (w != 0 && hidden_fired_[h]) a += w;
                }
                output_potential_[z] = a;
                output_fired_[z] = a >= arch_.threshold({Layer::Output, z});
            }
            count += output_fired_[target_];
        }
        return count;
    }

private:
    const NetworkArchitecture& arch_;
    int target_;
    std::vector<int> hidden_potential_, output_potential_;
    std::vector<std::uint8_t> hidden_fired_, output_fired_;
};

} // namespace

CoalitionValue make_snn_value(const NetworkArchitecture& arch, const Image& image,
                              const SnnValueOptions& options) {
    if (image.pixel_count() != arch.input_count())
        throw ConfigError("image does not match the architecture");

    // per-pixel spike streams of the unmasked image, computed once
    auto base = std::make_shared<std::vector<std::vector<std::uint8_t>>>();
    const InputSequence seq = options.encoding == SpikeEncoding::Thresholded
                                  ? threshold_encode(image, options.theta)
                                  : poisson_encode(image, options.t_end, options.seed);
    base->resize(seq.t_end());
    for (int t = 1; t <= seq.t_end(); ++t) {
        (*base)[t - 1].resize(arch.input_count());
        for (int i = 0; i < arch.input_count(); ++i)
            (*base)[t - 1][i] = static_cast<std::uint8_t>(seq.bit(t, i));
    }

    auto forward = std::make_shared<FastForward>(arch, options.target_class);
    auto scratch = std::make_shared<std::vector<std::vector<std::uint8_t>>>(*base);

    return [base, forward, scratch](const std::vector<std::uint8_t>& coalition) -> double {
        for (std::size_t t = 0; t < base->size(); ++t) {
            auto& row = (*scratch)[t];
            const auto& src = (*base)[t];
            for (std::size_t i = 0; i < row.size(); ++i) row[i] = coalition[i] ? src[i] : 0;
        }
        return static_cast<double>(forward->run(*scratch));
    };
}

std::vector<double> exact_shapley(const CoalitionValue& v, int n) {
    if (n < 1 || n > 12) throw ConfigError("exact Shapley limited to 1..12 features");
    const std::uint32_t total = 1u << n;

    std::vector<double> values(total);
    std::vector<std::uint8_t> coalition(n);
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        for (int i = 0; i < n; ++i) coalition[i] = (mask >> i) & 1;
        values[mask] = v(coalition);
    }

    // weight of a coalition of size s when adding one player: s!(n-1-s)!/n!
    std::vector<double> weight(n);
    for (int s = 0; s < n; ++s) {
        double w = 1.0;
        for (int i = 1; i <= s; ++i) w *= i;
        for (int i = 1; i <= n - 1 - s; ++i) w *= i;
        for (int i = 1; i <= n; ++i) w /= i;
        weight[s] = w;
    }

    std::vector<double> scores(n, 0.0);
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        const int s = __builtin_popcount(mask);
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) continue;
            scores[i] += weight[s] * (values[mask | (1u << i)] - values[mask]);
        }
    }
    return scores;
}

namespace {

double shapley_kernel(int n, int s) {
    // (n-1) / (C(n,s) * s * (n-s))
    double comb = 1.0;
    for (int i = 1; i <= s; ++i) comb *= static_cast<double>(n - i + 1) / i;
    return (n - 1.0) / (comb * s * (n - s));
}

struct Row {
    std::vector<int> support; // indices into 0..n-2 (feature n-1 eliminated)
    double sign = 1.0;        // +1: membership entries, -1: complement entries
    double y = 0.0;
    double w = 1.0;
};

} // namespace

KernelShapResult sampled_shapley(const CoalitionValue& v, int n, int sample_size,
                                 std::uint64_t seed) {
    if (n < 2) throw ConfigError("kernel SHAP needs at least two features");
    if (sample_size < n) throw ConfigError("sample size below the feature count");

    KernelShapResult result;
    result.sample_size = sample_size;

    std::vector<std::uint8_t> coalition(n, 0);
    const double v_empty = v(coalition);
    std::fill(coalition.begin(), coalition.end(), 1);
    const double v_full = v(coalition);
    const double span = v_full - v_empty;

    // rows in the eliminated basis: row_i = z_i - z_{n-1} for i < n-1,
    // y = v(z) - v_empty - z_{n-1} * span
    std::vector<Row> rows;
    auto add_row = [&](const std::vector<std::uint8_t>& z, double w) {
        Row row;
        row.w = w;
        const bool last = z[n - 1] != 0;
        row.sign = last ? -1.0 : 1.0;
        for (int i = 0; i < n - 1; ++i) {
            if (!last && z[i]) row.support.push_back(i);
            if (last && !z[i]) row.support.push_back(i);
        }
        row.y = v(z) - v_empty - (last ? span : 0.0);
        rows.push_back(std::move(row));
    };

    const bool exhaustive = n <= 20 && (1ULL << n) - 2 <= static_cast<std::uint64_t>(sample_size);
    result.exhaustive = exhaustive;
    if (exhaustive) {
        for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
            for (int i = 0; i < n; ++i) coalition[i] = (mask >> i) & 1;
            add_row(coalition, shapley_kernel(n, __builtin_popcount(mask)));
        }
    } else {
        // sample sizes proportionally to the kernel mass, coalitions uniform
        // within a size; sampling by the kernel stands in for weighting
        std::vector<double> cumulative(n - 1, 0.0);
        double total = 0.0;
        for (int s = 1; s <= n - 1; ++s) {
            total += shapley_kernel(n, s) * std::exp(std::lgamma(n + 1) - std::lgamma(s + 1) -
                                                     std::lgamma(n - s + 1));
            cumulative[s - 1] = total;
        }
        CounterRng rng(seed, 0x5ace5);
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int j = 0; j < sample_size; ++j) {
            const double u = rng.next_double() * total;
            int s = 1;
            while (s < n - 1 && cumulative[s - 1] < u) ++s;
            for (int i = 0; i < n; ++i) {
                const std::size_t k = i + static_cast<std::size_t>(rng.next_below(n - i));
                std::swap(perm[i], perm[k]);
            }
            std::fill(coalition.begin(), coalition.end(), 0);
            for (int i = 0; i < s; ++i) coalition[perm[i]] = 1;
            add_row(coalition, 1.0);
        }
    }

    // normal equations over the n-1 kept features
    const int m = n - 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (const Row& row : rows) {
        const double wyy = row.w * row.y * row.sign;
        for (std::size_t p = 0; p < row.support.size(); ++p) {
            const int i = row.support[p];
            b(i) += wyy;
            A(i, i) += row.w;
            for (std::size_t q = p + 1; q < row.support.size(); ++q) {
                const int j = row.support[q];
                A(i, j) += row.w;
                A(j, i) += row.w;
            }
        }
    }

    const double scale = std::max(A.diagonal().maxCoeff(), 1.0);
    const double ridge = 1e-10 * scale;
    for (int i = 0; i < m; ++i) A(i, i) += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd phi = ldlt.solve(b);
    // flag solves where the ridge is doing real work
    const double min_pivot = ldlt.vectorD().minCoeff();
    result.regularized = min_pivot < 1e-6 * scale;

    result.scores.assign(n, 0.0);
    double kept_sum = 0.0;
    for (int i = 0; i < m; ++i) {
        result.scores[i] = phi(i);
        kept_sum += phi(i);
    }
    result.scores[n - 1] = span - kept_sum;
    return result;
}

AttributionReport relevance_audit(const std::vector<double>& scores, double delta,
                                  const NetworkArchitecture& arch) {
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    AttributionReport report;
    report.scores = scores;
    report.delta = delta;
    for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
        if (scores[i] > delta || scores[i] < -delta) {
            report.relevant.push_back(i);
            if (i < arch.input_count() && arch.disconnected_input(i))
                report.wrongly_relevant.push_back(i);
        }
    }
    report.wrongly_relevant_pct =
        report.relevant.empty()
            ? 0.0
            : 100.0 * static_cast<double>(report.wrongly_relevant.size()) / report.relevant.size();
    return report;
}

std::string report_to_json(const AttributionReport& report) {
    nlohmann::json j;
    j["scores"] = report.scores;
    j["sample_size"] = report.sample_size;
    j["delta"] = report.delta;
    j["relevant"] = report.relevant;
    j["wrongly_relevant"] = report.wrongly_relevant;
    j["wrongly_relevant_pct"] = report.wrongly_relevant_pct;
    j["regularized"] = report.regularized;
    j["wall_time_ms"] = report.wall_time_ms;
    return j.dump(1);
}

} // namespace bsnn
