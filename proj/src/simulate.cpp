#include "bsnn/simulate.hpp"

#include <json.hpp>

#include "bsnn/errors.hpp"

namespace bsnn {

using nlohmann::json;

DynamicsTrace simulate(const NetworkArchitecture& arch, const InputSequence& input) {
    if (input.input_count() != arch.input_count())
        throw ConfigError("input sequence width does not match the architecture");

    const int t_end = input.t_end();
    DynamicsTrace trace(arch.input_count(), arch.non_input_count(), t_end);

    for (int t = 1; t <= t_end; ++t) {
        for (int i = 0; i < arch.input_count(); ++i)
            trace.set_firing(t, i, input.bit(t, i));

        // hidden before outputs: outputs integrate hidden spikes of the same step
        for (Layer layer : {Layer::Hidden, Layer::Output}) {
            const int count = layer == Layer::Hidden ? arch.hidden_count() : arch.output_count();
            for (int idx = 0; idx < count; ++idx) {
                const NeuronId id{layer, idx};
                const int ni = arch.non_input_index(id);
                const int fired_prev = trace.firing(t - 1, arch.global_index(id));
                int potential = fired_prev ? 0 : trace.potential(t - 1, ni);

                const Layer pre_layer = layer == Layer::Hidden ? Layer::Input : Layer::Hidden;
                const int fan = arch.fan_in(id);
                for (int p = 0; p < fan; ++p) {
                    const int w = arch.weight(id, {pre_layer, p});
                    if (w != 0) potential += w * trace.firing(t, arch.global_index({pre_layer, p}));
                }

                trace.set_potential(t, ni, potential);
                trace.set_firing(t, arch.global_index(id), potential >= arch.threshold(id) ? 1 : 0);
            }
        }
    }
    return trace;
}

std::vector<int> output_spike_counts(const NetworkArchitecture& arch, const DynamicsTrace& trace) {
    std::vector<int> counts(arch.output_count(), 0);
    for (int z = 0; z < arch.output_count(); ++z) {
        const int g = arch.global_index({Layer::Output, z});
        for (int t = 0; t <= trace.t_end(); ++t) counts[z] += trace.firing(t, g);
    }
    return counts;
}

int classify(const NetworkArchitecture& arch, const DynamicsTrace& trace) {
    const auto counts = output_spike_counts(arch, trace);
    int best = 0;
    for (int z = 1; z < static_cast<int>(counts.size()); ++z)
        if (counts[z] > counts[best]) best = z;
    return best;
}

std::string DynamicsTrace::to_json() const {
    json j;
    j["t_end"] = t_end_;
    j["input_count"] = input_count_;
    j["non_input_count"] = non_input_count_;
    json firing = json::array();
    json potential = json::array();
    for (int t = 0; t <= t_end_; ++t) {
        json frow = json::array();
        for (int g = 0; g < input_count_ + non_input_count_; ++g) frow.push_back(this->firing(t, g));
        firing.push_back(std::move(frow));
        json prow = json::array();
        for (int ni = 0; ni < non_input_count_; ++ni) prow.push_back(this->potential(t, ni));
        potential.push_back(std::move(prow));
    }
    j["firing"] = std::move(firing);
    j["potentials"] = std::move(potential);
    return j.dump(1);
}

DynamicsTrace DynamicsTrace::from_json(const std::string& text) {
    json j = json::parse(text);
    DynamicsTrace trace(j.at("input_count").get<int>(), j.at("non_input_count").get<int>(),
                        j.at("t_end").get<int>());
    const auto& firing = j.at("firing");
    const auto& potential = j.at("potentials");
    if (static_cast<int>(firing.size()) != trace.t_end_ + 1 ||
        static_cast<int>(potential.size()) != trace.t_end_ + 1)
        throw DataError("trace row count mismatch");
    for (int t = 0; t <= trace.t_end_; ++t) {
        for (int g = 0; g < trace.input_count_ + trace.non_input_count_; ++g)
            trace.set_firing(t, g, firing[t][g].get<int>());
        for (int ni = 0; ni < trace.non_input_count_; ++ni)
            trace.set_potential(t, ni, potential[t][ni].get<int>());
    }
    return trace;
}

} // namespace bsnn
