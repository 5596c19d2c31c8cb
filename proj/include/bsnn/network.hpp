#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bsnn {

enum class Layer : std::uint8_t { Input, Hidden, Output };

struct NeuronId {
    Layer layer;
    int index;

    friend bool operator==(const NeuronId&, const NeuronId&) = default;
};

std::string to_string(const NeuronId& id);

enum class WeightScale : std::uint8_t { Binary, Ternary };

// Feed-forward 784-k-m architecture with integer weights in {0,1} or
// {-1,0,1}, fully connected input->hidden and hidden->output. Thresholds
// are per non-input neuron, hidden block first.
class NetworkArchitecture {
public:
    NetworkArchitecture() = default;
    NetworkArchitecture(int input_count, int hidden_count, int output_count, WeightScale scale);

    int input_count() const { return input_count_; }
    int hidden_count() const { return hidden_count_; }
    int output_count() const { return output_count_; }
    int neuron_count() const { return input_count_ + hidden_count_ + output_count_; }
    int non_input_count() const { return hidden_count_ + output_count_; }
    WeightScale scale() const { return scale_; }

    // weight of the edge pre -> post; pre must be in the layer feeding post
    int weight(NeuronId post, NeuronId pre) const;
    void set_weight(NeuronId post, NeuronId pre, int w);

    int threshold(NeuronId post) const { return thresholds_[non_input_index(post)]; }
    void set_threshold(NeuronId post, int tau) { thresholds_[non_input_index(post)] = tau; }

    int fan_in(NeuronId post) const { return post.layer == Layer::Hidden ? input_count_ : hidden_count_; }

    // predecessors with weight +1 / -1 (Def 3's R+ and Appendix B.2's R-)
    std::vector<NeuronId> positive_pre(NeuronId post) const;
    std::vector<NeuronId> negative_pre(NeuronId post) const;

    // true when input feature i has weight 0 on every hidden neuron
    bool disconnected_input(int i) const;
    std::vector<int> connected_input_mask() const;

    // dense numbering: inputs, then hidden, then outputs
    int global_index(NeuronId id) const;
    NeuronId neuron_at(int global) const;
    int non_input_index(NeuronId id) const;

    std::string to_json() const;
    static NetworkArchitecture from_json(const std::string& text);
    void save(const std::string& path) const;
    static NetworkArchitecture load(const std::string& path);

    friend bool operator==(const NetworkArchitecture&, const NetworkArchitecture&) = default;

private:
    void check_weight_in_scale(int w) const;

    int input_count_ = 0;
    int hidden_count_ = 0;
    int output_count_ = 0;
    WeightScale scale_ = WeightScale::Binary;
    std::vector<std::int8_t> hidden_weights_; // hidden_count x input_count, row-major
    std::vector<std::int8_t> output_weights_; // output_count x hidden_count, row-major
    std::vector<int> thresholds_;             // hidden block, then output block
};

} // namespace bsnn
