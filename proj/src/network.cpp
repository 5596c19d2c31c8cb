#include "bsnn/network.hpp"

#include "bsnn/errors.hpp"

#include <fstream>
#include <json.hpp>

namespace bsnn {

using nlohmann::json;

std::string to_string(const NeuronId& id) {
    switch (id.layer) {
    case Layer::Input: return "I" + std::to_string(id.index);
    case Layer::Hidden: return "H" + std::to_string(id.index);
    case Layer::Output: return "C" + std::to_string(id.index);
    }
    return "?";
}

NetworkArchitecture::NetworkArchitecture(int input_count, int hidden_count, int output_count,
                                         WeightScale scale)
    : input_count_(input_count), hidden_count_(hidden_count), output_count_(output_count),
      scale_(scale) {
    if (input_count < 1 || hidden_count < 1 || output_count < 1)
        throw ConfigError("layer sizes must be positive");
    hidden_weights_.assign(static_cast<std::size_t>(hidden_count) * input_count, 0);
    output_weights_.assign(static_cast<std::size_t>(output_count) * hidden_count, 0);
    thresholds_.assign(hidden_count + output_count, 1);
}

void NetworkArchitecture::check_weight_in_scale(int w) const {
    const bool ok = scale_ == WeightScale::Binary ? (w == 0 || w == 1) : (w >= -1 && w <= 1);
    if (!ok) throw ConfigError("weight " + std::to_string(w) + " outside the network's scale");
}

int NetworkArchitecture::weight(NeuronId post, NeuronId pre) const {
    if (post.layer == Layer::Hidden && pre.layer == Layer::Input)
        return hidden_weights_[static_cast<std::size_t>(post.index) * input_count_ + pre.index];
    if (post.layer == Layer::Output && pre.layer == Layer::Hidden)
        return output_weights_[static_cast<std::size_t>(post.index) * hidden_count_ + pre.index];
    throw ConfigError("no connectivity between " + to_string(pre) + " and " + to_string(post));
}

void NetworkArchitecture::set_weight(NeuronId post, NeuronId pre, int w) {
    check_weight_in_scale(w);
    if (post.layer == Layer::Hidden && pre.layer == Layer::Input) {
        hidden_weights_[static_cast<std::size_t>(post.index) * input_count_ + pre.index] =
            static_cast<std::int8_t>(w);
        return;
    }
    if (post.layer == Layer::Output && pre.layer == Layer::Hidden) {
        output_weights_[static_cast<std::size_t>(post.index) * hidden_count_ + pre.index] =
            static_cast<std::int8_t>(w);
        return;
    }
    throw ConfigError("no connectivity between " + to_string(pre) + " and " + to_string(post));
}

std::vector<NeuronId> NetworkArchitecture::positive_pre(NeuronId post) const {
    std::vector<NeuronId> pre;
    const Layer pre_layer = post.layer == Layer::Hidden ? Layer::Input : Layer::Hidden;
    const int n = fan_in(post);
    for (int i = 0; i < n; ++i)
        if (weight(post, {pre_layer, i}) == 1) pre.push_back({pre_layer, i});
    return pre;
}

std::vector<NeuronId> NetworkArchitecture::negative_pre(NeuronId post) const {
    std::vector<NeuronId> pre;
    const Layer pre_layer = post.layer == Layer::Hidden ? Layer::Input : Layer::Hidden;
    const int n = fan_in(post);
    for (int i = 0; i < n; ++i)
        if (weight(post, {pre_layer, i}) == -1) pre.push_back({pre_layer, i});
    return pre;
}

bool NetworkArchitecture::disconnected_input(int i) const {
    for (int h = 0; h < hidden_count_; ++h)
        if (hidden_weights_[static_cast<std::size_t>(h) * input_count_ + i] != 0) return false;
    return true;
}

std::vector<int> NetworkArchitecture::connected_input_mask() const {
    std::vector<int> mask(input_count_, 0);
    for (int i = 0; i < input_count_; ++i) mask[i] = disconnected_input(i) ? 0 : 1;
    return mask;
}

int NetworkArchitecture::global_index(NeuronId id) const {
    switch (id.layer) {
    case Layer::Input: return id.index;
    case Layer::Hidden: return input_count_ + id.index;
    case Layer::Output: return input_count_ + hidden_count_ + id.index;
    }
    return -1;
}

NeuronId NetworkArchitecture::neuron_at(int global) const {
    if (global < input_count_) return {Layer::Input, global};
    if (global < input_count_ + hidden_count_) return {Layer::Hidden, global - input_count_};
    return {Layer::Output, global - input_count_ - hidden_count_};
}

int NetworkArchitecture::non_input_index(NeuronId id) const {
    if (id.layer == Layer::Hidden) return id.index;
    if (id.layer == Layer::Output) return hidden_count_ + id.index;
    throw ConfigError("input neurons have no threshold");
}

std::string NetworkArchitecture::to_json() const {
    json j;
    j["weight_scale"] = scale_ == WeightScale::Binary ? "binary" : "ternary";
    j["input_count"] = input_count_;
    j["hidden_count"] = hidden_count_;
    j["output_count"] = output_count_;
    auto matrix = [](const std::vector<std::int8_t>& w, int rows, int cols) {
        json m = json::array();
        for (int r = 0; r < rows; ++r) {
            json row = json::array();
            for (int c = 0; c < cols; ++c) row.push_back(static_cast<int>(w[static_cast<std::size_t>(r) * cols + c]));
            m.push_back(std::move(row));
        }
        return m;
    };
    j["hidden_weights"] = matrix(hidden_weights_, hidden_count_, input_count_);
    j["output_weights"] = matrix(output_weights_, output_count_, hidden_count_);
    j["thresholds"] = thresholds_;
    return j.dump(1);
}

NetworkArchitecture NetworkArchitecture::from_json(const std::string& text) {
    json j = json::parse(text);
    const std::string scale_name = j.at("weight_scale").get<std::string>();
    WeightScale scale;
    if (scale_name == "binary")
        scale = WeightScale::Binary;
    else if (scale_name == "ternary")
        scale = WeightScale::Ternary;
    else
        throw DataError("unknown weight_scale: " + scale_name);

    NetworkArchitecture arch(j.at("input_count").get<int>(), j.at("hidden_count").get<int>(),
                             j.at("output_count").get<int>(), scale);
    auto load_matrix = [&arch](const json& m, Layer post_layer, int rows, int cols) {
        if (static_cast<int>(m.size()) != rows) throw DataError("weight matrix row count mismatch");
        for (int r = 0; r < rows; ++r) {
            if (static_cast<int>(m[r].size()) != cols) throw DataError("weight matrix column count mismatch");
            for (int c = 0; c < cols; ++c) {
                if (!m[r][c].is_number_integer()) throw DataError("weights must be integers");
                const Layer pre_layer = post_layer == Layer::Hidden ? Layer::Input : Layer::Hidden;
                arch.set_weight({post_layer, r}, {pre_layer, c}, m[r][c].get<int>());
            }
        }
    };
    load_matrix(j.at("hidden_weights"), Layer::Hidden, arch.hidden_count(), arch.input_count());
    load_matrix(j.at("output_weights"), Layer::Output, arch.output_count(), arch.hidden_count());
    const auto& taus = j.at("thresholds");
    if (static_cast<int>(taus.size()) != arch.non_input_count())
        throw DataError("threshold count mismatch");
    for (int i = 0; i < arch.non_input_count(); ++i) {
        if (!taus[i].is_number_integer()) throw DataError("thresholds must be integers");
        arch.thresholds_[i] = taus[i].get<int>();
    }
    return arch;
}

void NetworkArchitecture::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << to_json() << '\n';
}

NetworkArchitecture NetworkArchitecture::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

} // namespace bsnn
