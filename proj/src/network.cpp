#include "fusesim/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fusesim {

int NetworkSpec::max_channels() const {
    const auto counts = channel_counts();
    return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

std::vector<int> NetworkSpec::channel_counts() const {
    std::vector<int> counts;
    if (layers.empty()) {
        return counts;
    }
    counts.push_back(layers.front().in_channels);
    for (const auto& l : layers) {
        counts.push_back(l.out_channels);
    }
    return counts;
}

void NetworkSpec::validate() const {
    if (layers.empty()) {
        throw std::invalid_argument("network has no layers");
    }
    if (upscale < 1) {
        throw std::invalid_argument("upscale factor must be >= 1");
    }
    if (quant.size() != layers.size()) {
        throw std::invalid_argument("expected " + std::to_string(layers.size()) +
                                    " quant entries, got " + std::to_string(quant.size()));
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const std::string where = "layer " + std::to_string(i);
        if (l.in_channels < 1 || l.out_channels < 1) {
            throw std::invalid_argument(where + ": channel counts must be positive");
        }
        if (l.has_relu && l.has_residual_add) {
            throw std::invalid_argument(where + ": relu and residual add are exclusive");
        }
        if (l.has_residual_add && i + 1 != layers.size()) {
            throw std::invalid_argument(where + ": only the last layer may add the residual");
        }
        if (i + 1 < layers.size() && l.out_channels != layers[i + 1].in_channels) {
            throw std::invalid_argument(where + ": out_channels does not match next layer");
        }
        if (quant[i].requant_shift < 0 || quant[i].requant_shift > QuantParams::kMaxShift) {
            throw std::invalid_argument(where + ": requant_shift out of [0, 24]");
        }
    }
    if (output_channels() != input_channels() * upscale * upscale) {
        throw std::invalid_argument("final out_channels must equal in_channels * upscale^2");
    }
}

NetworkSpec NetworkSpec::apbn7() {
    NetworkSpec net;
    net.upscale = 3;
    net.layers.push_back({3, 28, true, false});
    for (int i = 0; i < 5; ++i) {
        net.layers.push_back({28, 28, true, false});
    }
    net.layers.push_back({28, 27, false, true});
    net.quant.assign(net.layers.size(), QuantParams{});
    return net;
}

void WeightSet::validate_against(const NetworkSpec& net) const {
    if (layers.size() != net.layers.size()) {
        throw std::invalid_argument("weight set has " + std::to_string(layers.size()) +
                                    " layers, network expects " +
                                    std::to_string(net.layers.size()));
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& w = layers[i];
        const auto& l = net.layers[i];
        if (w.out_channels != l.out_channels || w.in_channels != l.in_channels ||
            w.weights.size() != static_cast<std::size_t>(l.out_channels) * l.in_channels * 9 ||
            w.bias.size() != static_cast<std::size_t>(l.out_channels)) {
            throw std::invalid_argument("weight shape mismatch at layer " + std::to_string(i));
        }
    }
}

std::int64_t WeightSet::weight_count() const {
    std::int64_t n = 0;
    for (const auto& l : layers) {
        n += static_cast<std::int64_t>(l.weights.size());
    }
    return n;
}

std::int64_t WeightSet::bias_count() const {
    std::int64_t n = 0;
    for (const auto& l : layers) {
        n += static_cast<std::int64_t>(l.bias.size());
    }
    return n;
}

WeightSet zero_weights(const NetworkSpec& net) {
    WeightSet ws;
    for (const auto& l : net.layers) {
        ws.layers.emplace_back(l.out_channels, l.in_channels);
    }
    return ws;
}

}  // namespace fusesim
