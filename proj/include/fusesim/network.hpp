#pragma once

#include <cstdint>
#include <vector>

namespace fusesim {

/// One 3x3 convolution layer. The kernel size is fixed by the datapath.
struct LayerSpec {
    int in_channels = 0;
    int out_channels = 0;
    bool has_relu = false;
    bool has_residual_add = false;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Per-layer requantization: the i32 accumulator is right-shifted, rounded
/// half away from zero and clamped to u8. Output zero point is always 0.
struct QuantParams {
    static constexpr int kMaxShift = 24;
    int requant_shift = 0;

    friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    int upscale = 1;
    std::vector<QuantParams> quant;

    int num_layers() const { return static_cast<int>(layers.size()); }
    int input_channels() const { return layers.front().in_channels; }
    int output_channels() const { return layers.back().out_channels; }
    int max_channels() const;

    /// Ch_0 .. Ch_L: input channels followed by each layer's output channels.
    std::vector<int> channel_counts() const;

    /// Throws std::invalid_argument on any violated structural invariant.
    void validate() const;

    /// 7 layers, 3 -> 28 x6 -> 27, x3 upscale, ReLU on all but the last,
    /// anchor residual on the last.
    static NetworkSpec apbn7();

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Weights of one layer, laid out out-major / in-major / row / col.
struct LayerWeights {
    int out_channels = 0;
    int in_channels = 0;
    std::vector<std::int8_t> weights;
    std::vector<std::int32_t> bias;

    LayerWeights() = default;
    LayerWeights(int out_ch, int in_ch)
        : out_channels(out_ch), in_channels(in_ch),
          weights(static_cast<std::size_t>(out_ch) * in_ch * 9, 0),
          bias(static_cast<std::size_t>(out_ch), 0) {}

    std::int8_t& at(int o, int i, int ky, int kx) {
        return weights[((static_cast<std::size_t>(o) * in_channels + i) * 3 + ky) * 3 + kx];
    }
    std::int8_t at(int o, int i, int ky, int kx) const {
        return weights[((static_cast<std::size_t>(o) * in_channels + i) * 3 + ky) * 3 + kx];
    }

    friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct WeightSet {
    std::vector<LayerWeights> layers;

    /// Throws std::invalid_argument if any layer's shape disagrees with `net`.
    void validate_against(const NetworkSpec& net) const;

    std::int64_t weight_count() const;
    std::int64_t bias_count() const;

    friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

/// A network shape together with its quantization and weights.
struct Model {
    NetworkSpec net;
    WeightSet weights;

    friend bool operator==(const Model&, const Model&) = default;
};

/// Zero weights and biases for `net` (shifts untouched).
WeightSet zero_weights(const NetworkSpec& net);

}  // namespace fusesim
