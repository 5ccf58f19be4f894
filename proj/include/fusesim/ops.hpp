#pragma once

#include "fusesim/network.hpp"
#include "fusesim/tensor.hpp"

namespace fusesim {

/// How a convolution treats one edge of its input.
///  Zero: the edge is zero-padded; output keeps the input extent on that side.
///  Halo: the caller supplied one extra row/column; output shrinks by one.
enum class EdgeMode { Zero, Halo };

struct PadSpec {
    EdgeMode top = EdgeMode::Zero;
    EdgeMode bottom = EdgeMode::Zero;
    EdgeMode left = EdgeMode::Zero;
    EdgeMode right = EdgeMode::Zero;

    static constexpr PadSpec zero() { return {}; }
    static constexpr PadSpec halo_columns() {
        return {EdgeMode::Zero, EdgeMode::Zero, EdgeMode::Halo, EdgeMode::Halo};
    }
};

/// Exact i32 3x3 convolution plus bias. Output extent follows `pad`.
AccumTensor conv3x3(const ActivationTensor& input, const LayerWeights& weights,
                    PadSpec pad = PadSpec::zero());

/// v -> clamp(round_half_away(v / 2^shift), 0, 255); with relu, v < 0 -> 0 first.
ActivationTensor requantize(const AccumTensor& acc, QuantParams q, bool relu);

/// Single-value form of requantize, shared by the datapath model.
std::uint8_t requantize_value(std::int32_t v, int shift, bool relu);

/// Adds the low-resolution anchor: channel c*s^2+k gets lr[c] << shift.
AccumTensor anchor_residual_add(const AccumTensor& conv_out, const ActivationTensor& lr_input,
                                int upscale, int shift);

/// Pixel shuffle: out(c, y*s+dy, x*s+dx) = t(c*s^2 + dy*s + dx, y, x).
ActivationTensor depth_to_space(const ActivationTensor& t, int upscale);

/// Inverse of depth_to_space.
ActivationTensor space_to_depth(const ActivationTensor& t, int upscale);

/// Final-layer tail shared by every schedule: anchor add, requantize, shuffle.
ActivationTensor finish_output(const AccumTensor& conv_out, const ActivationTensor& lr_anchor,
                               const NetworkSpec& net);

/// Golden whole-image executor. Zero padding at image borders, per-layer
/// requantize, anchor residual on the last layer, then depth-to-space.
ActivationTensor reference_forward(const NetworkSpec& net, const WeightSet& weights,
                                   const ActivationTensor& image);

/// Runs layer `index` on `input` with the given padding and requantizes it.
/// Not valid for the residual layer.
ActivationTensor run_hidden_layer(const NetworkSpec& net, const WeightSet& weights, int index,
                                  const ActivationTensor& input, PadSpec pad);

}  // namespace fusesim
