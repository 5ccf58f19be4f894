#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "fusesim/network.hpp"
#include "fusesim/ops.hpp"
#include "fusesim/tensor.hpp"
#include "fusesim/tiling.hpp"

namespace fusesim {

struct PeGeometry {
    static constexpr int num_blocks = 28;
    static constexpr int arrays_per_block = 3;
    static constexpr int outputs_per_array = 5;
    static constexpr int taps = 3;
    static constexpr int inputs_per_array = outputs_per_array + taps - 1;  // 7
    static constexpr int macs_per_array = outputs_per_array * taps;        // 15
    static constexpr int total_macs = num_blocks * arrays_per_block * macs_per_array;
    /// Flat accumulator drain charged once per tile-layer.
    static constexpr int accumulator_drain = 2;
};
static_assert(PeGeometry::total_macs == 1260);

struct CycleStats {
    std::int64_t issue_cycles = 0;
    std::int64_t drain_cycles = 0;
    std::int64_t active_mac_cycles = 0;

    std::int64_t cycles() const { return issue_cycles + drain_cycles; }
    double utilization() const;

    CycleStats& operator+=(const CycleStats& o);
    friend bool operator==(const CycleStats&, const CycleStats&) = default;
};

using InputColumn = std::array<std::uint8_t, PeGeometry::inputs_per_array>;
using WeightColumn = std::array<std::int8_t, PeGeometry::taps>;
using PartialColumn = std::array<std::int32_t, PeGeometry::outputs_per_array>;

/// One PE array for one cycle: seven activations broadcast along rows,
/// three weights broadcast along columns, products summed on diagonals.
PartialColumn pe_array_cycle(const InputColumn& inputs, const WeightColumn& weights);

/// Three PE arrays fed consecutive input and weight columns: one input
/// channel's 3x3 contribution to five vertically adjacent outputs.
PartialColumn pe_block_cycle(const std::array<InputColumn, 3>& inputs,
                             const std::array<WeightColumn, 3>& weights);

enum class AddendSelect { Bias, Residual };

struct AccumulatorAddends {
    PartialColumn bias{};
    PartialColumn residual{};
};

/// Two-stage adder: two half trees over the 28 block outputs, then the
/// combined sum plus the multiplexed addend.
PartialColumn accumulate(std::span<const PartialColumn> block_outputs,
                         const AccumulatorAddends& addends, AddendSelect select);

/// Issue cycles for one layer over `region`: ceil(rows/5) * cols * out per
/// pass of 28 input channels, plus the accumulator drain.
CycleStats tile_layer_cycles(const TileRegion& region, int in_channels, int out_channels);

/// Convolution carried out entirely on the modeled PE blocks and
/// accumulator. With `residual` set, each output gets bias + residual via
/// the residual mux input; otherwise the bias is selected. Issue/drain
/// cycles for the call are added to `stats` when non-null.
AccumTensor datapath_conv(const ActivationTensor& input, const LayerWeights& weights,
                          PadSpec pad, const AccumTensor* residual = nullptr,
                          CycleStats* stats = nullptr);

}  // namespace fusesim
