#include "fusesim/datapath.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fusesim {

double CycleStats::utilization() const {
    const auto c = cycles();
    if (c == 0) {
        return 0.0;
    }
    return static_cast<double>(active_mac_cycles) /
           (static_cast<double>(c) * PeGeometry::total_macs);
}

CycleStats& CycleStats::operator+=(const CycleStats& o) {
    issue_cycles += o.issue_cycles;
    drain_cycles += o.drain_cycles;
    active_mac_cycles += o.active_mac_cycles;
    return *this;
}

PartialColumn pe_array_cycle(const InputColumn& inputs, const WeightColumn& weights) {
    // MAC (j, k) sees input j + k and weight k.
    std::array<std::array<std::int32_t, PeGeometry::taps>, PeGeometry::outputs_per_array> mac{};
    for (int j = 0; j < PeGeometry::outputs_per_array; ++j) {
        for (int k = 0; k < PeGeometry::taps; ++k) {
            mac[j][k] = static_cast<std::int32_t>(inputs[j + k]) * weights[k];
        }
    }
    PartialColumn sums{};
    for (int j = 0; j < PeGeometry::outputs_per_array; ++j) {
        for (int k = 0; k < PeGeometry::taps; ++k) {
            sums[j] += mac[j][k];
        }
    }
    return sums;
}

PartialColumn pe_block_cycle(const std::array<InputColumn, 3>& inputs,
                             const std::array<WeightColumn, 3>& weights) {
    PartialColumn out{};
    for (int a = 0; a < PeGeometry::arrays_per_block; ++a) {
        const auto p = pe_array_cycle(inputs[a], weights[a]);
        for (int j = 0; j < PeGeometry::outputs_per_array; ++j) {
            out[j] += p[j];
        }
    }
    return out;
}

PartialColumn accumulate(std::span<const PartialColumn> block_outputs,
                         const AccumulatorAddends& addends, AddendSelect select) {
    if (block_outputs.size() != PeGeometry::num_blocks) {
        throw std::invalid_argument("accumulate: expected 28 block outputs, got " +
                                    std::to_string(block_outputs.size()));
    }
    constexpr std::size_t half = PeGeometry::num_blocks / 2;
    PartialColumn left{};
    PartialColumn right{};
    for (std::size_t b = 0; b < half; ++b) {
        for (int j = 0; j < PeGeometry::outputs_per_array; ++j) {
            left[j] += block_outputs[b][j];
            right[j] += block_outputs[b + half][j];
        }
    }
    // Stage 2.
    const auto& addend = select == AddendSelect::Bias ? addends.bias : addends.residual;
    PartialColumn out{};
    for (int j = 0; j < PeGeometry::outputs_per_array; ++j) {
        out[j] = left[j] + right[j] + addend[j];
    }
    return out;
}

namespace {

int passes_for(int in_channels) {
    return (in_channels + PeGeometry::num_blocks - 1) / PeGeometry::num_blocks;
}

int row_groups(int rows) {
    return (rows + PeGeometry::outputs_per_array - 1) / PeGeometry::outputs_per_array;
}

}  // namespace

CycleStats tile_layer_cycles(const TileRegion& region, int in_channels, int out_channels) {
    CycleStats s;
    const std::int64_t rows = region.rows.size();
    const std::int64_t cols = region.cols.size();
    s.issue_cycles = std::int64_t{row_groups(static_cast<int>(rows))} * cols * out_channels *
                     passes_for(in_channels);
    if (s.issue_cycles > 0) {
        s.drain_cycles = PeGeometry::accumulator_drain;
    }
    s.active_mac_cycles = rows * cols * out_channels * 9 * in_channels;
    return s;
}

AccumTensor datapath_conv(const ActivationTensor& input, const LayerWeights& weights,
                          PadSpec pad, const AccumTensor* residual, CycleStats* stats) {
    if (input.channels() != weights.in_channels) {
        throw std::invalid_argument("datapath_conv: channel mismatch");
    }
    const int top = pad.top == EdgeMode::Halo ? 1 : 0;
    const int left = pad.left == EdgeMode::Halo ? 1 : 0;
    const int out_h = input.height() - top - (pad.bottom == EdgeMode::Halo ? 1 : 0);
    const int out_w = input.width() - left - (pad.right == EdgeMode::Halo ? 1 : 0);
    if (out_h < 0 || out_w < 0) {
        throw std::invalid_argument("datapath_conv: input too small for its halo");
    }
    AccumTensor out(out_h, out_w, weights.out_channels);
    if (residual != nullptr && !residual->same_shape(out)) {
        throw std::invalid_argument("datapath_conv: residual shape " + shape_string(*residual) +
                                    " vs output " + shape_string(out));
    }

    constexpr int kRows = PeGeometry::outputs_per_array;
    const int passes = passes_for(weights.in_channels);
    const int groups = row_groups(out_h);
    std::vector<PartialColumn> blocks(PeGeometry::num_blocks);

    for (int o = 0; o < weights.out_channels; ++o) {
        for (int x = 0; x < out_w; ++x) {
            for (int g = 0; g < groups; ++g) {
                const int y0 = g * kRows;
                PartialColumn acc{};
                for (int pass = 0; pass < passes; ++pass) {
                    for (int b = 0; b < PeGeometry::num_blocks; ++b) {
                        const int i = pass * PeGeometry::num_blocks + b;
                        if (i >= weights.in_channels) {
                            blocks[b] = PartialColumn{};
                            continue;
                        }
                        std::array<InputColumn, 3> in_cols{};
                        std::array<WeightColumn, 3> w_cols{};
                        for (int a = 0; a < 3; ++a) {
                            for (int r = 0; r < PeGeometry::inputs_per_array; ++r) {
                                in_cols[a][r] = input.at_or_zero(i, y0 + r - 1 + top, x + a - 1 + left);
                            }
                            for (int k = 0; k < 3; ++k) {
                                w_cols[a][k] = weights.at(o, i, k, a);
                            }
                        }
                        blocks[b] = pe_block_cycle(in_cols, w_cols);
                    }
                    AccumulatorAddends addends;
                    AddendSelect select = AddendSelect::Bias;
                    if (pass == 0) {
                        for (int j = 0; j < kRows; ++j) {
                            addends.bias[j] = weights.bias[static_cast<std::size_t>(o)];
                            if (residual != nullptr && y0 + j < out_h) {
                                addends.residual[j] = addends.bias[j] + (*residual)(o, y0 + j, x);
                            }
                        }
                        if (residual != nullptr) {
                            select = AddendSelect::Residual;
                        }
                    }
                    const auto partial = accumulate(blocks, addends, select);
                    for (int j = 0; j < kRows; ++j) {
                        acc[j] += partial[j];
                    }
                }
                for (int j = 0; j < kRows && y0 + j < out_h; ++j) {
                    out(o, y0 + j, x) = acc[j];
                }
            }
        }
    }
    if (stats != nullptr) {
        TileRegion region{0, Range{0, out_h}, Range{0, out_w}};
        *stats += tile_layer_cycles(region, weights.in_channels, weights.out_channels);
    }
    return out;
}

}  // namespace fusesim
