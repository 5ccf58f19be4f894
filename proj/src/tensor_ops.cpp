#include "fusesim/ops.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fusesim {

std::string shape_string(int height, int width, int channels) {
    return std::to_string(height) + "x" + std::to_string(width) + "x" +
           std::to_string(channels);
}

namespace {

int edge_extra(EdgeMode m) { return m == EdgeMode::Halo ? 1 : 0; }

}  // namespace

AccumTensor conv3x3(const ActivationTensor& input, const LayerWeights& weights, PadSpec pad) {
    if (input.channels() != weights.in_channels) {
        throw std::invalid_argument("conv3x3: input has " + std::to_string(input.channels()) +
                                    " channels, weights expect " +
                                    std::to_string(weights.in_channels));
    }
    if (weights.weights.size() !=
            static_cast<std::size_t>(weights.out_channels) * weights.in_channels * 9 ||
        weights.bias.size() != static_cast<std::size_t>(weights.out_channels)) {
        throw std::invalid_argument("conv3x3: malformed weight tensor");
    }
    const int top = edge_extra(pad.top);
    const int left = edge_extra(pad.left);
    const int out_h = input.height() - top - edge_extra(pad.bottom);
    const int out_w = input.width() - left - edge_extra(pad.right);
    if (out_h < 0 || out_w < 0) {
        throw std::invalid_argument("conv3x3: input " + shape_string(input) +
                                    " too small for its halo");
    }

    // Each input channel is copied once into a zero-bordered plane of pitch
    // out_w + 2, so every tap becomes one contiguous multiply-add over the
    // flattened output grid. The two extra columns per row are discarded.
    const int pitch = out_w + 2;
    const std::size_t plane = static_cast<std::size_t>(out_h + 2) * pitch;
    const std::size_t grid = static_cast<std::size_t>(out_h) * pitch;
    std::vector<std::int16_t> padded(plane * static_cast<std::size_t>(weights.in_channels), 0);
    for (int i = 0; i < weights.in_channels; ++i) {
        std::int16_t* dst = padded.data() + plane * static_cast<std::size_t>(i);
        for (int py = 0; py < out_h + 2; ++py) {
            const int iy = py - 1 + top;
            if (iy < 0 || iy >= input.height()) {
                continue;
            }
            const auto src = input.row(i, iy);
            for (int px = 0; px < pitch; ++px) {
                const int ix = px - 1 + left;
                if (ix >= 0 && ix < input.width()) {
                    dst[static_cast<std::size_t>(py) * pitch + px] = src[static_cast<std::size_t>(ix)];
                }
            }
        }
    }

    AccumTensor out(out_h, out_w, weights.out_channels);
    std::vector<std::int32_t> acc(grid);
    for (int o = 0; o < weights.out_channels; ++o) {
        std::fill(acc.begin(), acc.end(), weights.bias[static_cast<std::size_t>(o)]);
        for (int i = 0; i < weights.in_channels; ++i) {
            const std::int16_t* base = padded.data() + plane * static_cast<std::size_t>(i);
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const std::int32_t w = weights.at(o, i, ky, kx);
                    if (w == 0) {
                        continue;
                    }
                    const std::int16_t* src = base + static_cast<std::size_t>(ky) * pitch + kx;
                    std::int32_t* dst = acc.data();
                    for (std::size_t k = 0; k < grid; ++k) {
                        dst[k] += w * src[k];
                    }
                }
            }
        }
        for (int y = 0; y < out_h; ++y) {
            const auto* src = acc.data() + static_cast<std::size_t>(y) * pitch;
            auto r = out.row(o, y);
            std::copy(src, src + out_w, r.begin());
        }
    }
#ifndef NDEBUG
    for (const auto v : out.data()) {
        assert(std::abs(static_cast<std::int64_t>(v)) < (std::int64_t{1} << 30));
    }
#endif
    return out;
}

std::uint8_t requantize_value(std::int32_t v, int shift, bool relu) {
    std::int64_t x = v;
    if (relu && x < 0) {
        x = 0;
    }
    if (shift > 0) {
        const std::int64_t half = std::int64_t{1} << (shift - 1);
        x = x >= 0 ? (x + half) >> shift : -((-x + half) >> shift);
    }
    return static_cast<std::uint8_t>(std::clamp<std::int64_t>(x, 0, 255));
}

ActivationTensor requantize(const AccumTensor& acc, QuantParams q, bool relu) {
    if (q.requant_shift < 0 || q.requant_shift > QuantParams::kMaxShift) {
        throw std::invalid_argument("requantize: shift out of range");
    }
    ActivationTensor out(acc.height(), acc.width(), acc.channels());
    auto src = acc.data();
    auto dst = out.data();
    for (std::size_t k = 0; k < src.size(); ++k) {
        dst[k] = requantize_value(src[k], q.requant_shift, relu);
    }
    return out;
}

AccumTensor anchor_residual_add(const AccumTensor& conv_out, const ActivationTensor& lr_input,
                                int upscale, int shift) {
    const int s2 = upscale * upscale;
    if (upscale < 1 || conv_out.channels() != lr_input.channels() * s2) {
        throw std::invalid_argument("anchor_residual_add: " +
                                    std::to_string(conv_out.channels()) +
                                    " conv channels vs " + std::to_string(lr_input.channels()) +
                                    " anchor channels at upscale " + std::to_string(upscale));
    }
    if (conv_out.height() != lr_input.height() || conv_out.width() != lr_input.width()) {
        throw std::invalid_argument("anchor_residual_add: spatial mismatch " +
                                    shape_string(conv_out) + " vs " + shape_string(lr_input));
    }
    if (shift < 0 || shift > QuantParams::kMaxShift) {
        throw std::invalid_argument("anchor_residual_add: shift out of range");
    }
    AccumTensor out = conv_out;
    for (int c = 0; c < lr_input.channels(); ++c) {
        for (int k = 0; k < s2; ++k) {
            const int oc = c * s2 + k;
            for (int y = 0; y < out.height(); ++y) {
                for (int x = 0; x < out.width(); ++x) {
                    const std::int64_t v = static_cast<std::int64_t>(out(oc, y, x)) +
                                           (static_cast<std::int64_t>(lr_input(c, y, x)) << shift);
                    if (v > std::numeric_limits<std::int32_t>::max() ||
                        v < std::numeric_limits<std::int32_t>::min()) {
                        throw std::out_of_range("anchor_residual_add: accumulator overflow");
                    }
                    out(oc, y, x) = static_cast<std::int32_t>(v);
                }
            }
        }
    }
    return out;
}

ActivationTensor depth_to_space(const ActivationTensor& t, int upscale) {
    const int s2 = upscale * upscale;
    if (upscale < 1 || t.channels() % s2 != 0) {
        throw std::invalid_argument("depth_to_space: " + std::to_string(t.channels()) +
                                    " channels not divisible by " + std::to_string(s2));
    }
    ActivationTensor out(t.height() * upscale, t.width() * upscale, t.channels() / s2);
    for (int c = 0; c < out.channels(); ++c) {
        for (int dy = 0; dy < upscale; ++dy) {
            for (int dx = 0; dx < upscale; ++dx) {
                const int src_c = c * s2 + dy * upscale + dx;
                for (int y = 0; y < t.height(); ++y) {
                    for (int x = 0; x < t.width(); ++x) {
                        out(c, y * upscale + dy, x * upscale + dx) = t(src_c, y, x);
                    }
                }
            }
        }
    }
    return out;
}

ActivationTensor space_to_depth(const ActivationTensor& t, int upscale) {
    if (upscale < 1 || t.height() % upscale != 0 || t.width() % upscale != 0) {
        throw std::invalid_argument("space_to_depth: extent not divisible by factor");
    }
    const int s2 = upscale * upscale;
    ActivationTensor out(t.height() / upscale, t.width() / upscale, t.channels() * s2);
    for (int c = 0; c < t.channels(); ++c) {
        for (int dy = 0; dy < upscale; ++dy) {
            for (int dx = 0; dx < upscale; ++dx) {
                const int dst_c = c * s2 + dy * upscale + dx;
                for (int y = 0; y < out.height(); ++y) {
                    for (int x = 0; x < out.width(); ++x) {
                        out(dst_c, y, x) = t(c, y * upscale + dy, x * upscale + dx);
                    }
                }
            }
        }
    }
    return out;
}

ActivationTensor finish_output(const AccumTensor& conv_out, const ActivationTensor& lr_anchor,
                               const NetworkSpec& net) {
    const auto q = net.quant.back();
    const auto& last = net.layers.back();
    if (!last.has_residual_add) {
        return depth_to_space(requantize(conv_out, q, last.has_relu), net.upscale);
    }
    const auto summed = anchor_residual_add(conv_out, lr_anchor, net.upscale, q.requant_shift);
    return depth_to_space(requantize(summed, q, false), net.upscale);
}

ActivationTensor run_hidden_layer(const NetworkSpec& net, const WeightSet& weights, int index,
                                  const ActivationTensor& input, PadSpec pad) {
    const auto& spec = net.layers[static_cast<std::size_t>(index)];
    return requantize(conv3x3(input, weights.layers[static_cast<std::size_t>(index)], pad),
                      net.quant[static_cast<std::size_t>(index)], spec.has_relu);
}

ActivationTensor reference_forward(const NetworkSpec& net, const WeightSet& weights,
                                   const ActivationTensor& image) {
    net.validate();
    weights.validate_against(net);
    if (image.channels() != net.input_channels()) {
        throw std::invalid_argument("reference_forward: image has " +
                                    std::to_string(image.channels()) + " channels, network expects " +
                                    std::to_string(net.input_channels()));
    }
    ActivationTensor x = image;
    const int last = net.num_layers() - 1;
    for (int i = 0; i < last; ++i) {
        x = run_hidden_layer(net, weights, i, x, PadSpec::zero());
    }
    return finish_output(conv3x3(x, weights.layers.back()), image, net);
}

}  // namespace fusesim
