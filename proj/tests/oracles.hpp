#pragma once

// Brute-force reference models used only by the tests. Nothing here calls
// into the library's arithmetic; inputs and outputs are plain vectors so the
// oracles stay independent of the code paths they check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "fusesim/network.hpp"
#include "fusesim/tensor.hpp"

namespace oracle {

/// [channel][row][col]
using Volume = std::vector<std::vector<std::vector<std::int64_t>>>;

inline Volume make_volume(int c, int h, int w) {
    return Volume(static_cast<std::size_t>(c),
                  std::vector<std::vector<std::int64_t>>(
                      static_cast<std::size_t>(h), std::vector<std::int64_t>(static_cast<std::size_t>(w), 0)));
}

template <typename T>
Volume from_tensor(const fusesim::PlanarTensor<T>& t) {
    auto v = make_volume(t.channels(), t.height(), t.width());
    for (int c = 0; c < t.channels(); ++c)
        for (int y = 0; y < t.height(); ++y)
            for (int x = 0; x < t.width(); ++x) v[c][y][x] = t(c, y, x);
    return v;
}

template <typename T>
bool equals(const Volume& v, const fusesim::PlanarTensor<T>& t) {
    if (static_cast<int>(v.size()) != t.channels()) return false;
    for (int c = 0; c < t.channels(); ++c) {
        if (static_cast<int>(v[c].size()) != t.height()) return false;
        for (int y = 0; y < t.height(); ++y) {
            if (static_cast<int>(v[c][y].size()) != t.width()) return false;
            for (int x = 0; x < t.width(); ++x)
                if (v[c][y][x] != static_cast<std::int64_t>(t(c, y, x))) return false;
        }
    }
    return true;
}

/// Zero-padded "same" 3x3 convolution: four nested loops per output.
inline Volume conv_same(const Volume& in, const fusesim::LayerWeights& w) {
    const int ic = static_cast<int>(in.size());
    const int h = static_cast<int>(in[0].size());
    const int wd = static_cast<int>(in[0][0].size());
    auto out = make_volume(w.out_channels, h, wd);
    for (int o = 0; o < w.out_channels; ++o)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < wd; ++x) {
                std::int64_t s = w.bias[o];
                for (int i = 0; i < ic; ++i)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int yy = y + ky - 1;
                            const int xx = x + kx - 1;
                            if (yy < 0 || yy >= h || xx < 0 || xx >= wd) continue;
                            s += in[i][yy][xx] *
                                 w.weights[((static_cast<std::size_t>(o) * w.in_channels + i) * 3 + ky) * 3 + kx];
                        }
                out[o][y][x] = s;
            }
    return out;
}

/// Valid-only 3x3 convolution (output shrinks by 2 in each dimension).
inline Volume conv_valid(const Volume& in, const fusesim::LayerWeights& w) {
    const int ic = static_cast<int>(in.size());
    const int h = static_cast<int>(in[0].size()) - 2;
    const int wd = static_cast<int>(in[0][0].size()) - 2;
    auto out = make_volume(w.out_channels, h, wd);
    for (int o = 0; o < w.out_channels; ++o)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < wd; ++x) {
                std::int64_t s = w.bias[o];
                for (int i = 0; i < ic; ++i)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx)
                            s += in[i][y + ky][x + kx] *
                                 w.weights[((static_cast<std::size_t>(o) * w.in_channels + i) * 3 + ky) * 3 + kx];
                out[o][y][x] = s;
            }
    return out;
}

/// Round half away from zero via the C library, then clamp.
inline std::int64_t requant(std::int64_t v, int shift, bool relu) {
    if (relu && v < 0) v = 0;
    const double q = static_cast<double>(v) / std::ldexp(1.0, shift);
    const long r = std::lround(q);
    return r < 0 ? 0 : (r > 255 ? 255 : r);
}

inline Volume requant(const Volume& v, int shift, bool relu) {
    Volume out = v;
    for (auto& ch : out)
        for (auto& row : ch)
            for (auto& x : row) x = requant(x, shift, relu);
    return out;
}

/// Straightforward whole-network model: hidden layers, anchor residual on
/// the last layer, then pixel shuffle.
inline Volume network(const fusesim::NetworkSpec& net, const fusesim::WeightSet& ws, const Volume& image) {
    Volume x = image;
    const int L = net.num_layers();
    for (int i = 0; i < L - 1; ++i)
        x = requant(conv_same(x, ws.layers[i]), net.quant[i].requant_shift, net.layers[i].has_relu);
    auto y = conv_same(x, ws.layers[L - 1]);
    const int s = net.upscale;
    const int shift = net.quant[L - 1].requant_shift;
    const int h = static_cast<int>(image[0].size());
    const int w = static_cast<int>(image[0][0].size());
    const int out_c = static_cast<int>(y.size()) / (s * s);
    auto hr = make_volume(out_c, h * s, w * s);
    for (int c = 0; c < out_c; ++c)
        for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < w; ++xx)
                for (int dy = 0; dy < s; ++dy)
                    for (int dx = 0; dx < s; ++dx) {
                        std::int64_t v = y[c * s * s + dy * s + dx][yy][xx];
                        if (net.layers.back().has_residual_add) v += image[c][yy][xx] * (std::int64_t{1} << shift);
                        hr[c][yy * s + dy][xx * s + dx] = requant(v, shift, !net.layers.back().has_residual_add &&
                                                                                net.layers.back().has_relu);
                    }
    return hr;
}

/// 1-D sliding-window correlation: out[j] = sum_k in[j + k] * w[k].
inline std::vector<std::int64_t> correlate(const std::vector<std::int64_t>& in, const std::vector<std::int64_t>& w) {
    std::vector<std::int64_t> out;
    for (std::size_t j = 0; j + w.size() <= in.size(); ++j) {
        std::int64_t s = 0;
        for (std::size_t k = 0; k < w.size(); ++k) s += in[j + k] * w[k];
        out.push_back(s);
    }
    return out;
}

/// Small deterministic LCG so the tests do not share the library's PRNG.
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : s_(seed * 6364136223846793005ull + 1442695040888963407ull) {}
    std::uint32_t next() {
        s_ = s_ * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<std::uint32_t>(s_ >> 33);
    }
    int range(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint32_t>(hi - lo + 1)); }

private:
    std::uint64_t s_;
};

inline fusesim::ActivationTensor random_activations(Lcg& rng, int h, int w, int c, int hi = 255) {
    fusesim::ActivationTensor t(h, w, c);
    for (auto& v : t.data()) v = static_cast<std::uint8_t>(rng.range(0, hi));
    return t;
}

inline fusesim::LayerWeights random_layer(Lcg& rng, int out_ch, int in_ch, int bias_mag = 1000) {
    fusesim::LayerWeights lw(out_ch, in_ch);
    for (auto& w : lw.weights) w = static_cast<std::int8_t>(rng.range(-128, 127));
    for (auto& b : lw.bias) b = rng.range(-bias_mag, bias_mag);
    return lw;
}

}  // namespace oracle
