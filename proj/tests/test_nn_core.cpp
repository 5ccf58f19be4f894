#include <doctest.h>

#include <cstdint>
#include <limits>
#include <stdexcept>

#include "fusesim/io.hpp"
#include "fusesim/ops.hpp"
#include "oracles.hpp"

using namespace fusesim;

TEST_CASE("conv3x3: zero input and zero bias give zero output") {
    ActivationTensor in(5, 5, 1);
    oracle::Lcg rng(1);
    auto w = oracle::random_layer(rng, 1, 1);
    w.bias[0] = 0;
    const auto out = conv3x3(in, w);
    CHECK(out.height() == 5);
    CHECK(out.width() == 5);
    for (auto v : out.data()) CHECK(v == 0);
}

TEST_CASE("conv3x3: centre-tap identity kernel copies the input") {
    oracle::Lcg rng(2);
    const auto in = oracle::random_activations(rng, 5, 5, 1);
    LayerWeights w(1, 1);
    w.at(0, 0, 1, 1) = 1;
    const auto out = conv3x3(in, w);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) CHECK(out(0, y, x) == in(0, y, x));
}

TEST_CASE("conv3x3: seeded 7x5 single channel matches the four-loop oracle") {
    oracle::Lcg rng(7);
    const auto in = oracle::random_activations(rng, 7, 5, 1);
    const auto w = oracle::random_layer(rng, 1, 1);
    const auto out = conv3x3(in, w);
    CHECK(oracle::equals(oracle::conv_same(oracle::from_tensor(in), w), out));
}

TEST_CASE("conv3x3: multi-channel random instances match the oracle") {
    oracle::Lcg rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int h = rng.range(1, 9), wd = rng.range(1, 9);
        const int ic = rng.range(1, 5), oc = rng.range(1, 4);
        const auto in = oracle::random_activations(rng, h, wd, ic);
        const auto w = oracle::random_layer(rng, oc, ic);
        CHECK(oracle::equals(oracle::conv_same(oracle::from_tensor(in), w), conv3x3(in, w)));
    }
}

TEST_CASE("conv3x3: halo columns reproduce the interior of a wider convolution") {
    oracle::Lcg rng(12);
    const auto wide = oracle::random_activations(rng, 6, 12, 3);
    const auto w = oracle::random_layer(rng, 2, 3);
    const auto full = conv3x3(wide, w);
    // Columns [4, 9) of the full output from input columns [3, 10).
    const auto window = slice_cols(wide, 3, 7);
    const auto part = conv3x3(window, w, PadSpec::halo_columns());
    REQUIRE(part.width() == 5);
    for (int o = 0; o < 2; ++o)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 5; ++x) CHECK(part(o, y, x) == full(o, y, x + 4));
}

TEST_CASE("conv3x3: all-halo padding equals the valid convolution") {
    oracle::Lcg rng(13);
    const auto in = oracle::random_activations(rng, 8, 9, 2);
    const auto w = oracle::random_layer(rng, 3, 2);
    const PadSpec halo{EdgeMode::Halo, EdgeMode::Halo, EdgeMode::Halo, EdgeMode::Halo};
    CHECK(oracle::equals(oracle::conv_valid(oracle::from_tensor(in), w), conv3x3(in, w, halo)));
}

TEST_CASE("conv3x3: error paths") {
    ActivationTensor in(4, 4, 2);
    LayerWeights w(1, 3);
    CHECK_THROWS_AS(conv3x3(in, w), std::invalid_argument);

    LayerWeights bad(1, 2);
    bad.bias.clear();
    CHECK_THROWS_AS(conv3x3(in, bad), std::invalid_argument);

    ActivationTensor thin(4, 1, 1);
    CHECK_THROWS_AS(conv3x3(thin, LayerWeights(1, 1), PadSpec::halo_columns()), std::invalid_argument);

}

TEST_CASE("conv3x3 is linear in its input (zero bias)") {
    oracle::Lcg rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        const int ic = rng.range(1, 4);
        const auto a = oracle::random_activations(rng, 6, 7, ic, 127);
        const auto b = oracle::random_activations(rng, 6, 7, ic, 128);
        auto w = oracle::random_layer(rng, 2, ic);
        std::fill(w.bias.begin(), w.bias.end(), 0);
        ActivationTensor sum(6, 7, ic);
        for (std::size_t k = 0; k < sum.size(); ++k) sum.data()[k] = a.data()[k] + b.data()[k];
        const auto ca = conv3x3(a, w), cb = conv3x3(b, w), cs = conv3x3(sum, w);
        for (std::size_t k = 0; k < cs.size(); ++k) REQUIRE(cs.data()[k] == ca.data()[k] + cb.data()[k]);
    }
}

TEST_CASE("conv3x3 accumulator bound holds at the 28-channel extreme") {
    ActivationTensor in(3, 3, 28, 255);
    LayerWeights w(1, 28);
    std::fill(w.weights.begin(), w.weights.end(), std::int8_t{-128});
    w.bias[0] = -(1 << 20);
    const auto out = conv3x3(in, w);
    const std::int64_t centre = out(0, 1, 1);
    CHECK(centre == -std::int64_t{9} * 28 * 128 * 255 - (1 << 20));
    CHECK(std::abs(centre) < (std::int64_t{1} << 30));
}

TEST_CASE("requantize: worked values") {
    CHECK(requantize_value(300, 2, false) == 75);
    CHECK(requantize_value(-5, 0, true) == 0);
    CHECK(requantize_value(70000, 4, false) == 255);
    CHECK(requantize_value(6, 2, false) == 2);    // 1.5 rounds away from zero
    CHECK(requantize_value(5, 1, false) == 3);    // 2.5 -> 3
    CHECK(requantize_value(-6, 2, false) == 0);   // -1.5 -> -2, clamped
    CHECK(requantize_value(255, 0, false) == 255);
    CHECK(requantize_value(256, 0, false) == 255);
}

TEST_CASE("requantize matches the lround oracle on random accumulators") {
    oracle::Lcg rng(31);
    AccumTensor acc(4, 50, 3);
    for (auto& v : acc.data()) v = static_cast<std::int32_t>(rng.next()) >> rng.range(0, 20);
    for (int shift = 0; shift <= QuantParams::kMaxShift; shift += 3) {
        for (bool relu : {false, true}) {
            const auto q = requantize(acc, {shift}, relu);
            for (std::size_t k = 0; k < acc.size(); ++k)
                REQUIRE(q.data()[k] == oracle::requant(acc.data()[k], shift, relu));
        }
    }
    CHECK_THROWS_AS(requantize(acc, {25}, false), std::invalid_argument);
}

TEST_CASE("anchor_residual_add: identities and oracle") {
    oracle::Lcg rng(41);
    const auto lr = oracle::random_activations(rng, 4, 5, 3);
    AccumTensor zero(4, 5, 27);
    const auto anchor_only = anchor_residual_add(zero, lr, 3, 4);
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 9; ++k)
            for (int y = 0; y < 4; ++y)
                for (int x = 0; x < 5; ++x) CHECK(anchor_only(c * 9 + k, y, x) == lr(c, y, x) * 16);

    AccumTensor conv(4, 5, 27);
    for (auto& v : conv.data()) v = rng.range(-100000, 100000);
    CHECK(anchor_residual_add(conv, ActivationTensor(4, 5, 3), 3, 7) == conv);

    const auto sum = anchor_residual_add(conv, lr, 3, 7);
    for (int oc = 0; oc < 27; ++oc)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x)
                REQUIRE(sum(oc, y, x) == conv(oc, y, x) + lr(oc / 9, y, x) * 128);

    CHECK_THROWS_AS(anchor_residual_add(AccumTensor(4, 5, 26), lr, 3, 0), std::invalid_argument);
    CHECK_THROWS_AS(anchor_residual_add(AccumTensor(4, 6, 27), lr, 3, 0), std::invalid_argument);
}

TEST_CASE("depth_to_space: identity, index map and errors") {
    oracle::Lcg rng(51);
    const auto t = oracle::random_activations(rng, 3, 4, 5);
    CHECK(depth_to_space(t, 1) == t);

    ActivationTensor nine(1, 1, 9);
    for (int c = 0; c < 9; ++c) nine(c, 0, 0) = static_cast<std::uint8_t>(c);
    const auto px = depth_to_space(nine, 3);
    REQUIRE(px.height() == 3);
    REQUIRE(px.width() == 3);
    REQUIRE(px.channels() == 1);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) CHECK(px(0, y, x) == y * 3 + x);

    CHECK_THROWS_AS(depth_to_space(ActivationTensor(2, 2, 10), 3), std::invalid_argument);
}

TEST_CASE("depth_to_space inverts space_to_depth for s in 1..4") {
    oracle::Lcg rng(52);
    for (int s = 1; s <= 4; ++s) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto img = oracle::random_activations(rng, s * rng.range(1, 4), s * rng.range(1, 4), rng.range(1, 3));
            CHECK(depth_to_space(space_to_depth(img, s), s) == img);
        }
    }
}

TEST_CASE("NetworkSpec: default instance and validation") {
    const auto net = NetworkSpec::apbn7();
    CHECK(net.num_layers() == 7);
    CHECK(net.channel_counts() == std::vector<int>{3, 28, 28, 28, 28, 28, 28, 27});
    CHECK(net.max_channels() == 28);
    CHECK(net.upscale == 3);
    CHECK(net.layers.back().has_residual_add);
    CHECK_FALSE(net.layers.back().has_relu);
    CHECK_NOTHROW(net.validate());

    auto broken = net;
    broken.layers[2].in_channels = 27;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

    broken = net;
    broken.layers[3].has_residual_add = true;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

    broken = net;
    broken.layers[6].has_relu = true;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

    broken = net;
    broken.upscale = 2;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);

    broken = net;
    broken.quant[0].requant_shift = 25;
    CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("reference_forward: all-zero network gives an all-zero image") {
    const auto net = NetworkSpec::apbn7();
    const auto hr = reference_forward(net, zero_weights(net), ActivationTensor(8, 8, 3));
    CHECK(hr.height() == 24);
    CHECK(hr.width() == 24);
    for (auto v : hr.data()) CHECK(v == 0);
}

TEST_CASE("reference_forward: 16x16 seeded network matches the nested-loop oracle") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto m = gen_weights(seed, NetworkSpec::apbn7());
        const auto img = random_image(seed + 100, 16, 16, 3);
        const auto hr = reference_forward(m.net, m.weights, img);
        CHECK(oracle::equals(oracle::network(m.net, m.weights, oracle::from_tensor(img)), hr));
    }
}

TEST_CASE("reference_forward: 640x360 input upscales to 1920x1080") {
    const auto net = NetworkSpec::apbn7();
    const auto hr = reference_forward(net, zero_weights(net), ActivationTensor(360, 640, 3));
    CHECK(hr.width() == 1920);
    CHECK(hr.height() == 1080);
    CHECK(hr.channels() == 3);
}

TEST_CASE("reference_forward is pure") {
    const auto m = gen_weights(9, NetworkSpec::apbn7());
    const auto img = random_image(9, 20, 24, 3);
    CHECK(reference_forward(m.net, m.weights, img) == reference_forward(m.net, m.weights, img));
    CHECK_THROWS_AS(reference_forward(m.net, m.weights, ActivationTensor(4, 4, 1)), std::invalid_argument);
}
