#include <doctest.h>

#include <map>
#include <set>
#include <stdexcept>

#include "fusesim/tiling.hpp"

using namespace fusesim;

namespace {

FusionConfig cfg_of(int rows, int cols, int layers, int h, int w) { return {rows, cols, layers, h, w}; }

}  // namespace

TEST_CASE("tilted_col_range: worked examples") {
    const FusionConfig cfg;
    CHECK(tilted_col_range(8, 0, cfg) == Range{8, 16});
    CHECK(tilted_col_range(8, 3, cfg) == Range{5, 13});
    CHECK(tilted_col_range(0, 2, cfg) == Range{0, 6});
    CHECK(tilted_col_range(640, 6, cfg) == Range{634, 640});
    CHECK_THROWS_AS(tilted_col_range(0, 7, cfg), std::invalid_argument);
    CHECK_THROWS_AS(tilted_col_range(0, -1, cfg), std::invalid_argument);
}

TEST_CASE("tilted_col_range clip agrees with column enumeration") {
    const FusionConfig cfg{60, 8, 7, 360, 640};
    for (int base : {0, 8, 624, 632, 640}) {
        for (int layer = 0; layer < 7; ++layer) {
            std::set<int> cols;
            for (int c = base - layer; c < base - layer + 8; ++c)
                if (c >= 0 && c < 640) cols.insert(c);
            const auto r = tilted_col_range(base, layer, cfg);
            CHECK(r.size() == static_cast<int>(cols.size()));
            if (!cols.empty()) {
                CHECK(r.begin == *cols.begin());
                CHECK(r.end == *cols.rbegin() + 1);
            }
        }
    }
}

TEST_CASE("plan_strip: 640 columns take 80 full tiles plus one epilogue") {
    const FusionConfig cfg;
    const auto plan = plan_strip(0, cfg);
    REQUIRE(plan.tiles.size() == 81);
    int epilogue = 0;
    for (const auto& t : plan.tiles) epilogue += t.is_epilogue;
    CHECK(epilogue == 1);
    CHECK(plan.tiles.back().is_epilogue);
    // The epilogue only drains layers 1..6.
    CHECK(plan.tiles.back().regions[0].cols.empty());
    CHECK(plan.tiles.back().regions[6].cols == Range{634, 640});
    CHECK(plan.tiles.back().input_cols.empty());
}

TEST_CASE("plan_strip: single tile when W = C and L = 1") {
    const auto plan = plan_strip(0, cfg_of(8, 8, 1, 8, 8));
    REQUIRE(plan.tiles.size() == 1);
    CHECK_FALSE(plan.tiles[0].is_epilogue);
    CHECK(plan.tiles[0].regions[0].cols == Range{0, 8});
}

TEST_CASE("plan_strip: strips and range checks") {
    const FusionConfig cfg;
    CHECK(cfg.num_strips() == 6);
    CHECK(plan_strip(5, cfg).rows == Range{300, 360});
    CHECK_THROWS_AS(plan_strip(6, cfg), std::invalid_argument);
    CHECK(cfg_of(60, 8, 7, 100, 64).strip_rows(1) == Range{60, 100});
}

TEST_CASE("tilted plans partition every layer exactly (exhaustive enumeration)") {
    for (int w : {1, 5, 8, 17, 40, 64}) {
        for (int c : {1, 2, 3, 8, 16}) {
            for (int layers : {1, 2, 7}) {
                const auto cfg = cfg_of(4, c, layers, 4, w);
                const auto plan = plan_strip(0, cfg);
                for (int layer = 0; layer < layers; ++layer) {
                    std::vector<int> hits(static_cast<std::size_t>(w), 0);
                    for (const auto& t : plan.tiles) {
                        const auto r = t.regions[static_cast<std::size_t>(layer)].cols;
                        for (int x = r.begin; x < r.end; ++x) hits[static_cast<std::size_t>(x)]++;
                    }
                    for (int x = 0; x < w; ++x) REQUIRE(hits[static_cast<std::size_t>(x)] == 1);
                }
                // Image columns are streamed exactly once (column 0 by the prologue).
                std::vector<int> loads(static_cast<std::size_t>(w), 0);
                loads[0] = 1;
                for (const auto& t : plan.tiles)
                    for (int x = t.input_cols.begin; x < t.input_cols.end; ++x) loads[static_cast<std::size_t>(x)]++;
                for (int x = 0; x < w; ++x) REQUIRE(loads[static_cast<std::size_t>(x)] == 1);
            }
        }
    }
}

TEST_CASE("tilted plans obey the one-column shift law before clipping") {
    const FusionConfig cfg;
    for (const auto& t : plan_strip(2, cfg).tiles) {
        for (int layer = 0; layer + 1 < cfg.num_layers; ++layer) {
            const auto& h0 = t.halo_cols_needed[static_cast<std::size_t>(layer)];
            const auto& h1 = t.halo_cols_needed[static_cast<std::size_t>(layer + 1)];
            CHECK(h1.begin == h0.begin - 1);
            CHECK(h0.begin + 1 == t.base_col - layer);
        }
    }
}

TEST_CASE("left halo is exactly the previous tile's last two columns; nothing to the right is read") {
    // Data-dependency enumeration: for each tile and layer, list the
    // producer columns a 3x3 kernel touches and check where each one lives.
    for (int c : {1, 2, 4, 8}) {
        const auto cfg = cfg_of(4, c, 7, 4, 37);
        const auto plan = plan_strip(0, cfg);
        const int w = cfg.image_width;
        for (std::size_t k = 0; k < plan.tiles.size(); ++k) {
            const auto& t = plan.tiles[k];
            for (int layer = 0; layer < cfg.num_layers; ++layer) {
                // Producer of layer `layer`'s input: the image (streamed
                // columns) or the previous layer's region in this tile.
                const int c0 = t.base_col - layer;  // unclipped output begin
                std::set<int> own;
                std::set<int> previous_last_two;
                if (layer == 0) {
                    for (int x = t.input_cols.begin; x < t.input_cols.end; ++x) own.insert(x);
                    const int prev_end = t.base_col + 1;  // previous tile streamed up to base
                    previous_last_two = {prev_end - 2, prev_end - 1};
                } else {
                    const int prod0 = t.base_col - (layer - 1);
                    for (int x = prod0; x < prod0 + c; ++x) own.insert(x);
                    previous_last_two = {prod0 - 2, prod0 - 1};
                }
                const auto out = t.regions[static_cast<std::size_t>(layer)].cols;
                std::set<int> needed;
                for (int x = out.begin; x < out.end; ++x)
                    for (int d = -1; d <= 1; ++d)
                        if (x + d >= 0 && x + d < w) needed.insert(x + d);
                const int own_max = own.empty() ? c0 : *own.rbegin();
                for (int x : needed) {
                    REQUIRE((own.contains(x) || previous_last_two.contains(x)));
                    REQUIRE(x <= own_max);
                }
                std::set<int> from_halo;
                for (int x : needed)
                    if (!own.contains(x)) from_halo.insert(x);
                for (int x : from_halo) REQUIRE(previous_last_two.contains(x));
                const auto& halo = t.halo_cols_needed[static_cast<std::size_t>(layer)];
                CHECK(halo.size() == 2);
                CHECK(halo.begin == c0 - 1);
            }
        }
    }
}

TEST_CASE("lost_row_mask: default frame") {
    const FusionConfig cfg;
    std::vector<int> expected;
    for (int cut : {60, 120, 180, 240, 300})
        for (int r = cut - 7; r < cut + 7; ++r) expected.push_back(r);
    const auto mask = lost_row_mask(cfg);
    CHECK(mask == expected);
    CHECK(mask.front() == 53);
    CHECK(mask.size() == 70);
    CHECK(lost_row_radius(cfg) == 7);
}

TEST_CASE("lost_row_mask: single strip is empty and growth is 2L per cut") {
    CHECK(lost_row_mask(cfg_of(60, 8, 7, 60, 64)).empty());
    CHECK(lost_row_mask(cfg_of(64, 8, 7, 64, 64)).empty());
    for (int strips = 1; strips <= 6; ++strips) {
        const auto mask = lost_row_mask(cfg_of(60, 8, 7, 60 * strips, 64));
        CHECK(mask.size() == static_cast<std::size_t>(14 * (strips - 1)));
    }
    // Per-strip lists partition the global mask.
    const FusionConfig cfg;
    std::vector<int> joined;
    for (int s = 0; s < cfg.num_strips(); ++s) {
        const auto p = plan_strip(s, cfg);
        joined.insert(joined.end(), p.lost_rows.begin(), p.lost_rows.end());
    }
    CHECK(joined == lost_row_mask(cfg));
}

TEST_CASE("plan_classical: 640x360 with T=60") {
    const auto blocks = plan_classical(360, 640, 60);
    REQUIRE(blocks.size() == 66);
    std::map<int, int> widths;
    for (const auto& b : blocks) widths[b.cols.size()]++;
    CHECK(widths[60] == 60);
    CHECK(widths[40] == 6);
    CHECK(blocks[10].cols == Range{600, 640});
    // Exact cover.
    std::vector<int> hits(360 * 640, 0);
    for (const auto& b : blocks)
        for (int y = b.rows.begin; y < b.rows.end; ++y)
            for (int x = b.cols.begin; x < b.cols.end; ++x) hits[static_cast<std::size_t>(y * 640 + x)]++;
    for (int h : hits) REQUIRE(h == 1);
}

TEST_CASE("plan_classical: small image and invalid tile") {
    const auto one = plan_classical(20, 30, 60);
    REQUIRE(one.size() == 1);
    CHECK(one[0].rows == Range{0, 20});
    CHECK(one[0].cols == Range{0, 30});
    CHECK_THROWS_AS(plan_classical(20, 30, 2), std::invalid_argument);
}
