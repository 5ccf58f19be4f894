#include "fusesim/tiling.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fusesim {

Range Range::clip(int lo, int hi) const {
    Range r{std::max(begin, lo), std::min(end, hi)};
    if (r.end < r.begin) {
        r.end = r.begin;
    }
    return r;
}

void FusionConfig::validate() const {
    if (tile_rows < 1 || tile_cols < 1) {
        throw std::invalid_argument("tile must be at least 1x1");
    }
    if (num_layers < 1) {
        throw std::invalid_argument("fusion needs at least one layer");
    }
    if (image_height < 1 || image_width < 1) {
        throw std::invalid_argument("image must be non-empty");
    }
}

int FusionConfig::num_strips() const { return (image_height + tile_rows - 1) / tile_rows; }

int FusionConfig::tiles_per_strip() const {
    // The deepest layer lags L-1 columns behind layer 0 and must still reach W.
    return (image_width + num_layers - 1 + tile_cols - 1) / tile_cols;
}

Range FusionConfig::strip_rows(int strip) const {
    return Range{strip * tile_rows, (strip + 1) * tile_rows}.clip(0, image_height);
}

Range tilted_col_range(int base_c0, int layer, const FusionConfig& cfg) {
    if (layer < 0 || layer >= cfg.num_layers) {
        throw std::invalid_argument("tilted_col_range: layer " + std::to_string(layer) +
                                    " outside [0, " + std::to_string(cfg.num_layers) + ")");
    }
    const int c0 = base_c0 - layer;
    return Range{c0, c0 + cfg.tile_cols}.clip(0, cfg.image_width);
}

StripPlan plan_strip(int strip_index, const FusionConfig& cfg) {
    cfg.validate();
    if (strip_index < 0 || strip_index >= cfg.num_strips()) {
        throw std::invalid_argument("plan_strip: strip " + std::to_string(strip_index) +
                                    " out of range");
    }
    StripPlan plan;
    plan.strip = strip_index;
    plan.rows = cfg.strip_rows(strip_index);

    const int tiles = cfg.tiles_per_strip();
    plan.tiles.reserve(static_cast<std::size_t>(tiles));
    for (int t = 0; t < tiles; ++t) {
        TilePlan tp;
        tp.strip = strip_index;
        tp.tile = t;
        tp.base_col = t * cfg.tile_cols;
        tp.is_epilogue = tp.base_col >= cfg.image_width;
        tp.input_cols = Range{tp.base_col + 1, tp.base_col + 1 + cfg.tile_cols}.clip(
            0, cfg.image_width);
        for (int layer = 0; layer < cfg.num_layers; ++layer) {
            tp.regions.push_back({layer, plan.rows, tilted_col_range(tp.base_col, layer, cfg)});
            const int c0 = tp.base_col - layer;
            tp.halo_cols_needed.push_back({c0 - 1, c0 + 1});
        }
        plan.tiles.push_back(std::move(tp));
    }

    for (int r : lost_row_mask(cfg)) {
        if (plan.rows.contains(r)) {
            plan.lost_rows.push_back(r);
        }
    }
    return plan;
}

std::vector<int> lost_row_mask(const FusionConfig& cfg) {
    cfg.validate();
    const int radius = lost_row_radius(cfg);
    std::vector<int> rows;
    for (int s = 1; s < cfg.num_strips(); ++s) {
        const int cut = s * cfg.tile_rows;
        const Range zone = Range{cut - radius, cut + radius}.clip(0, cfg.image_height);
        for (int r = zone.begin; r < zone.end; ++r) {
            rows.push_back(r);
        }
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

std::vector<BlockTile> plan_classical(int image_height, int image_width, int tile) {
    if (tile < 3) {
        throw std::invalid_argument("plan_classical: tile size must be >= 3, got " +
                                    std::to_string(tile));
    }
    if (image_height < 1 || image_width < 1) {
        throw std::invalid_argument("plan_classical: empty image");
    }
    std::vector<BlockTile> blocks;
    int index = 0;
    for (int y = 0; y < image_height; y += tile) {
        for (int x = 0; x < image_width; x += tile) {
            blocks.push_back({index++, Range{y, y + tile}.clip(0, image_height),
                              Range{x, x + tile}.clip(0, image_width)});
        }
    }
    return blocks;
}

}  // namespace fusesim
