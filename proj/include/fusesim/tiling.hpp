#pragma once

#include <vector>

namespace fusesim {

/// Half-open integer interval [begin, end).
struct Range {
    int begin = 0;
    int end = 0;

    int size() const { return end > begin ? end - begin : 0; }
    bool empty() const { return end <= begin; }
    bool contains(int v) const { return v >= begin && v < end; }
    Range clip(int lo, int hi) const;

    friend bool operator==(const Range&, const Range&) = default;
};

/// Tile geometry of a fused schedule. Defaults are the 60-row x 8-column
/// tile over a 640x360 frame with 7 layers.
struct FusionConfig {
    int tile_rows = 60;
    int tile_cols = 8;
    int num_layers = 7;
    int image_height = 360;
    int image_width = 640;

    void validate() const;
    int num_strips() const;
    int tiles_per_strip() const;
    Range strip_rows(int strip) const;

    friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

/// Output columns of one layer within one tile, and the strip rows it spans.
struct TileRegion {
    int layer = 0;
    Range rows;
    Range cols;

    friend bool operator==(const TileRegion&, const TileRegion&) = default;
};

struct TilePlan {
    int strip = 0;
    int tile = 0;
    int base_col = 0;
    bool is_epilogue = false;
    /// Image columns streamed in from DRAM by this tile (clipped).
    Range input_cols;
    std::vector<TileRegion> regions;
    /// Per layer: the two unclipped input columns left of the region, taken
    /// from the overlap queue. Columns outside the image read as zero.
    std::vector<Range> halo_cols_needed;
};

struct StripPlan {
    int strip = 0;
    Range rows;
    std::vector<TilePlan> tiles;
    /// Rows of this strip that may differ from the whole-image reference.
    std::vector<int> lost_rows;
};

/// Output columns of `layer` for a tile whose layer-0 region starts at
/// `base_c0`: [base - layer, base - layer + C) clipped to the image.
Range tilted_col_range(int base_c0, int layer, const FusionConfig& cfg);

StripPlan plan_strip(int strip_index, const FusionConfig& cfg);

/// Rows within `lost_row_radius` of an internal strip cut, on either side.
std::vector<int> lost_row_mask(const FusionConfig& cfg);

/// Zero-padding at a strip cut perturbs layer k's output up to k + 1 rows
/// away, so the last of L layers reaches L rows.
inline int lost_row_radius(const FusionConfig& cfg) { return cfg.num_layers; }

/// A classical fused block: every layer is zero-padded on all four sides.
struct BlockTile {
    int index = 0;
    Range rows;
    Range cols;

    friend bool operator==(const BlockTile&, const BlockTile&) = default;
};

/// Non-overlapping T x T blocks in raster order; edge blocks are clipped.
std::vector<BlockTile> plan_classical(int image_height, int image_width, int tile);

}  // namespace fusesim
