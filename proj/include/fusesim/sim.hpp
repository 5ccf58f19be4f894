#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fusesim/buffers.hpp"
#include "fusesim/datapath.hpp"
#include "fusesim/network.hpp"
#include "fusesim/tensor.hpp"
#include "fusesim/tiling.hpp"

namespace fusesim {

enum class ScheduleKind { LayerByLayer, Classical, Tilted };

/// One of the three execution schedules. Only the tile geometry is taken
/// from here; image extent and layer count come from the run inputs.
struct ScheduleMode {
    ScheduleKind kind = ScheduleKind::Tilted;
    int classical_tile = 60;
    int tile_rows = 60;
    int tile_cols = 8;

    static ScheduleMode layer_by_layer() { return {ScheduleKind::LayerByLayer}; }
    static ScheduleMode classical(int tile = 60) { return {ScheduleKind::Classical, tile}; }
    static ScheduleMode tilted(int rows = 60, int cols = 8) {
        return {ScheduleKind::Tilted, 60, rows, cols};
    }

    std::string name() const;
    friend bool operator==(const ScheduleMode&, const ScheduleMode&) = default;
};

const char* to_string(ScheduleKind kind);

/// Off-chip traffic. Image bytes scale with frame rate; weights load once.
struct DramTraffic {
    std::int64_t image_bytes_read = 0;
    std::int64_t image_bytes_written = 0;
    std::int64_t weight_bytes_read = 0;

    std::int64_t image_bytes() const { return image_bytes_read + image_bytes_written; }
    /// Image traffic in GB/s (1 GB = 1e9 bytes) at `fps` frames per second.
    double gbps(double fps) const { return static_cast<double>(image_bytes()) * fps / 1e9; }
};

struct OccupancyStats {
    std::int64_t peak_pingpong_bank = 0;
    std::int64_t peak_overlap_bytes = 0;
    int peak_overlap_slabs = 0;
    std::int64_t peak_residual = 0;
    /// Peak of (both banks + overlap + residual + weights) sampled after
    /// every buffer mutation.
    std::int64_t peak_total = 0;
    std::int64_t overlap_pushes = 0;
    std::int64_t overlap_pops = 0;
    std::int64_t tiles = 0;
    /// Tiles whose overlap occupancy ended where it started.
    std::int64_t balanced_tiles = 0;
};

struct EquivalenceStats {
    int rows = 0;
    int exact_rows = 0;
    /// Output rows that differ from the reference, ascending.
    std::vector<int> deviating_rows;
    /// Deviating rows outside the permitted mask; always empty when no mask.
    std::vector<int> unmasked_deviating_rows;
    bool mask_applied = false;
    int max_abs_deviation = 0;
    /// +infinity when the images are identical.
    double psnr_db = std::numeric_limits<double>::infinity();

    bool exact() const { return deviating_rows.empty(); }
    bool confined() const { return unmasked_deviating_rows.empty(); }
};

struct SimReport {
    ScheduleMode mode;
    int image_height = 0;
    int image_width = 0;
    int num_layers = 0;
    int upscale = 1;
    double fps = 60.0;
    DramTraffic dram;
    CycleStats cycles;
    std::optional<SizingReport> sizing;  // empty for layer-by-layer
    OccupancyStats occupancy;
    /// Permitted-deviation rows in low-resolution coordinates (tilted only).
    std::vector<int> lost_rows;
    std::optional<EquivalenceStats> equivalence;

    double traffic_gbps() const { return dram.gbps(fps); }
};

struct SimOptions {
    double fps = 60.0;
    /// Route every convolution through the PE-block / accumulator model.
    bool use_datapath = false;
    /// Compare against the golden reference; computed on demand unless
    /// `reference` is supplied.
    bool compare = true;
    const ActivationTensor* reference = nullptr;
};

struct RunResult {
    ActivationTensor hr_image;
    SimReport report;
};

/// Executes the network under `mode`, metering DRAM traffic, cycles and
/// on-chip occupancy. Throws InvariantViolation if any modeled memory
/// exceeds its sized capacity.
RunResult run(const ScheduleMode& mode, const Model& model, const ActivationTensor& image,
              const SimOptions& opts = {});

/// Row-wise comparison. With `allowed_rows` every deviating row must be
/// listed there; without it deviations are only reported.
EquivalenceStats equivalence_check(const ActivationTensor& fused,
                                   const ActivationTensor& reference,
                                   const std::optional<std::vector<int>>& allowed_rows);

/// Low-resolution rows -> the s high-resolution rows each one produces.
std::vector<int> scale_rows(const std::vector<int>& rows, int upscale);

struct SweepCell {
    ScheduleMode mode;
    std::optional<SimReport> report;
    std::string error;
};

/// One run per mode, in the given order. Cells run in parallel (capped by
/// FUSESIM_THREADS); a failing cell records its error and does not stop
/// the others.
std::vector<SweepCell> sweep(const std::vector<ScheduleMode>& modes, const Model& model,
                             const ActivationTensor& image, const SimOptions& opts = {});

/// Worker count for sweeps: FUSESIM_THREADS if set and positive, else the
/// hardware concurrency.
int sweep_threads();

}  // namespace fusesim
