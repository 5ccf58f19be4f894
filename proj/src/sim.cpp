#include "fusesim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <set>
#include <thread>

#include "fusesim/ops.hpp"

namespace fusesim {

const char* to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::LayerByLayer:
            return "layer-by-layer";
        case ScheduleKind::Classical:
            return "classical";
        case ScheduleKind::Tilted:
            return "tilted";
    }
    return "?";
}

std::string ScheduleMode::name() const {
    switch (kind) {
        case ScheduleKind::LayerByLayer:
            return "layer-by-layer";
        case ScheduleKind::Classical:
            return "classical-" + std::to_string(classical_tile);
        case ScheduleKind::Tilted:
            return "tilted-" + std::to_string(tile_rows) + "x" + std::to_string(tile_cols);
    }
    return "?";
}

namespace {

AccumTensor convolve(const ActivationTensor& input, const LayerWeights& w, PadSpec pad,
                     const SimOptions& opts) {
    return opts.use_datapath ? datapath_conv(input, w, pad) : conv3x3(input, w, pad);
}

/// Horizontal concatenation of two tensors with equal height and channels.
ActivationTensor hconcat(const ActivationTensor& a, const ActivationTensor& b) {
    ActivationTensor out(a.height(), a.width() + b.width(), a.channels());
    for (int c = 0; c < a.channels(); ++c) {
        for (int y = 0; y < a.height(); ++y) {
            auto dst = out.row(c, y);
            auto ra = a.row(c, y);
            auto rb = b.row(c, y);
            std::copy(ra.begin(), ra.end(), dst.begin());
            std::copy(rb.begin(), rb.end(), dst.begin() + a.width());
        }
    }
    return out;
}

/// Zeroes columns whose feature-map index (first_col + x) lies outside [0, width).
template <typename T>
void zero_outside(PlanarTensor<T>& t, int first_col, int width) {
    for (int c = 0; c < t.channels(); ++c) {
        for (int y = 0; y < t.height(); ++y) {
            auto r = t.row(c, y);
            for (int x = 0; x < t.width(); ++x) {
                const int col = first_col + x;
                if (col < 0 || col >= width) {
                    r[static_cast<std::size_t>(x)] = T{};
                }
            }
        }
    }
}

/// Writes a high-resolution block whose low-resolution origin is (y0, x0).
void place_hr(ActivationTensor& hr, const ActivationTensor& block, int y0, int x0, int s) {
    for (int c = 0; c < block.channels(); ++c) {
        for (int y = 0; y < block.height(); ++y) {
            auto src = block.row(c, y);
            auto dst = hr.row(c, y0 * s + y);
            std::copy(src.begin(), src.end(), dst.begin() + x0 * s);
        }
    }
}

class OccupancyTracker {
public:
    OccupancyTracker(std::int64_t limit, std::int64_t weights) : limit_(limit), weights_(weights) {}

    void sample(std::int64_t pingpong, std::int64_t overlap, std::int64_t residual) {
        const std::int64_t total = pingpong + overlap + residual + weights_;
        if (total > limit_) {
            throw InvariantViolation("on-chip occupancy " + std::to_string(total) +
                                     " bytes exceeds sized total " + std::to_string(limit_));
        }
        peak_ = std::max(peak_, total);
    }
    std::int64_t peak() const { return peak_; }

private:
    std::int64_t limit_;
    std::int64_t weights_;
    std::int64_t peak_ = 0;
};

ActivationTensor column_of(const ActivationTensor& t, int x) { return slice_cols(t, x, 1); }

// --- layer by layer ----------------------------------------------------------

ActivationTensor run_layer_by_layer(const Model& m, const ActivationTensor& image,
                                    const SimOptions& opts, SimReport& rep) {
    const auto& net = m.net;
    const int h = image.height();
    const int w = image.width();
    rep.dram.image_bytes_read += static_cast<std::int64_t>(image.size());
    const TileRegion whole{0, Range{0, h}, Range{0, w}};

    ActivationTensor x = image;
    const int last = net.num_layers() - 1;
    for (int i = 0; i < last; ++i) {
        const auto& spec = net.layers[static_cast<std::size_t>(i)];
        x = requantize(convolve(x, m.weights.layers[static_cast<std::size_t>(i)], PadSpec::zero(), opts),
                       net.quant[static_cast<std::size_t>(i)], spec.has_relu);
        rep.cycles += tile_layer_cycles(whole, spec.in_channels, spec.out_channels);
        // Spilled to DRAM, then fetched back for the next layer.
        rep.dram.image_bytes_written += static_cast<std::int64_t>(x.size());
        rep.dram.image_bytes_read += static_cast<std::int64_t>(x.size());
    }
    const auto& final_spec = net.layers.back();
    rep.cycles += tile_layer_cycles(whole, final_spec.in_channels, final_spec.out_channels);
    auto hr = finish_output(convolve(x, m.weights.layers.back(), PadSpec::zero(), opts), image, net);
    rep.dram.image_bytes_written += static_cast<std::int64_t>(hr.size());
    return hr;
}

// --- classical block fusion -----------------------------------------------------

ActivationTensor run_classical(int tile, const Model& m, const ActivationTensor& image,
                               const SimOptions& opts, SimReport& rep) {
    const auto& net = m.net;
    const int s = net.upscale;
    const auto bcfg = BufferConfig::classical(tile, net);
    const auto sizing = sizing_report(bcfg, FusionKind::Classical, m.weights);
    rep.sizing = sizing;

    PingPongPair pp(sizing.pingpong_bank);
    OccupancyTracker occ(sizing.total_bytes, sizing.weight_bytes);
    ActivationTensor hr(image.height() * s, image.width() * s, image.channels());

    for (const auto& block : plan_classical(image.height(), image.width(), tile)) {
        const int rb = block.rows.size();
        ResidualBuffer res(sizing.residual, rb, net.input_channels());
        auto in = crop(image, block.rows.begin, block.cols.begin, rb, block.cols.size());
        rep.dram.image_bytes_read += static_cast<std::int64_t>(in.size());
        for (int x = 0; x < in.width(); ++x) {
            res.append_column(block.cols.begin + x, column_of(in, x));
        }
        pp.load_input(std::move(in));
        occ.sample(pp.resident_bytes(), 0, res.resident_bytes());

        for (int i = 0; i < net.num_layers(); ++i) {
            const auto& spec = net.layers[static_cast<std::size_t>(i)];
            const auto& lw = m.weights.layers[static_cast<std::size_t>(i)];
            auto acc = convolve(pp.read_input(), lw, PadSpec::zero(), opts);
            rep.cycles += tile_layer_cycles({i, block.rows, block.cols}, spec.in_channels,
                                            spec.out_channels);
            if (i + 1 < net.num_layers()) {
                pp.write_output(requantize(acc, net.quant[static_cast<std::size_t>(i)], spec.has_relu));
            } else {
                auto anchor = res.anchor(block.cols);
                auto out = finish_output(acc, anchor, net);
                place_hr(hr, out, block.rows.begin, block.cols.begin, s);
                rep.dram.image_bytes_written += static_cast<std::int64_t>(out.size());
                // The pre-shuffle result occupies the output bank before the DRAM write.
                pp.write_output(space_to_depth(out, s));
            }
            occ.sample(pp.resident_bytes(), 0, res.resident_bytes());
            pp.swap();
        }
        pp.clear();
        rep.occupancy.tiles += 1;
        rep.occupancy.peak_residual = std::max(rep.occupancy.peak_residual, res.peak_bytes());
    }
    rep.occupancy.peak_pingpong_bank = pp.peak_bank_bytes();
    rep.occupancy.peak_total = occ.peak();
    return hr;
}

// --- tilted layer fusion -----------------------------------------------------------

ActivationTensor run_tilted(const FusionConfig& cfg, const Model& m, const ActivationTensor& image,
                            const SimOptions& opts, SimReport& rep) {
    const auto& net = m.net;
    const int s = net.upscale;
    const int layers = cfg.num_layers;
    const int cols = cfg.tile_cols;
    const int width = cfg.image_width;
    const auto channels = net.channel_counts();
    const auto bcfg = BufferConfig::tilted(cfg, net);
    const auto sizing = sizing_report(bcfg, FusionKind::Tilted, m.weights);
    rep.sizing = sizing;
    rep.lost_rows = lost_row_mask(cfg);

    PingPongPair pp(sizing.pingpong_bank);
    OverlapQueue queue(layers + 2, std::int64_t{cfg.tile_rows} * 2 * bcfg.max_channels());
    OccupancyTracker occ(sizing.total_bytes, sizing.weight_bytes);
    ActivationTensor hr(image.height() * s, image.width() * s, image.channels());
    auto& o = rep.occupancy;

    auto sample = [&](const ResidualBuffer& res) {
        occ.sample(pp.resident_bytes(), queue.resident_bytes(), res.resident_bytes());
        o.peak_overlap_bytes = std::max(o.peak_overlap_bytes, queue.resident_bytes());
    };

    for (int strip = 0; strip < cfg.num_strips(); ++strip) {
        const auto plan = plan_strip(strip, cfg);
        const int r0 = plan.rows.begin;
        const int rs = plan.rows.size();
        ResidualBuffer res(sizing.residual, rs, channels[0]);

        // Prologue: the virtual tile left of column 0. Its image slab holds
        // column -1 (padding) and column 0; every layer slab is padding.
        {
            auto first = crop(image, r0, -1, rs, 2);
            rep.dram.image_bytes_read += std::int64_t{rs} * channels[0];
            res.append_column(0, column_of(first, 1));
            queue.push({-1, Range{-1, 1}, std::move(first)});
            for (int i = 0; i + 1 < layers; ++i) {
                queue.push({i, Range{-i - 2, -i}, ActivationTensor(rs, 2, channels[i + 1])});
            }
            o.overlap_pushes += layers;
            sample(res);
        }

        for (const auto& tile : plan.tiles) {
            const int base = tile.base_col;
            const int occupancy_before = queue.size();

            res.evict_before(base - layers + 1);
            auto loaded = crop(image, r0, base + 1, rs, cols);
            rep.dram.image_bytes_read += std::int64_t{rs} * tile.input_cols.size() * channels[0];
            for (int c = tile.input_cols.begin; c < tile.input_cols.end; ++c) {
                res.append_column(c, column_of(loaded, c - (base + 1)));
            }
            pp.load_input(std::move(loaded));
            sample(res);

            for (int i = 0; i < layers; ++i) {
                const auto& spec = net.layers[static_cast<std::size_t>(i)];
                const auto& lw = m.weights.layers[static_cast<std::size_t>(i)];
                // Layer i reads feature-map columns [base - i - 1, base - i + C + 1):
                // two carried from the previous tile, C from this tile's bank.
                const int window_first = base - i - 1;
                auto window = hconcat(queue.front().data, pp.read_input());
                Slab carry{i - 1, Range{window_first + cols, window_first + cols + 2},
                           slice_cols(window, cols, 2)};
                queue.pop_front();
                queue.push(std::move(carry));
                ++o.overlap_pops;
                ++o.overlap_pushes;

                auto acc = convolve(window, lw, PadSpec::halo_columns(), opts);
                zero_outside(acc, base - i, width);
                const auto& region = tile.regions[static_cast<std::size_t>(i)];
                rep.cycles += tile_layer_cycles(region, spec.in_channels, spec.out_channels);

                if (i + 1 < layers) {
                    pp.write_output(requantize(acc, net.quant[static_cast<std::size_t>(i)], spec.has_relu));
                } else if (!region.cols.empty()) {
                    const int off = region.cols.begin - (base - i);
                    auto part = crop(acc, 0, off, rs, region.cols.size());
                    auto out = finish_output(part, res.anchor(region.cols), net);
                    place_hr(hr, out, r0, region.cols.begin, s);
                    rep.dram.image_bytes_written += static_cast<std::int64_t>(out.size());
                    pp.write_output(space_to_depth(out, s));
                }
                sample(res);
                pp.swap();
            }

            ++o.tiles;
            if (queue.size() == occupancy_before) {
                ++o.balanced_tiles;
            }
            pp.clear();
        }

        o.peak_residual = std::max(o.peak_residual, res.peak_bytes());
        o.overlap_pops += queue.size();
        queue.clear();
    }
    o.peak_pingpong_bank = pp.peak_bank_bytes();
    o.peak_overlap_slabs = queue.peak_occupancy();
    o.peak_total = occ.peak();
    return hr;
}

}  // namespace

std::vector<int> scale_rows(const std::vector<int>& rows, int upscale) {
    std::vector<int> out;
    out.reserve(rows.size() * static_cast<std::size_t>(upscale));
    for (int r : rows) {
        for (int k = 0; k < upscale; ++k) {
            out.push_back(r * upscale + k);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

EquivalenceStats equivalence_check(const ActivationTensor& fused,
                                   const ActivationTensor& reference,
                                   const std::optional<std::vector<int>>& allowed_rows) {
    if (!fused.same_shape(reference)) {
        throw std::invalid_argument("equivalence_check: " + shape_string(fused) + " vs " +
                                    shape_string(reference));
    }
    EquivalenceStats st;
    st.rows = fused.height();
    st.mask_applied = allowed_rows.has_value();
    std::set<int> allowed;
    if (allowed_rows) {
        allowed.insert(allowed_rows->begin(), allowed_rows->end());
    }
    double sq = 0.0;
    for (int y = 0; y < fused.height(); ++y) {
        bool row_differs = false;
        for (int c = 0; c < fused.channels(); ++c) {
            auto a = fused.row(c, y);
            auto b = reference.row(c, y);
            for (std::size_t x = 0; x < a.size(); ++x) {
                const int d = std::abs(int{a[x]} - int{b[x]});
                if (d != 0) {
                    row_differs = true;
                    st.max_abs_deviation = std::max(st.max_abs_deviation, d);
                    sq += double(d) * d;
                }
            }
        }
        if (row_differs) {
            st.deviating_rows.push_back(y);
            if (allowed_rows && !allowed.contains(y)) {
                st.unmasked_deviating_rows.push_back(y);
            }
        } else {
            ++st.exact_rows;
        }
    }
    if (sq > 0.0) {
        const double mse = sq / static_cast<double>(fused.size());
        st.psnr_db = 10.0 * std::log10(255.0 * 255.0 / mse);
    }
    return st;
}

RunResult run(const ScheduleMode& mode, const Model& model, const ActivationTensor& image,
              const SimOptions& opts) {
    const auto& net = model.net;
    net.validate();
    model.weights.validate_against(net);
    if (image.channels() != net.input_channels()) {
        throw std::invalid_argument("run: image has " + std::to_string(image.channels()) +
                                    " channels, network expects " +
                                    std::to_string(net.input_channels()));
    }
    if (opts.fps <= 0.0) {
        throw std::invalid_argument("run: fps must be positive");
    }

    RunResult result;
    SimReport& rep = result.report;
    rep.mode = mode;
    rep.image_height = image.height();
    rep.image_width = image.width();
    rep.num_layers = net.num_layers();
    rep.upscale = net.upscale;
    rep.fps = opts.fps;
    rep.dram.weight_bytes_read = weight_bytes(model.weights);

    switch (mode.kind) {
        case ScheduleKind::LayerByLayer:
            result.hr_image = run_layer_by_layer(model, image, opts, rep);
            break;
        case ScheduleKind::Classical:
            result.hr_image = run_classical(mode.classical_tile, model, image, opts, rep);
            break;
        case ScheduleKind::Tilted: {
            FusionConfig cfg{mode.tile_rows, mode.tile_cols, net.num_layers(), image.height(),
                             image.width()};
            cfg.validate();
            result.hr_image = run_tilted(cfg, model, image, opts, rep);
            break;
        }
    }

    if (opts.compare) {
        ActivationTensor computed;
        const ActivationTensor* ref = opts.reference;
        if (ref == nullptr) {
            computed = reference_forward(net, model.weights, image);
            ref = &computed;
        }
        std::optional<std::vector<int>> allowed;
        if (mode.kind == ScheduleKind::LayerByLayer) {
            allowed = std::vector<int>{};
        } else if (mode.kind == ScheduleKind::Tilted) {
            allowed = scale_rows(rep.lost_rows, net.upscale);
        }
        rep.equivalence = equivalence_check(result.hr_image, *ref, allowed);
    }
    return result;
}

int sweep_threads() {
    if (const char* env = std::getenv("FUSESIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepCell> sweep(const std::vector<ScheduleMode>& modes, const Model& model,
                             const ActivationTensor& image, const SimOptions& opts) {
    std::vector<SweepCell> cells(modes.size());
    if (modes.empty()) {
        return cells;
    }
    SimOptions shared = opts;
    ActivationTensor reference;
    if (opts.compare && opts.reference == nullptr) {
        reference = reference_forward(model.net, model.weights, image);
        shared.reference = &reference;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < modes.size(); k = next++) {
            cells[k].mode = modes[k];
            try {
                cells[k].report = run(modes[k], model, image, shared).report;
            } catch (const std::exception& e) {
                cells[k].error = e.what();
            }
        }
    };
    const int n = std::min<int>(sweep_threads(), static_cast<int>(modes.size()));
    std::vector<std::jthread> pool;
    for (int t = 1; t < n; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    pool.clear();  // join before `cells` leaves this frame
    return cells;
}

}  // namespace fusesim
