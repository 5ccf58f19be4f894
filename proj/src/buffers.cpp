#include "fusesim/buffers.hpp"

#include <algorithm>

namespace fusesim {

const char* to_string(FusionKind kind) {
    return kind == FusionKind::Tilted ? "tilted" : "classical";
}

int BufferConfig::max_channels() const {
    return channels.empty() ? 0 : *std::max_element(channels.begin(), channels.end());
}

BufferConfig BufferConfig::tilted(const FusionConfig& fusion, const NetworkSpec& net) {
    return {fusion.tile_rows, fusion.tile_cols, fusion.num_layers, net.channel_counts(), 1};
}

BufferConfig BufferConfig::classical(int tile, const NetworkSpec& net) {
    return {tile, tile, net.num_layers(), net.channel_counts(), 1};
}

std::int64_t size_pingpong(const BufferConfig& cfg) {
    return std::int64_t{cfg.tile_rows} * cfg.tile_cols * cfg.max_channels() *
           cfg.bytes_per_element;
}

std::int64_t size_overlap(const BufferConfig& cfg) {
    return std::int64_t{cfg.num_layers + 2} * cfg.tile_rows * 2 * cfg.max_channels() *
           cfg.bytes_per_element;
}

std::int64_t size_residual(const BufferConfig& cfg) {
    return std::int64_t{cfg.input_channels()} * cfg.tile_rows *
           (cfg.tile_cols + cfg.num_layers) * cfg.bytes_per_element;
}

std::int64_t size_residual_classical(const BufferConfig& cfg) {
    return std::int64_t{cfg.input_channels()} * cfg.tile_rows * cfg.tile_cols *
           cfg.bytes_per_element;
}

std::int64_t weight_bytes(const WeightSet& weights) {
    return weights.weight_count() + 4 * weights.bias_count();
}

SizingReport sizing_report(const BufferConfig& cfg, FusionKind kind, std::int64_t weights) {
    SizingReport r;
    r.kind = kind;
    r.pingpong_bank = size_pingpong(cfg);
    r.pingpong_pair = 2 * r.pingpong_bank;
    if (kind == FusionKind::Tilted) {
        r.overlap = size_overlap(cfg);
        r.residual = size_residual(cfg);
    } else {
        r.residual = size_residual_classical(cfg);
    }
    r.weight_bytes = weights;
    r.total_bytes = r.pingpong_pair + r.overlap + r.residual + r.weight_bytes;
    return r;
}

SizingReport sizing_report(const BufferConfig& cfg, FusionKind kind, const WeightSet& weights) {
    return sizing_report(cfg, kind, weight_bytes(weights));
}

// ---------------------------------------------------------------------------

void PingPongPair::check_fits(const ActivationTensor& t) const {
    const auto bytes = static_cast<std::int64_t>(t.size());
    if (bytes > bank_bytes_) {
        throw InvariantViolation("ping-pong bank overflow: " + std::to_string(bytes) + " > " +
                                 std::to_string(bank_bytes_) + " bytes");
    }
}

void PingPongPair::load_input(ActivationTensor data) {
    // A DRAM fill precedes the first layer and is not a layer-time write.
    check_fits(data);
    peak_bank_ = std::max(peak_bank_, static_cast<std::int64_t>(data.size()));
    banks_[static_cast<std::size_t>(input_bank_)] = std::move(data);
}

const ActivationTensor& PingPongPair::read_input() {
    ++reads_[static_cast<std::size_t>(input_bank_)];
    return banks_[static_cast<std::size_t>(input_bank_)];
}

void PingPongPair::write_output(ActivationTensor data) {
    check_fits(data);
    const auto out = static_cast<std::size_t>(1 - input_bank_);
    ++writes_[out];
    peak_bank_ = std::max(peak_bank_, static_cast<std::int64_t>(data.size()));
    banks_[out] = std::move(data);
}

void PingPongPair::swap() {
    const auto in = static_cast<std::size_t>(input_bank_);
    const auto out = 1 - in;
    if (writes_[in] != 0 || reads_[out] != 0) {
        throw InvariantViolation("ping-pong exclusivity violated within a layer");
    }
    banks_[in] = ActivationTensor{};
    input_bank_ = static_cast<int>(out);
    reads_ = {};
    writes_ = {};
    ++swaps_;
}

void PingPongPair::clear() {
    banks_ = {};
    reads_ = {};
    writes_ = {};
}

std::int64_t PingPongPair::resident_bytes() const {
    return static_cast<std::int64_t>(banks_[0].size() + banks_[1].size());
}

// ---------------------------------------------------------------------------

OverlapQueue::OverlapQueue(int depth, std::int64_t slab_bytes)
    : slots_(static_cast<std::size_t>(depth)), slab_bytes_(slab_bytes) {
    if (depth < 1) {
        throw std::invalid_argument("overlap queue depth must be >= 1");
    }
}

void OverlapQueue::push(Slab slab) {
    if (size_ >= depth()) {
        throw QueueDisciplineError("overlap queue overflow: depth " + std::to_string(depth()));
    }
    if (static_cast<std::int64_t>(slab.data.size()) > slab_bytes_) {
        throw InvariantViolation("overlap slab of " + std::to_string(slab.data.size()) +
                                 " bytes exceeds slot size " + std::to_string(slab_bytes_));
    }
    const int back = (front_ + size_) % depth();
    slots_[static_cast<std::size_t>(back)] = std::move(slab);
    ++size_;
    peak_ = std::max(peak_, size_);
}

const Slab& OverlapQueue::front(int relative) const {
    if (relative < 0 || relative >= size_) {
        throw QueueDisciplineError("overlap queue read at " + std::to_string(relative) +
                                   " with occupancy " + std::to_string(size_));
    }
    return *slots_[static_cast<std::size_t>((front_ + relative) % depth())];
}

void OverlapQueue::pop_front() {
    if (size_ == 0) {
        throw QueueDisciplineError("overlap queue underflow");
    }
    slots_[static_cast<std::size_t>(front_)].reset();
    front_ = (front_ + 1) % depth();
    --size_;
}

void OverlapQueue::clear() {
    while (size_ > 0) {
        pop_front();
    }
}

std::int64_t OverlapQueue::slot_address(int relative) const {
    return ((front_ + relative) % depth()) * slab_bytes_;
}

std::int64_t OverlapQueue::resident_bytes() const {
    std::int64_t bytes = 0;
    for (const auto& s : slots_) {
        if (s) {
            bytes += static_cast<std::int64_t>(s->data.size());
        }
    }
    return bytes;
}

// ---------------------------------------------------------------------------

void ResidualBuffer::append_column(int col, const ActivationTensor& column) {
    if (column.width() != 1 || column.height() != rows_ || column.channels() != channels_) {
        throw std::invalid_argument("residual buffer column has shape " + shape_string(column));
    }
    if (!columns_.empty() && col <= columns_.back().index) {
        throw InvariantViolation("residual buffer columns must arrive in order");
    }
    const auto bytes = resident_bytes() + std::int64_t{rows_} * channels_;
    if (bytes > capacity_) {
        throw InvariantViolation("residual buffer overflow: " + std::to_string(bytes) + " > " +
                                 std::to_string(capacity_) + " bytes");
    }
    columns_.push_back({col, column});
    peak_ = std::max(peak_, bytes);
}

void ResidualBuffer::evict_before(int col) {
    while (!columns_.empty() && columns_.front().index < col) {
        columns_.pop_front();
    }
}

ActivationTensor ResidualBuffer::anchor(Range cols) const {
    ActivationTensor out(rows_, cols.size(), channels_);
    for (int x = cols.begin; x < cols.end; ++x) {
        const auto it = std::find_if(columns_.begin(), columns_.end(),
                                     [x](const Column& c) { return c.index == x; });
        if (it == columns_.end()) {
            throw InvariantViolation("residual column " + std::to_string(x) + " not resident");
        }
        for (int c = 0; c < channels_; ++c) {
            for (int y = 0; y < rows_; ++y) {
                out(c, y, x - cols.begin) = it->data(c, y, 0);
            }
        }
    }
    return out;
}

std::int64_t ResidualBuffer::resident_bytes() const {
    return static_cast<std::int64_t>(columns_.size()) * rows_ * channels_;
}

}  // namespace fusesim
