#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusesim/network.hpp"
#include "fusesim/tensor.hpp"
#include "fusesim/tiling.hpp"

namespace fusesim {

/// A modeled on-chip memory was asked to hold more than its sized capacity,
/// or was accessed out of discipline. Always a simulator bug.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QueueDisciplineError : public InvariantViolation {
public:
    using InvariantViolation::InvariantViolation;
};

enum class FusionKind { Tilted, Classical };

const char* to_string(FusionKind kind);

struct BufferConfig {
    int tile_rows = 60;
    int tile_cols = 8;
    int num_layers = 7;
    /// Ch_0 (input) followed by every layer's output channel count.
    std::vector<int> channels;
    int bytes_per_element = 1;

    int max_channels() const;
    int input_channels() const { return channels.empty() ? 0 : channels.front(); }

    static BufferConfig tilted(const FusionConfig& fusion, const NetworkSpec& net);
    static BufferConfig classical(int tile, const NetworkSpec& net);
};

/// Buffer sizes, in bytes.
std::int64_t size_pingpong(const BufferConfig& cfg);            // one bank: R*C*max(Ch)
std::int64_t size_overlap(const BufferConfig& cfg);             // (L+2)*R*2*max(Ch)
std::int64_t size_residual(const BufferConfig& cfg);            // Ch0*R*(C+L)
std::int64_t size_residual_classical(const BufferConfig& cfg);  // Ch0*R*C

/// i8 weights plus i32 biases.
std::int64_t weight_bytes(const WeightSet& weights);

struct SizingReport {
    FusionKind kind = FusionKind::Tilted;
    std::int64_t pingpong_bank = 0;
    std::int64_t pingpong_pair = 0;
    std::int64_t overlap = 0;
    std::int64_t residual = 0;
    std::int64_t weight_bytes = 0;
    std::int64_t total_bytes = 0;
};

SizingReport sizing_report(const BufferConfig& cfg, FusionKind kind, std::int64_t weights);
SizingReport sizing_report(const BufferConfig& cfg, FusionKind kind, const WeightSet& weights);

/// Two tile banks that swap input/output roles after every layer.
class PingPongPair {
public:
    explicit PingPongPair(std::int64_t bank_bytes) : bank_bytes_(bank_bytes) {}

    /// DRAM fill of the current input bank (start of a tile).
    void load_input(ActivationTensor data);
    const ActivationTensor& read_input();
    void write_output(ActivationTensor data);
    /// Ends the current layer; the output bank becomes the next input.
    void swap();
    /// Drops both banks' contents at the end of a tile.
    void clear();

    int input_bank() const { return input_bank_; }
    std::int64_t bank_bytes() const { return bank_bytes_; }
    std::int64_t resident_bytes() const;
    std::int64_t peak_bank_bytes() const { return peak_bank_; }
    std::int64_t swaps() const { return swaps_; }

private:
    void check_fits(const ActivationTensor& t) const;

    std::int64_t bank_bytes_;
    std::array<ActivationTensor, 2> banks_;
    std::array<int, 2> reads_{};
    std::array<int, 2> writes_{};
    int input_bank_ = 0;
    std::int64_t peak_bank_ = 0;
    std::int64_t swaps_ = 0;
};

/// Two boundary columns of one layer's feature map, carried to the next tile.
struct Slab {
    int tag = 0;  // producing layer, -1 for the image itself
    Range cols;   // unclipped column indices held
    ActivationTensor data;
};

/// Fixed-depth ring of layer slabs, addressed from a saved front index.
class OverlapQueue {
public:
    OverlapQueue(int depth, std::int64_t slab_bytes);

    void push(Slab slab);
    const Slab& front(int relative = 0) const;
    void pop_front();
    void clear();

    int size() const { return size_; }
    int depth() const { return static_cast<int>(slots_.size()); }
    int front_index() const { return front_; }
    int peak_occupancy() const { return peak_; }
    std::int64_t slab_bytes() const { return slab_bytes_; }
    /// Byte address of the slab `relative` layers behind the front.
    std::int64_t slot_address(int relative) const;
    std::int64_t resident_bytes() const;

private:
    std::vector<std::optional<Slab>> slots_;
    std::int64_t slab_bytes_;
    int front_ = 0;
    int size_ = 0;
    int peak_ = 0;
};

/// Sliding window of low-resolution image columns kept for the final
/// layer's anchor residual.
class ResidualBuffer {
public:
    ResidualBuffer(std::int64_t capacity_bytes, int rows, int channels)
        : capacity_(capacity_bytes), rows_(rows), channels_(channels) {}

    /// `column` is channels x rows x 1.
    void append_column(int col, const ActivationTensor& column);
    void evict_before(int col);
    void clear() { columns_.clear(); }
    /// rows x cols.size() x channels; every column must be resident.
    ActivationTensor anchor(Range cols) const;

    std::int64_t capacity() const { return capacity_; }
    std::int64_t resident_bytes() const;
    std::int64_t peak_bytes() const { return peak_; }

private:
    struct Column {
        int index;
        ActivationTensor data;
    };
    std::int64_t capacity_;
    int rows_;
    int channels_;
    std::deque<Column> columns_;
    std::int64_t peak_ = 0;
};

}  // namespace fusesim
