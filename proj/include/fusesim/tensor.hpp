#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace fusesim {

enum class ElementKind { Activation, Weight, Accumulator };

template <typename T>
constexpr ElementKind element_kind_of() {
    if constexpr (std::is_same_v<T, std::uint8_t>) {
        return ElementKind::Activation;
    } else if constexpr (std::is_same_v<T, std::int8_t>) {
        return ElementKind::Weight;
    } else {
        static_assert(std::is_same_v<T, std::int32_t>, "unsupported tensor element type");
        return ElementKind::Accumulator;
    }
}

/// Channel-major feature map: data[(c * height + y) * width + x].
///
/// The element type carries the kind (u8 activation, i8 weight, i32
/// accumulator), so value ranges hold by construction.
template <typename T>
class PlanarTensor {
public:
    using value_type = T;

    PlanarTensor() = default;

    PlanarTensor(int height, int width, int channels, T fill = T{})
        : height_(height), width_(width), channels_(channels) {
        if (height < 0 || width < 0 || channels < 0) {
            throw std::invalid_argument("PlanarTensor: negative dimension");
        }
        data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    static constexpr ElementKind kind() { return element_kind_of<T>(); }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
    const T& operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }

    /// Zero outside the tensor, for padded reads.
    T at_or_zero(int c, int y, int x) const {
        if (y < 0 || y >= height_ || x < 0 || x >= width_) {
            return T{};
        }
        return data_[index(c, y, x)];
    }

    std::span<T> row(int c, int y) {
        return {data_.data() + index(c, y, 0), static_cast<std::size_t>(width_)};
    }
    std::span<const T> row(int c, int y) const {
        return {data_.data() + index(c, y, 0), static_cast<std::size_t>(width_)};
    }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    bool same_shape(const PlanarTensor& o) const {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

    friend bool operator==(const PlanarTensor&, const PlanarTensor&) = default;

private:
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<T> data_;
};

using ActivationTensor = PlanarTensor<std::uint8_t>;
using AccumTensor = PlanarTensor<std::int32_t>;

std::string shape_string(int height, int width, int channels);

template <typename T>
std::string shape_string(const PlanarTensor<T>& t) {
    return shape_string(t.height(), t.width(), t.channels());
}

/// Copies columns [x0, x0 + n) of every channel; columns outside the source
/// read as zero.
template <typename T>
PlanarTensor<T> slice_cols(const PlanarTensor<T>& src, int x0, int n) {
    PlanarTensor<T> out(src.height(), n, src.channels());
    for (int c = 0; c < src.channels(); ++c) {
        for (int y = 0; y < src.height(); ++y) {
            for (int x = 0; x < n; ++x) {
                out(c, y, x) = src.at_or_zero(c, y, x0 + x);
            }
        }
    }
    return out;
}

/// Copies the rectangle rows [y0, y0 + h) x cols [x0, x0 + w); outside reads zero.
template <typename T>
PlanarTensor<T> crop(const PlanarTensor<T>& src, int y0, int x0, int h, int w) {
    PlanarTensor<T> out(h, w, src.channels());
    for (int c = 0; c < src.channels(); ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                out(c, y, x) = src.at_or_zero(c, y0 + y, x0 + x);
            }
        }
    }
    return out;
}

}  // namespace fusesim
