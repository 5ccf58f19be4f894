#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusesim/network.hpp"
#include "fusesim/tensor.hpp"

namespace fusesim {

/// Malformed image or weight file. `offset` is the byte where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// xoshiro256** seeded through splitmix64. Bit-identical on every platform.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed);
    std::uint64_t next();
    /// Uniform integer in [lo, hi].
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);

private:
    std::uint64_t s_[4];
};

/// Binary PPM (P6) -> 3 channels, PGM (P5) -> 1 channel. maxval must be 255.
ActivationTensor decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_image(const ActivationTensor& image);
ActivationTensor load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const ActivationTensor& image);

ActivationTensor random_image(std::uint64_t seed, int height, int width, int channels);

/// "FWS1" little-endian weight file. Shapes are checked against `expected`,
/// whose layer flags and upscale carry over; shifts come from the file.
Model decode_weights(std::span<const std::uint8_t> bytes, const NetworkSpec& expected);
std::vector<std::uint8_t> encode_weights(const Model& model);
Model load_weights(const std::filesystem::path& path, const NetworkSpec& expected);
void save_weights(const std::filesystem::path& path, const Model& model);

/// Seeded random model for `shape`: weights uniform in [-64, 63], biases in
/// [-256, 255], shift 5 + ceil(log2(sqrt(9 * in_channels))) per layer.
Model gen_weights(std::uint64_t seed, const NetworkSpec& shape);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace fusesim
