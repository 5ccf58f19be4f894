#include "fusesim/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

namespace fusesim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
    for (auto& s : s_) {
        s = splitmix64(seed);
    }
}

std::uint64_t Xoshiro256::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

std::int64_t Xoshiro256::uniform(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Lemire's multiply-shift with rejection keeps the draw unbiased.
    std::uint64_t x = next() >> 32;
    std::uint64_t m = x * span;
    auto low = static_cast<std::uint32_t>(m);
    if (low < span) {
        const auto threshold = static_cast<std::uint32_t>((0x100000000ull - span) % span);
        while (low < threshold) {
            x = next() >> 32;
            m = x * span;
            low = static_cast<std::uint32_t>(m);
        }
    }
    return lo + static_cast<std::int64_t>(m >> 32);
}

// --- images ----------------------------------------------------------------

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1'000'000) {
                throw ParseError(std::string("image header: ") + what + " too large", start);
            }
            ++pos_;
        }
        if (pos_ == start) {
            throw ParseError(std::string("image header: expected ") + what, start);
        }
        return v;
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

ActivationTensor decode_image(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw ParseError("not a binary PGM (P5) or PPM (P6) file", 0);
    }
    const int channels = bytes[1] == '6' ? 3 : 1;
    HeaderReader rd(bytes);
    rd.advance(2);
    const long width = rd.read_uint("width");
    const long height = rd.read_uint("height");
    const std::size_t maxval_at = rd.pos();
    const long maxval = rd.read_uint("maxval");
    if (maxval != 255) {
        throw ParseError("only 8-bit images (maxval 255) are supported, got maxval " +
                             std::to_string(maxval),
                         maxval_at);
    }
    if (rd.pos() >= bytes.size() || !std::isspace(bytes[rd.pos()])) {
        throw ParseError("image header: missing whitespace before payload", rd.pos());
    }
    rd.advance(1);
    const std::size_t payload = rd.pos();
    const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
    const std::size_t actual = bytes.size() - payload;
    if (actual < expected) {
        throw ParseError("truncated payload: expected " + std::to_string(expected) +
                             " bytes, got " + std::to_string(actual),
                         bytes.size());
    }
    ActivationTensor img(static_cast<int>(height), static_cast<int>(width), channels);
    std::size_t k = payload;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < channels; ++c) {
                img(c, y, x) = bytes[k++];
            }
        }
    }
    return img;
}

std::vector<std::uint8_t> encode_image(const ActivationTensor& image) {
    if (image.channels() != 1 && image.channels() != 3) {
        throw std::invalid_argument("encode_image: need 1 or 3 channels, got " +
                                    std::to_string(image.channels()));
    }
    const std::string header = std::string(image.channels() == 3 ? "P6" : "P5") + "\n" +
                               std::to_string(image.width()) + " " +
                               std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.size());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            for (int c = 0; c < image.channels(); ++c) {
                out.push_back(image(c, y, x));
            }
        }
    }
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

ActivationTensor load_image(const std::filesystem::path& path) {
    return decode_image(read_file(path));
}

void save_image(const std::filesystem::path& path, const ActivationTensor& image) {
    write_file(path, encode_image(image));
}

ActivationTensor random_image(std::uint64_t seed, int height, int width, int channels) {
    Xoshiro256 rng(seed);
    ActivationTensor img(height, width, channels);
    for (auto& v : img.data()) {
        v = static_cast<std::uint8_t>(rng.next() >> 56);
    }
    return img;
}

// --- weights ---------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'F', 'W', 'S', '1'};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw ParseError(std::string("weight file truncated reading ") + what, pos_);
        }
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return bytes_[pos_++];
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) {
            v |= std::uint32_t{bytes_[pos_++]} << (8 * k);
        }
        return v;
    }
    std::size_t pos() const { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
}

}  // namespace

Model decode_weights(std::span<const std::uint8_t> bytes, const NetworkSpec& expected) {
    ByteReader rd(bytes);
    rd.need(4, "magic");
    for (int k = 0; k < 4; ++k) {
        if (rd.u8("magic") != static_cast<std::uint8_t>(kMagic[k])) {
            throw ParseError("bad magic, expected \"FWS1\"", 0);
        }
    }
    const std::size_t count_at = rd.pos();
    const auto layer_count = rd.u32("layer count");
    if (layer_count != expected.layers.size()) {
        throw ParseError("weight file has " + std::to_string(layer_count) +
                             " layers, expected " + std::to_string(expected.layers.size()),
                         count_at);
    }
    Model m;
    m.net = expected;
    m.net.quant.assign(expected.layers.size(), QuantParams{});
    for (std::size_t i = 0; i < layer_count; ++i) {
        const std::size_t at = rd.pos();
        const auto in_ch = rd.u32("in_ch");
        const auto out_ch = rd.u32("out_ch");
        const auto& want = expected.layers[i];
        if (in_ch != static_cast<std::uint32_t>(want.in_channels) ||
            out_ch != static_cast<std::uint32_t>(want.out_channels)) {
            throw ParseError("layer " + std::to_string(i) + " is " + std::to_string(in_ch) +
                                 "->" + std::to_string(out_ch) + ", expected " +
                                 std::to_string(want.in_channels) + "->" +
                                 std::to_string(want.out_channels),
                             at);
        }
        const std::size_t shift_at = rd.pos();
        const int shift = rd.u8("requant_shift");
        if (shift > QuantParams::kMaxShift) {
            throw ParseError("requant_shift " + std::to_string(shift) + " exceeds 24", shift_at);
        }
        m.net.quant[i].requant_shift = shift;
        for (int k = 0; k < 3; ++k) {
            rd.u8("padding");
        }
        LayerWeights lw(static_cast<int>(out_ch), static_cast<int>(in_ch));
        for (auto& w : lw.weights) {
            w = static_cast<std::int8_t>(rd.u8("weights"));
        }
        for (auto& b : lw.bias) {
            b = static_cast<std::int32_t>(rd.u32("biases"));
        }
        m.weights.layers.push_back(std::move(lw));
    }
    if (rd.pos() != bytes.size()) {
        throw ParseError("trailing bytes after last layer", rd.pos());
    }
    return m;
}

std::vector<std::uint8_t> encode_weights(const Model& model) {
    model.weights.validate_against(model.net);
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, static_cast<std::uint32_t>(model.weights.layers.size()));
    for (std::size_t i = 0; i < model.weights.layers.size(); ++i) {
        const auto& lw = model.weights.layers[i];
        put_u32(out, static_cast<std::uint32_t>(lw.in_channels));
        put_u32(out, static_cast<std::uint32_t>(lw.out_channels));
        out.push_back(static_cast<std::uint8_t>(model.net.quant[i].requant_shift));
        out.insert(out.end(), 3, 0);
        for (auto w : lw.weights) {
            out.push_back(static_cast<std::uint8_t>(w));
        }
        for (auto b : lw.bias) {
            put_u32(out, static_cast<std::uint32_t>(b));
        }
    }
    return out;
}

Model load_weights(const std::filesystem::path& path, const NetworkSpec& expected) {
    return decode_weights(read_file(path), expected);
}

void save_weights(const std::filesystem::path& path, const Model& model) {
    write_file(path, encode_weights(model));
}

Model gen_weights(std::uint64_t seed, const NetworkSpec& shape) {
    Xoshiro256 rng(seed);
    Model m;
    m.net = shape;
    m.net.quant.assign(shape.layers.size(), QuantParams{});
    for (std::size_t i = 0; i < shape.layers.size(); ++i) {
        const auto& l = shape.layers[i];
        // ceil(log2(sqrt(9 * in))) in integers: smallest k with 4^k >= 9 * in.
        int k = 0;
        while ((std::int64_t{1} << (2 * k)) < 9 * std::int64_t{l.in_channels}) {
            ++k;
        }
        m.net.quant[i].requant_shift = std::min(5 + k, QuantParams::kMaxShift);
        LayerWeights lw(l.out_channels, l.in_channels);
        for (auto& w : lw.weights) {
            w = static_cast<std::int8_t>(rng.uniform(-64, 63));
        }
        for (auto& b : lw.bias) {
            b = static_cast<std::int32_t>(rng.uniform(-256, 255));
        }
        m.weights.layers.push_back(std::move(lw));
    }
    m.net.validate();
    return m;
}

}  // namespace fusesim
