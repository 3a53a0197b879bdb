#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "pulseline/errors.hpp"
#include "pulseline/nn.hpp"

namespace pulseline {

// Compact binary model format, little-endian:
//   magic "THR1" | version u8=1 | layer count u8
//   per layer: kind u8 (0 dense, 1 conv1d) | activation u8 |
//              dims u32 x4 (dense: in, out, 0, 0; conv1d: in_ch, out_ch, kernel, in_len) |
//              weights f32 row-major | biases f32
//   trailing CRC32 (IEEE) over all preceding bytes.

inline constexpr std::array<std::uint8_t, 4> kModelMagic = {'T', 'H', 'R', '1'};
inline constexpr std::uint8_t kModelFormatVersion = 1;

// CRC-32, IEEE/zlib polynomial (reflected 0xEDB88320).
inline std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t n) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

namespace io_detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct Reader {
    std::span<const std::uint8_t> buf;
    std::size_t pos = 0;

    std::size_t left() const { return buf.size() - pos; }

    std::uint8_t u8() {
        if (left() < 1) throw TruncatedPayload("model file: unexpected end of payload");
        return buf[pos++];
    }
    std::uint32_t u32() {
        if (left() < 4) throw TruncatedPayload("model file: unexpected end of payload");
        std::uint32_t v = static_cast<std::uint32_t>(buf[pos]) |
                          static_cast<std::uint32_t>(buf[pos + 1]) << 8 |
                          static_cast<std::uint32_t>(buf[pos + 2]) << 16 |
                          static_cast<std::uint32_t>(buf[pos + 3]) << 24;
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
};

} // namespace io_detail

inline std::vector<std::uint8_t> serialize_model(const Model& model) {
    validate_model(model);
    if (model.layers.size() > 255) throw ShapeError("serialize_model: too many layers");

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kModelMagic.begin(), kModelMagic.end());
    out.push_back(kModelFormatVersion);
    out.push_back(static_cast<std::uint8_t>(model.layers.size()));
    for (const auto& l : model.layers) {
        const auto& s = l.spec;
        out.push_back(static_cast<std::uint8_t>(s.kind));
        out.push_back(static_cast<std::uint8_t>(s.activation));
        if (s.kind == LayerKind::Dense) {
            io_detail::put_u32(out, static_cast<std::uint32_t>(s.in_dim));
            io_detail::put_u32(out, static_cast<std::uint32_t>(s.out_dim));
            io_detail::put_u32(out, 0);
            io_detail::put_u32(out, 0);
        } else {
            io_detail::put_u32(out, static_cast<std::uint32_t>(s.in_channels));
            io_detail::put_u32(out, static_cast<std::uint32_t>(s.out_channels));
            io_detail::put_u32(out, static_cast<std::uint32_t>(s.kernel));
            io_detail::put_u32(out, static_cast<std::uint32_t>(s.in_length));
        }
        for (double w : l.weights) io_detail::put_f32(out, static_cast<float>(w));
        for (double b : l.biases) io_detail::put_f32(out, static_cast<float>(b));
    }
    io_detail::put_u32(out, crc32_ieee(out.data(), out.size()));
    return out;
}

inline Model deserialize_model(std::span<const std::uint8_t> bytes) {
    // checksum first: any in-place corruption is caught here, before parsing
    if (bytes.size() < kModelMagic.size() + 4)
        throw TruncatedPayload("model file: shorter than header + checksum");
    const std::uint32_t stored =
        static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
        static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
        static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
        static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
    if (crc32_ieee(bytes.data(), bytes.size() - 4) != stored)
        throw CrcMismatch("model file: CRC32 mismatch");

    io_detail::Reader r{bytes.first(bytes.size() - 4)};
    std::array<std::uint8_t, 4> magic{};
    for (auto& b : magic) b = r.u8();
    if (magic != kModelMagic) throw BadMagic("model file: bad magic");
    const std::uint8_t version = r.u8();
    if (version != kModelFormatVersion)
        throw ShapeInconsistency("model file: unsupported format version " + std::to_string(version));

    Model m;
    const std::uint8_t n_layers = r.u8();
    for (std::uint8_t li = 0; li < n_layers; ++li) {
        Layer l;
        const std::uint8_t kind = r.u8();
        const std::uint8_t act = r.u8();
        if (kind > 1) throw ShapeInconsistency("model file: unknown layer kind");
        if (act > 3) throw ShapeInconsistency("model file: unknown activation");
        const std::uint32_t d0 = r.u32(), d1 = r.u32(), d2 = r.u32(), d3 = r.u32();
        if (kind == 0) {
            l.spec = LayerSpec::dense(d0, d1, static_cast<Activation>(act));
            if (d2 != 0 || d3 != 0)
                throw ShapeInconsistency("model file: dense layer with conv dims");
        } else {
            l.spec = LayerSpec::conv1d(d0, d1, d2, d3, static_cast<Activation>(act));
        }
        try {
            l.spec.validate(li);
        } catch (const ShapeError& e) {
            throw ShapeInconsistency(std::string("model file: ") + e.what());
        }
        l.weights.resize(l.spec.weight_count());
        for (auto& w : l.weights) w = static_cast<double>(r.f32());
        l.biases.resize(l.spec.bias_count());
        for (auto& b : l.biases) b = static_cast<double>(r.f32());
        m.layers.push_back(std::move(l));
    }
    if (r.left() != 0) throw ShapeInconsistency("model file: trailing bytes after payload");
    try {
        validate_model(m);
    } catch (const ShapeError& e) {
        throw ShapeInconsistency(std::string("model file: ") + e.what());
    }
    return m;
}

inline void save_model(const Model& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("save_model: cannot open " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("save_model: write failed for " + path.string());
}

inline Model load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("load_model: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace pulseline
