#include "charforge/png.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <string_view>

namespace charforge::png {
namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

void put_u32(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
}

void put_chunk(Bytes& out, std::string_view type, std::span<const std::uint8_t> payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type.begin(), type.end());
    out.insert(out.end(), payload.begin(), payload.end());
    const auto crc = crc32(0L, out.data() + type_at, static_cast<uInt>(4 + payload.size()));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

std::size_t channels_for(std::uint8_t color_type) {
    switch (color_type) {
        case 0: return 1;
        case 2: return 3;
        case 3: return 1;
        case 4: return 2;
        case 6: return 4;
        default: return 0;
    }
}

struct Decoded {
    RasterInfo info;
    Bytes scanlines;
};

std::optional<Decoded> decode(std::span<const std::uint8_t> data) {
    if (data.size() < kSignature.size() ||
        std::memcmp(data.data(), kSignature.data(), kSignature.size()) != 0) {
        return std::nullopt;
    }
    std::size_t pos = kSignature.size();
    std::optional<RasterInfo> info;
    std::uint8_t interlace = 0;
    Bytes compressed;
    bool seen_end = false;
    while (pos + 12 <= data.size()) {
        const std::uint32_t length = get_u32(data.data() + pos);
        if (length > data.size() - pos - 12) {
            return std::nullopt;
        }
        const std::uint8_t* type = data.data() + pos + 4;
        const std::uint8_t* payload = type + 4;
        const std::uint32_t stored_crc = get_u32(payload + length);
        if (crc32(0L, type, 4 + length) != stored_crc) {
            return std::nullopt;
        }
        const std::string_view kind(reinterpret_cast<const char*>(type), 4);
        if (kind == "IHDR") {
            if (length != 13 || info) return std::nullopt;
            info = RasterInfo{get_u32(payload), get_u32(payload + 4), payload[8], payload[9]};
            interlace = payload[12];
        } else if (kind == "IDAT") {
            if (!info) return std::nullopt;
            compressed.insert(compressed.end(), payload, payload + length);
        } else if (kind == "IEND") {
            seen_end = true;
            break;
        }
        pos += 12 + length;
    }
    if (!info || !seen_end || compressed.empty() || info->width == 0 || info->height == 0) {
        return std::nullopt;
    }
    const std::size_t channels = channels_for(info->color_type);
    if (channels == 0 || interlace > 1) {
        return std::nullopt;
    }
    const std::size_t row_bytes = (std::size_t{info->width} * channels * info->bit_depth + 7) / 8 + 1;
    const std::size_t expected = row_bytes * info->height;

    Bytes raw(expected + 1);
    z_stream stream{};
    if (inflateInit(&stream) != Z_OK) {
        return std::nullopt;
    }
    stream.next_in = compressed.data();
    stream.avail_in = static_cast<uInt>(compressed.size());
    stream.next_out = raw.data();
    stream.avail_out = static_cast<uInt>(raw.size());
    const int rc = inflate(&stream, Z_FINISH);
    const std::size_t produced = stream.total_out;
    inflateEnd(&stream);
    if (rc != Z_STREAM_END) {
        return std::nullopt;
    }
    // Adam7 streams are shorter than the flat layout; only require a full stream there.
    if (interlace == 0 && produced != expected) {
        return std::nullopt;
    }
    raw.resize(produced);
    return Decoded{*info, std::move(raw)};
}

}  // namespace

Bytes encode_solid(std::uint32_t width, std::uint32_t height, Rgb color) {
    Bytes out(kSignature.begin(), kSignature.end());

    Bytes ihdr;
    put_u32(ihdr, width);
    put_u32(ihdr, height);
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
    put_chunk(out, "IHDR", ihdr);

    const std::size_t row = 1 + std::size_t{width} * 3;
    Bytes raw(row * height);
    for (std::uint32_t y = 0; y < height; ++y) {
        std::uint8_t* p = raw.data() + y * row;
        *p++ = 0;  // filter: none
        for (std::uint32_t x = 0; x < width; ++x) {
            *p++ = color.r;
            *p++ = color.g;
            *p++ = color.b;
        }
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    Bytes idat(bound);
    compress2(idat.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION);
    idat.resize(bound);
    put_chunk(out, "IDAT", idat);
    put_chunk(out, "IEND", {});
    return out;
}

std::optional<RasterInfo> inspect(std::span<const std::uint8_t> data) {
    auto decoded = decode(data);
    if (!decoded) return std::nullopt;
    return decoded->info;
}

std::optional<Rgb> first_pixel(std::span<const std::uint8_t> data) {
    auto decoded = decode(data);
    if (!decoded || decoded->info.color_type != 2 || decoded->info.bit_depth != 8 ||
        decoded->scanlines.size() < 4 || decoded->scanlines[0] != 0) {
        return std::nullopt;
    }
    return Rgb{decoded->scanlines[1], decoded->scanlines[2], decoded->scanlines[3]};
}

}  // namespace charforge::png
