#pragma once

#include "charforge/util.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace charforge::png {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct RasterInfo {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint8_t bit_depth = 0;
    std::uint8_t color_type = 0;
};

/// 8-bit RGB, non-interlaced PNG filled with a single color.
Bytes encode_solid(std::uint32_t width, std::uint32_t height, Rgb color);

/// Full structural decode: signature, chunk CRCs, IHDR, and an IDAT stream that
/// inflates to exactly the scanline bytes implied by IHDR. nullopt if anything fails.
std::optional<RasterInfo> inspect(std::span<const std::uint8_t> data);

/// Color of pixel (0, 0) for 8-bit RGB images produced by encode_solid.
std::optional<Rgb> first_pixel(std::span<const std::uint8_t> data);

}  // namespace charforge::png
