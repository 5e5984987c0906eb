#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prl {

// 8-bit RGB raster with physical resolution metadata.
struct RasterImage {
    int width = 0;
    int height = 0;
    double microns_per_pixel = 1.0;
    std::vector<std::uint8_t> rgb;  // 3 * width * height, row-major

    static RasterImage make(int w, int h, double mpp,
                            std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0);

    const std::uint8_t* px(int x, int y) const { return rgb.data() + 3 * (y * width + x); }
    std::uint8_t* px(int x, int y) { return rgb.data() + 3 * (y * width + x); }
    bool same_pixels(const RasterImage& other) const {
        return width == other.width && height == other.height && rgb == other.rgb;
    }
};

RasterImage read_png(const std::string& path, double microns_per_pixel);
void write_png(const std::string& path, const RasterImage& img);

// Area-averaging for downsampling, bilinear for upsampling. Identity when
// the size is unchanged.
RasterImage resample(const RasterImage& img, int new_width, int new_height);

RasterImage crop(const RasterImage& img, int x, int y, int w, int h);
RasterImage flip_horizontal(const RasterImage& img);
RasterImage flip_vertical(const RasterImage& img);
RasterImage rotate90(const RasterImage& img);

} // namespace prl
