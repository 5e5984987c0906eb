#include "prl/image.hpp"

#include "prl/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace prl {

RasterImage RasterImage::make(int w, int h, double mpp,
                              std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (w <= 0 || h <= 0) throw ValidationError("image: dimensions must be positive");
    if (!(mpp > 0.0)) throw ValidationError("image: microns_per_pixel must be positive");
    RasterImage img;
    img.width = w;
    img.height = h;
    img.microns_per_pixel = mpp;
    img.rgb.resize(static_cast<std::size_t>(3) * w * h);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

} // namespace

RasterImage read_png(const std::string& path, double microns_per_pixel) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open '" + path + "'");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png: failed to decode '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    // Normalize everything to 8-bit RGB.
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    RasterImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.microns_per_pixel = microns_per_pixel;
    img.rgb.resize(static_cast<std::size_t>(3) * w * h);

    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.rgb.data() + static_cast<std::size_t>(3) * w * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::string& path, const RasterImage& img) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write '" + path + "'");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png: failed to encode '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_const_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = img.rgb.data() + static_cast<std::size_t>(3) * img.width * y;
    png_write_image(png, const_cast<png_bytepp>(reinterpret_cast<png_const_bytepp>(rows.data())));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RasterImage resample(const RasterImage& img, int new_width, int new_height) {
    if (new_width <= 0 || new_height <= 0)
        throw ValidationError("resample: target dimensions must be positive");
    if (new_width == img.width && new_height == img.height) return img;

    RasterImage out;
    out.width = new_width;
    out.height = new_height;
    out.microns_per_pixel = img.microns_per_pixel * static_cast<double>(img.width) / new_width;
    out.rgb.resize(static_cast<std::size_t>(3) * new_width * new_height);

    const bool downsample = new_width <= img.width && new_height <= img.height;
    if (downsample) {
        // Box filter: average the exact source-pixel coverage of each
        // destination pixel.
        const double sx = static_cast<double>(img.width) / new_width;
        const double sy = static_cast<double>(img.height) / new_height;
        for (int y = 0; y < new_height; ++y) {
            const double y0 = y * sy;
            const double y1 = (y + 1) * sy;
            for (int x = 0; x < new_width; ++x) {
                const double x0 = x * sx;
                const double x1 = (x + 1) * sx;
                double acc[3] = {0, 0, 0};
                double area = 0.0;
                const int iy0 = static_cast<int>(std::floor(y0));
                const int iy1 = std::min(img.height, static_cast<int>(std::ceil(y1)));
                const int ix0 = static_cast<int>(std::floor(x0));
                const int ix1 = std::min(img.width, static_cast<int>(std::ceil(x1)));
                for (int sy_i = iy0; sy_i < iy1; ++sy_i) {
                    const double hy = std::min<double>(y1, sy_i + 1) - std::max<double>(y0, sy_i);
                    for (int sx_i = ix0; sx_i < ix1; ++sx_i) {
                        const double wx = std::min<double>(x1, sx_i + 1) - std::max<double>(x0, sx_i);
                        const double w = hy * wx;
                        const std::uint8_t* p = img.px(sx_i, sy_i);
                        acc[0] += w * p[0];
                        acc[1] += w * p[1];
                        acc[2] += w * p[2];
                        area += w;
                    }
                }
                std::uint8_t* q = out.px(x, y);
                for (int c = 0; c < 3; ++c)
                    q[c] = static_cast<std::uint8_t>(
                        std::clamp(std::lround(acc[c] / area), 0L, 255L));
            }
        }
    } else {
        // Bilinear for (minor) upsampling.
        const double sx = static_cast<double>(img.width) / new_width;
        const double sy = static_cast<double>(img.height) / new_height;
        for (int y = 0; y < new_height; ++y) {
            const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
            const int y0 = std::min(img.height - 1, static_cast<int>(fy));
            const int y1 = std::min(img.height - 1, y0 + 1);
            const double ty = fy - y0;
            for (int x = 0; x < new_width; ++x) {
                const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
                const int x0 = std::min(img.width - 1, static_cast<int>(fx));
                const int x1 = std::min(img.width - 1, x0 + 1);
                const double tx = fx - x0;
                std::uint8_t* q = out.px(x, y);
                for (int c = 0; c < 3; ++c) {
                    const double v00 = img.px(x0, y0)[c];
                    const double v10 = img.px(x1, y0)[c];
                    const double v01 = img.px(x0, y1)[c];
                    const double v11 = img.px(x1, y1)[c];
                    const double v = (1 - ty) * ((1 - tx) * v00 + tx * v10) +
                                     ty * ((1 - tx) * v01 + tx * v11);
                    q[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }
    }
    return out;
}

RasterImage crop(const RasterImage& img, int x, int y, int w, int h) {
    if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > img.width || y + h > img.height)
        throw ValidationError("crop: rectangle out of bounds");
    RasterImage out;
    out.width = w;
    out.height = h;
    out.microns_per_pixel = img.microns_per_pixel;
    out.rgb.resize(static_cast<std::size_t>(3) * w * h);
    for (int row = 0; row < h; ++row)
        std::copy_n(img.px(x, y + row), static_cast<std::size_t>(3) * w, out.px(0, row));
    return out;
}

RasterImage flip_horizontal(const RasterImage& img) {
    RasterImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            std::copy_n(img.px(img.width - 1 - x, y), 3, out.px(x, y));
    return out;
}

RasterImage flip_vertical(const RasterImage& img) {
    RasterImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            std::copy_n(img.px(x, img.height - 1 - y), 3, out.px(x, y));
    return out;
}

RasterImage rotate90(const RasterImage& img) {
    RasterImage out;
    out.width = img.height;
    out.height = img.width;
    out.microns_per_pixel = img.microns_per_pixel;
    out.rgb.resize(img.rgb.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            std::copy_n(img.px(x, y), 3, out.px(img.height - 1 - y, x));
    return out;
}

} // namespace prl
