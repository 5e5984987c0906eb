#include "prl/tile.hpp"

#include "prl/error.hpp"

#include <algorithm>
#include <cmath>

namespace prl {

namespace {

// RGB <-> lab route of Reinhard et al.: linear RGB -> LMS, log10, then an
// orthonormal rotation separating luminance from the two chroma axes.

constexpr double kRgb2Lms[3][3] = {
    {0.3811, 0.5783, 0.0402},
    {0.1967, 0.7244, 0.0782},
    {0.0241, 0.1288, 0.8444},
};

constexpr double kLms2Rgb[3][3] = {
    {4.4679, -3.5873, 0.1193},
    {-1.2186, 2.3809, -0.1624},
    {0.0497, -0.2439, 1.2045},
};

// Guards log10 against black pixels.
constexpr double kLmsFloor = 1e-4;

void rgb_to_lab(const std::uint8_t* px, double* lab) {
    const double r = px[0] / 255.0;
    const double g = px[1] / 255.0;
    const double b = px[2] / 255.0;
    double lms[3];
    for (int i = 0; i < 3; ++i) {
        const double v = kRgb2Lms[i][0] * r + kRgb2Lms[i][1] * g + kRgb2Lms[i][2] * b;
        lms[i] = std::log10(std::max(v, kLmsFloor));
    }
    const double s3 = 1.0 / std::sqrt(3.0);
    const double s6 = 1.0 / std::sqrt(6.0);
    const double s2 = 1.0 / std::sqrt(2.0);
    lab[0] = s3 * (lms[0] + lms[1] + lms[2]);
    lab[1] = s6 * (lms[0] + lms[1] - 2.0 * lms[2]);
    lab[2] = s2 * (lms[0] - lms[1]);
}

void lab_to_rgb(const double* lab, std::uint8_t* px) {
    const double s3 = 1.0 / std::sqrt(3.0);
    const double s6 = 1.0 / std::sqrt(6.0);
    const double s2 = 1.0 / std::sqrt(2.0);
    double log_lms[3];
    log_lms[0] = s3 * lab[0] + s6 * lab[1] + s2 * lab[2];
    log_lms[1] = s3 * lab[0] + s6 * lab[1] - s2 * lab[2];
    log_lms[2] = s3 * lab[0] - 2.0 * s6 * lab[1];
    double lms[3];
    for (int i = 0; i < 3; ++i) lms[i] = std::pow(10.0, log_lms[i]);
    for (int i = 0; i < 3; ++i) {
        const double v =
            kLms2Rgb[i][0] * lms[0] + kLms2Rgb[i][1] * lms[1] + kLms2Rgb[i][2] * lms[2];
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
    }
}

} // namespace

void StainReference::validate() const {
    for (const double s : stddev)
        if (!(s > 0.0)) throw ValidationError("stain reference: standard deviations must be > 0");
}

StainReference stain_statistics(const RasterImage& img) {
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    if (n == 0) throw ValidationError("stain statistics: empty image");
    double sum[3] = {0, 0, 0};
    double sumsq[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        double lab[3];
        rgb_to_lab(img.rgb.data() + 3 * i, lab);
        for (int c = 0; c < 3; ++c) {
            sum[c] += lab[c];
            sumsq[c] += lab[c] * lab[c];
        }
    }
    StainReference ref;
    for (int c = 0; c < 3; ++c) {
        ref.mean[c] = sum[c] / static_cast<double>(n);
        const double var = std::max(0.0, sumsq[c] / static_cast<double>(n) - ref.mean[c] * ref.mean[c]);
        ref.stddev[c] = std::sqrt(var);
    }
    return ref;
}

StainReference default_stain_reference() {
    // H&E-like palette: eosin pinks, hematoxylin purples, and a little
    // unstained glass, with mild shade ramps.
    static const std::uint8_t base[][3] = {
        {199, 21, 133}, {218, 112, 214}, {186, 85, 211}, {148, 0, 211},
        {120, 81, 169}, {219, 112, 147}, {231, 84, 128}, {244, 194, 194},
        {230, 190, 220}, {170, 110, 180}, {100, 60, 140}, {240, 230, 240},
    };
    constexpr int shades = 5;
    const int n_base = static_cast<int>(sizeof(base) / sizeof(base[0]));
    RasterImage palette = RasterImage::make(n_base, shades, 1.0);
    for (int s = 0; s < shades; ++s) {
        const double f = 0.70 + 0.075 * s;  // 0.70 .. 1.00
        for (int i = 0; i < n_base; ++i) {
            std::uint8_t* px = palette.px(i, s);
            for (int c = 0; c < 3; ++c)
                px[c] = static_cast<std::uint8_t>(std::clamp(std::lround(base[i][c] * f), 0L, 255L));
        }
    }
    StainReference ref = stain_statistics(palette);
    ref.validate();
    return ref;
}

double tissue_fraction(const RasterImage& tile, const TissueRule& rule) {
    const std::size_t n = static_cast<std::size_t>(tile.width) * tile.height;
    if (n == 0) throw ValidationError("tissue_fraction: empty tile");
    std::size_t tissue = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = tile.rgb.data() + 3 * i;
        const double r = p[0] / 255.0;
        const double g = p[1] / 255.0;
        const double b = p[2] / 255.0;
        const double luminance = 0.2126 * r + 0.7152 * g + 0.0722 * b;
        const double maxc = std::max({r, g, b});
        const double minc = std::min({r, g, b});
        const double saturation = maxc > 0.0 ? (maxc - minc) / maxc : 0.0;
        const bool background =
            luminance > rule.background_luminance && saturation < rule.background_saturation;
        if (!background) ++tissue;
    }
    return static_cast<double>(tissue) / static_cast<double>(n);
}

std::vector<std::pair<TileRecord, RasterImage>> tile_image(const RasterImage& img,
                                                           const std::string& slide_id,
                                                           int tile_px, double target_mpp) {
    if (img.rgb.size() != static_cast<std::size_t>(3) * img.width * img.height)
        throw ValidationError("tile_image: unsupported channel count");
    if (!(img.microns_per_pixel > 0.0))
        throw ValidationError("tile_image: microns_per_pixel must be positive");
    if (img.microns_per_pixel > target_mpp + 1e-12)
        throw ValidationError("tile_image: image resolution coarser than target (upsampling only "
                              "supported within a tile, not for whole slides)");

    const double scale = img.microns_per_pixel / target_mpp;
    const int new_w = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    const int new_h = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    const RasterImage resampled =
        (new_w == img.width && new_h == img.height) ? img : resample(img, new_w, new_h);

    const int cols = resampled.width / tile_px;
    const int rows = resampled.height / tile_px;
    if (cols == 0 || rows == 0)
        throw ValidationError("tile_image: image smaller than one tile after resampling");

    std::vector<std::pair<TileRecord, RasterImage>> out;
    out.reserve(static_cast<std::size_t>(cols) * rows);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            RasterImage tile = crop(resampled, c * tile_px, r * tile_px, tile_px, tile_px);
            tile.microns_per_pixel = target_mpp;
            TileRecord rec;
            rec.slide_id = slide_id;
            rec.row = r;
            rec.col = c;
            rec.tile_id = slide_id + ":" + std::to_string(r) + ":" + std::to_string(c);
            rec.tissue_fraction = tissue_fraction(tile);
            out.emplace_back(std::move(rec), std::move(tile));
        }
    }
    return out;
}

RasterImage reinhard_normalize(const RasterImage& tile, const StainReference& ref) {
    ref.validate();
    const std::size_t n = static_cast<std::size_t>(tile.width) * tile.height;
    if (n == 0) throw ValidationError("reinhard_normalize: empty tile");

    std::vector<double> lab(3 * n);
    double sum[3] = {0, 0, 0};
    double sumsq[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        rgb_to_lab(tile.rgb.data() + 3 * i, &lab[3 * i]);
        for (int c = 0; c < 3; ++c) {
            sum[c] += lab[3 * i + c];
            sumsq[c] += lab[3 * i + c] * lab[3 * i + c];
        }
    }
    double mean[3], scale[3];
    for (int c = 0; c < 3; ++c) {
        mean[c] = sum[c] / static_cast<double>(n);
        const double var = std::max(0.0, sumsq[c] / static_cast<double>(n) - mean[c] * mean[c]);
        const double sd = std::sqrt(var);
        // Degenerate channel: collapse onto the reference mean.
        scale[c] = sd > 1e-8 ? ref.stddev[c] / sd : 0.0;
    }

    RasterImage out = tile;
    for (std::size_t i = 0; i < n; ++i) {
        double mapped[3];
        for (int c = 0; c < 3; ++c)
            mapped[c] = (lab[3 * i + c] - mean[c]) * scale[c] + ref.mean[c];
        lab_to_rgb(mapped, out.rgb.data() + 3 * i);
    }
    return out;
}

} // namespace prl
