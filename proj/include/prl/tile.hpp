#pragma once

#include "prl/image.hpp"
#include "prl/ingest.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace prl {

// Per-channel mean and standard deviation in the log-LMS-derived perceptual
// space used by the color transfer.
struct StainReference {
    std::array<double, 3> mean{};
    std::array<double, 3> stddev{};

    void validate() const;
};

// Reference statistics from a small built-in H&E-like palette; overridable
// via config or a user-supplied reference image.
StainReference default_stain_reference();

// Compute reference statistics from an image.
StainReference stain_statistics(const RasterImage& img);

// Background rule: luminance above `background_luminance` with saturation
// below `background_saturation` counts as glass/background.
struct TissueRule {
    double background_luminance = 0.86;
    double background_saturation = 0.08;
};

// Fraction of pixels classified as tissue.
double tissue_fraction(const RasterImage& tile, const TissueRule& rule = {});

// Non-overlapping fixed-size tiles at the target physical resolution.
// The image is resampled so a pixel spans `target_mpp` microns, then cut
// into a grid; partial border tiles are discarded.
std::vector<std::pair<TileRecord, RasterImage>> tile_image(const RasterImage& img,
                                                           const std::string& slide_id,
                                                           int tile_px = 224,
                                                           double target_mpp = 2.016);

// Color transfer: match per-channel mean/std in the perceptual space to the
// reference. Channels with zero variance are shifted to the reference mean.
RasterImage reinhard_normalize(const RasterImage& tile, const StainReference& ref);

} // namespace prl
