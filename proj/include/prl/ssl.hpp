#pragma once

#include "prl/image.hpp"
#include "prl/rng.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace prl {

// Small dense row-major double matrix used by the twin-view loss and the
// desk-scale encoder.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
    double* row(std::size_t r) { return v.data() + r * cols; }
    const double* row(std::size_t r) const { return v.data() + r * cols; }
};

struct BtLossConfig {
    double lambda = 0.005;  // off-diagonal weight
    double eps = 1e-5;      // variance guard in the per-feature normalization

    void validate() const;
};

// Per-feature batch normalization: zero mean, unit variance (biased), with
// the eps guard inside the square root. Requires at least two rows.
Mat batch_normalize(const Mat& z, double eps);

// Cross-correlation of the two normalized views: C = norm(Z_a)^T norm(Z_b) / N.
Mat cross_correlation(const Mat& z_a, const Mat& z_b, double eps = 1e-5);

struct BtLoss {
    double loss = 0.0;
    double invariance = 0.0;  // sum_i (1 - C_ii)^2
    double redundancy = 0.0;  // sum_{i != j} C_ij^2
};

BtLoss barlow_twins_loss(const Mat& c, const BtLossConfig& cfg);

// Loss evaluated from raw (pre-normalization) views.
BtLoss bt_loss_forward(const Mat& z_a, const Mat& z_b, const BtLossConfig& cfg);

struct BtGradient {
    Mat d_za;
    Mat d_zb;
};

// Analytic gradient of the scalar loss w.r.t. the raw views, including the
// batch-normalization backward pass.
BtGradient bt_loss_gradient(const Mat& z_a, const Mat& z_b, const BtLossConfig& cfg);

// ---------------------------------------------------------------------------
// Distortions
// ---------------------------------------------------------------------------

struct DistortionSpec {
    double zoom_lo = 0.9, zoom_hi = 1.1;
    double brightness_lo = 0.9, brightness_hi = 1.1;
    double contrast_lo = 0.9, contrast_hi = 1.1;
    double saturation_lo = 0.9, saturation_hi = 1.1;
    double hue_delta_max = 10.0;  // degrees, sampled in [-max, max]
    double p_hflip = 0.5;
    double p_vflip = 0.5;
    int output_px = 224;

    void validate() const;
    static DistortionSpec identity();
};

// Two independently sampled distorted views, both output_px x output_px.
std::pair<RasterImage, RasterImage> apply_distortions(const RasterImage& tile,
                                                      const DistortionSpec& spec, Rng& rng);

// Vector analogue used when training over raw vectors: per-sample scale
// jitter plus additive Gaussian noise.
struct VectorDistortionSpec {
    double scale_lo = 0.9, scale_hi = 1.1;
    double noise_sigma = 0.1;

    void validate() const;
};

std::vector<double> distort_vector(const double* x, std::size_t dim,
                                   const VectorDistortionSpec& spec, Rng& rng);

// ---------------------------------------------------------------------------
// Desk-scale encoder
// ---------------------------------------------------------------------------

// Two-layer perceptron z = W2 tanh(W1 x + b1) + b2, trained with plain
// fixed-step gradient descent. Exists to exercise the loss at desk scale and
// to produce embeddings for pipeline tests; real deployments inject
// embeddings through the ingest module.
struct ToyEncoder {
    std::size_t in_dim = 0, hidden = 0, out_dim = 0;
    std::vector<double> w1, b1, w2, b2;  // w1: hidden x in, w2: out x hidden

    static ToyEncoder init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, Rng& rng);
    Mat project(const Mat& x) const;
};

struct ToyTrainConfig {
    int epochs = 60;
    int batch_size = 64;
    double learning_rate = 0.05;
    std::size_t hidden = 32;
    BtLossConfig loss;
    VectorDistortionSpec distortion;
    std::uint64_t seed = 0;
};

struct ToyTrainResult {
    ToyEncoder encoder;
    std::vector<double> loss_trace;  // mean batch loss per epoch
};

ToyTrainResult train_toy_encoder(const Mat& data, std::size_t out_dim, const ToyTrainConfig& cfg);

} // namespace prl
