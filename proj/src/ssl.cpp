#include "prl/ssl.hpp"

#include "prl/error.hpp"
#include "prl/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace prl {

void BtLossConfig::validate() const {
    if (!(lambda > 0.0)) throw ValidationError("bt loss: lambda must be positive");
    if (!(eps > 0.0)) throw ValidationError("bt loss: eps must be positive");
}

namespace {

void check_pair(const Mat& a, const Mat& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw ValidationError("bt loss: view shapes must match");
    if (a.rows < 2)
        throw ValidationError("bt loss: batch size must be at least 2 (variance undefined)");
    for (const double v : a.v)
        if (!std::isfinite(v)) throw ValidationError("bt loss: non-finite entry in view A");
    for (const double v : b.v)
        if (!std::isfinite(v)) throw ValidationError("bt loss: non-finite entry in view B");
}

struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> inv_std;  // 1 / sqrt(var + eps)
};

ColumnStats column_stats(const Mat& z, double eps) {
    const auto& k = kernels::ops();
    ColumnStats s;
    s.mean.assign(z.cols, 0.0);
    std::vector<double> sumsq(z.cols, 0.0);
    k.col_moments_f64(z.v.data(), z.rows, z.cols, s.mean.data(), sumsq.data());
    s.inv_std.resize(z.cols);
    const double n = static_cast<double>(z.rows);
    for (std::size_t c = 0; c < z.cols; ++c) {
        s.mean[c] /= n;
        const double var = std::max(0.0, sumsq[c] / n - s.mean[c] * s.mean[c]);
        s.inv_std[c] = 1.0 / std::sqrt(var + eps);
    }
    return s;
}

Mat normalize_with(const Mat& z, const ColumnStats& s) {
    Mat out(z.rows, z.cols);
    kernels::ops().normalize_cols_f64(z.v.data(), z.rows, z.cols, s.mean.data(),
                                      s.inv_std.data(), out.v.data());
    return out;
}

} // namespace

Mat batch_normalize(const Mat& z, double eps) {
    if (z.rows < 2) throw ValidationError("batch_normalize: need at least 2 rows");
    if (!(eps > 0.0)) throw ValidationError("batch_normalize: eps must be positive");
    return normalize_with(z, column_stats(z, eps));
}

Mat cross_correlation(const Mat& z_a, const Mat& z_b, double eps) {
    check_pair(z_a, z_b);
    const Mat a = batch_normalize(z_a, eps);
    const Mat b = batch_normalize(z_b, eps);
    Mat c(a.cols, a.cols);
    kernels::ops().cross_corr_f64(a.v.data(), b.v.data(), a.rows, a.cols, c.v.data());
    const double inv_n = 1.0 / static_cast<double>(a.rows);
    for (double& v : c.v) v *= inv_n;
    return c;
}

BtLoss barlow_twins_loss(const Mat& c, const BtLossConfig& cfg) {
    cfg.validate();
    if (c.rows != c.cols) throw ValidationError("barlow_twins_loss: C must be square");
    BtLoss out;
    for (std::size_t i = 0; i < c.rows; ++i) {
        for (std::size_t j = 0; j < c.cols; ++j) {
            const double v = c.at(i, j);
            if (i == j) {
                out.invariance += (1.0 - v) * (1.0 - v);
            } else {
                out.redundancy += v * v;
            }
        }
    }
    out.loss = out.invariance + cfg.lambda * out.redundancy;
    return out;
}

BtLoss bt_loss_forward(const Mat& z_a, const Mat& z_b, const BtLossConfig& cfg) {
    return barlow_twins_loss(cross_correlation(z_a, z_b, cfg.eps), cfg);
}

BtGradient bt_loss_gradient(const Mat& z_a, const Mat& z_b, const BtLossConfig& cfg) {
    cfg.validate();
    check_pair(z_a, z_b);
    const auto& k = kernels::ops();
    const std::size_t n = z_a.rows;
    const std::size_t d = z_a.cols;
    const double inv_n = 1.0 / static_cast<double>(n);

    const ColumnStats sa = column_stats(z_a, cfg.eps);
    const ColumnStats sb = column_stats(z_b, cfg.eps);
    const Mat a = normalize_with(z_a, sa);
    const Mat b = normalize_with(z_b, sb);

    Mat c(d, d);
    k.cross_corr_f64(a.v.data(), b.v.data(), n, d, c.v.data());
    for (double& v : c.v) v *= inv_n;

    // dL/dC
    Mat g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            g.at(i, j) = i == j ? -2.0 * (1.0 - c.at(i, j)) : 2.0 * cfg.lambda * c.at(i, j);

    // dL/d(normalized A) = B G^T / N ; dL/d(normalized B) = A G / N
    Mat da(n, d), db(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        const double* br = b.row(r);
        const double* ar = a.row(r);
        double* dar = da.row(r);
        double* dbr = db.row(r);
        for (std::size_t i = 0; i < d; ++i) {
            // row i of G against br; column i of G against ar
            dar[i] = k.dot_f64(g.row(i), br, d) * inv_n;
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += ar[j] * g.at(j, i);
            dbr[i] = acc * inv_n;
        }
    }

    // Batch-normalization backward per column:
    // dL/dx = inv_std * (g - mean(g) - xhat * mean(g * xhat))
    auto bn_backward = [&](const Mat& xhat, const ColumnStats& s, Mat& grad) {
        std::vector<double> mean_g(d, 0.0), mean_gx(d, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const double* gr = grad.row(r);
            const double* xr = xhat.row(r);
            for (std::size_t col = 0; col < d; ++col) {
                mean_g[col] += gr[col];
                mean_gx[col] += gr[col] * xr[col];
            }
        }
        for (std::size_t col = 0; col < d; ++col) {
            mean_g[col] *= inv_n;
            mean_gx[col] *= inv_n;
        }
        for (std::size_t r = 0; r < n; ++r) {
            double* gr = grad.row(r);
            const double* xr = xhat.row(r);
            for (std::size_t col = 0; col < d; ++col)
                gr[col] = s.inv_std[col] * (gr[col] - mean_g[col] - xr[col] * mean_gx[col]);
        }
    };
    bn_backward(a, sa, da);
    bn_backward(b, sb, db);

    return {std::move(da), std::move(db)};
}

// ---------------------------------------------------------------------------
// Distortions
// ---------------------------------------------------------------------------

void DistortionSpec::validate() const {
    if (!(zoom_lo <= 1.0 && 1.0 <= zoom_hi))
        throw ValidationError("distortion: zoom range must contain 1.0");
    if (p_hflip < 0.0 || p_hflip > 1.0 || p_vflip < 0.0 || p_vflip > 1.0)
        throw ValidationError("distortion: flip probabilities must lie in [0,1]");
    if (!(zoom_lo > 0.0)) throw ValidationError("distortion: zoom must be positive");
    if (output_px <= 0) throw ValidationError("distortion: output size must be positive");
}

DistortionSpec DistortionSpec::identity() {
    DistortionSpec s;
    s.zoom_lo = s.zoom_hi = 1.0;
    s.brightness_lo = s.brightness_hi = 1.0;
    s.contrast_lo = s.contrast_hi = 1.0;
    s.saturation_lo = s.saturation_hi = 1.0;
    s.hue_delta_max = 0.0;
    s.p_hflip = s.p_vflip = 0.0;
    return s;
}

namespace {

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void apply_brightness(RasterImage& img, double factor) {
    if (factor == 1.0) return;
    for (auto& v : img.rgb) v = clamp_u8(v * factor);
}

void apply_contrast(RasterImage& img, double factor) {
    if (factor == 1.0) return;
    double mean = 0.0;
    for (const auto v : img.rgb) mean += v;
    mean /= static_cast<double>(img.rgb.size());
    for (auto& v : img.rgb) v = clamp_u8(mean + factor * (v - mean));
}

void apply_saturation(RasterImage& img, double factor) {
    if (factor == 1.0) return;
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t* p = img.rgb.data() + 3 * i;
        const double gray = 0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2];
        for (int c = 0; c < 3; ++c) p[c] = clamp_u8(gray + factor * (p[c] - gray));
    }
}

// Hue rotation about the RGB gray axis.
void apply_hue(RasterImage& img, double degrees) {
    if (degrees == 0.0) return;
    const double rad = degrees * 3.14159265358979323846 / 180.0;
    const double cos_a = std::cos(rad);
    const double sin_a = std::sin(rad);
    const double one_third = 1.0 / 3.0;
    const double rt3 = std::sqrt(1.0 / 3.0);
    double m[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double base = one_third * (1.0 - cos_a);
            m[i][j] = base + (i == j ? cos_a : 0.0);
        }
    m[0][1] += -rt3 * sin_a;
    m[0][2] += rt3 * sin_a;
    m[1][0] += rt3 * sin_a;
    m[1][2] += -rt3 * sin_a;
    m[2][0] += -rt3 * sin_a;
    m[2][1] += rt3 * sin_a;
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t* p = img.rgb.data() + 3 * i;
        const double r = p[0], g = p[1], b = p[2];
        p[0] = clamp_u8(m[0][0] * r + m[0][1] * g + m[0][2] * b);
        p[1] = clamp_u8(m[1][0] * r + m[1][1] * g + m[1][2] * b);
        p[2] = clamp_u8(m[2][0] * r + m[2][1] * g + m[2][2] * b);
    }
}

RasterImage sample_view(const RasterImage& tile, const DistortionSpec& spec, Rng& rng) {
    const double zoom = rng.uniform(spec.zoom_lo, spec.zoom_hi);
    const int max_side = std::min(tile.width, tile.height);
    int side = static_cast<int>(std::lround(spec.output_px / zoom));
    side = std::clamp(side, 1, max_side);
    int ox = 0, oy = 0;
    if (side < tile.width) ox = static_cast<int>(rng.index(tile.width - side + 1));
    if (side < tile.height) oy = static_cast<int>(rng.index(tile.height - side + 1));

    RasterImage view = (side == tile.width && side == tile.height)
                           ? tile
                           : crop(tile, ox, oy, side, side);
    view = resample(view, spec.output_px, spec.output_px);

    if (rng.bernoulli(spec.p_hflip)) view = flip_horizontal(view);
    if (rng.bernoulli(spec.p_vflip)) view = flip_vertical(view);

    apply_brightness(view, rng.uniform(spec.brightness_lo, spec.brightness_hi));
    apply_contrast(view, rng.uniform(spec.contrast_lo, spec.contrast_hi));
    apply_saturation(view, rng.uniform(spec.saturation_lo, spec.saturation_hi));
    apply_hue(view, spec.hue_delta_max == 0.0
                        ? 0.0
                        : rng.uniform(-spec.hue_delta_max, spec.hue_delta_max));
    return view;
}

} // namespace

std::pair<RasterImage, RasterImage> apply_distortions(const RasterImage& tile,
                                                      const DistortionSpec& spec, Rng& rng) {
    spec.validate();
    if (tile.rgb.size() != static_cast<std::size_t>(3) * tile.width * tile.height)
        throw ValidationError("apply_distortions: not an RGB tile");
    RasterImage a = sample_view(tile, spec, rng);
    RasterImage b = sample_view(tile, spec, rng);
    return {std::move(a), std::move(b)};
}

void VectorDistortionSpec::validate() const {
    if (!(scale_lo <= 1.0 && 1.0 <= scale_hi))
        throw ValidationError("vector distortion: scale range must contain 1.0");
    if (noise_sigma < 0.0)
        throw ValidationError("vector distortion: noise sigma must be non-negative");
}

std::vector<double> distort_vector(const double* x, std::size_t dim,
                                   const VectorDistortionSpec& spec, Rng& rng) {
    const double s = rng.uniform(spec.scale_lo, spec.scale_hi);
    std::vector<double> out(dim);
    for (std::size_t i = 0; i < dim; ++i)
        out[i] = s * x[i] + (spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Toy encoder
// ---------------------------------------------------------------------------

ToyEncoder ToyEncoder::init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                            Rng& rng) {
    ToyEncoder e;
    e.in_dim = in_dim;
    e.hidden = hidden;
    e.out_dim = out_dim;
    e.w1.resize(hidden * in_dim);
    e.b1.assign(hidden, 0.0);
    e.w2.resize(out_dim * hidden);
    e.b2.assign(out_dim, 0.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& w : e.w1) w = s1 * rng.normal();
    for (auto& w : e.w2) w = s2 * rng.normal();
    return e;
}

Mat ToyEncoder::project(const Mat& x) const {
    if (x.cols != in_dim) throw ValidationError("encoder: input dimension mismatch");
    const auto& k = kernels::ops();
    Mat z(x.rows, out_dim);
    std::vector<double> h(hidden);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        for (std::size_t j = 0; j < hidden; ++j)
            h[j] = std::tanh(k.dot_f64(&w1[j * in_dim], xr, in_dim) + b1[j]);
        double* zr = z.row(r);
        for (std::size_t o = 0; o < out_dim; ++o)
            zr[o] = k.dot_f64(&w2[o * hidden], h.data(), hidden) + b2[o];
    }
    return z;
}

namespace {

struct BatchCache {
    Mat x;        // raw inputs for this view
    Mat h;        // tanh activations
    Mat z;        // outputs
};

BatchCache forward_batch(const ToyEncoder& e, Mat x) {
    const auto& k = kernels::ops();
    BatchCache c;
    c.h = Mat(x.rows, e.hidden);
    c.z = Mat(x.rows, e.out_dim);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double* hr = c.h.row(r);
        for (std::size_t j = 0; j < e.hidden; ++j)
            hr[j] = std::tanh(k.dot_f64(&e.w1[j * e.in_dim], xr, e.in_dim) + e.b1[j]);
        double* zr = c.z.row(r);
        for (std::size_t o = 0; o < e.out_dim; ++o)
            zr[o] = k.dot_f64(&e.w2[o * e.hidden], hr, e.hidden) + e.b2[o];
    }
    c.x = std::move(x);
    return c;
}

// Accumulate parameter gradients for one view given dL/dz.
void backward_batch(const ToyEncoder& e, const BatchCache& c, const Mat& dz,
                    std::vector<double>& gw1, std::vector<double>& gb1,
                    std::vector<double>& gw2, std::vector<double>& gb2) {
    const auto& k = kernels::ops();
    std::vector<double> dh(e.hidden);
    for (std::size_t r = 0; r < c.x.rows; ++r) {
        const double* hr = c.h.row(r);
        const double* xr = c.x.row(r);
        const double* dzr = dz.row(r);
        for (std::size_t o = 0; o < e.out_dim; ++o) {
            k.axpy_f64(&gw2[o * e.hidden], dzr[o], hr, e.hidden);
            gb2[o] += dzr[o];
        }
        for (std::size_t j = 0; j < e.hidden; ++j) {
            double acc = 0.0;
            for (std::size_t o = 0; o < e.out_dim; ++o) acc += dzr[o] * e.w2[o * e.hidden + j];
            dh[j] = acc * (1.0 - hr[j] * hr[j]);
        }
        for (std::size_t j = 0; j < e.hidden; ++j) {
            k.axpy_f64(&gw1[j * e.in_dim], dh[j], xr, e.in_dim);
            gb1[j] += dh[j];
        }
    }
}

} // namespace

ToyTrainResult train_toy_encoder(const Mat& data, std::size_t out_dim,
                                 const ToyTrainConfig& cfg) {
    cfg.loss.validate();
    cfg.distortion.validate();
    if (cfg.batch_size < 2)
        throw ValidationError("train_toy_encoder: batch size must be at least 2");
    if (data.rows < 2 * static_cast<std::size_t>(cfg.batch_size))
        throw ValidationError("train_toy_encoder: dataset must hold at least two batches");
    if (cfg.epochs < 0) throw ValidationError("train_toy_encoder: negative epoch count");

    Rng rng(cfg.seed);
    ToyTrainResult result;
    result.encoder = ToyEncoder::init(data.cols, cfg.hidden, out_dim, rng);
    ToyEncoder& enc = result.encoder;

    std::vector<std::size_t> order(data.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start + bs <= data.rows; start += bs) {
            Mat xa(bs, data.cols), xb(bs, data.cols);
            for (std::size_t i = 0; i < bs; ++i) {
                const double* src = data.row(order[start + i]);
                const auto va = distort_vector(src, data.cols, cfg.distortion, rng);
                const auto vb = distort_vector(src, data.cols, cfg.distortion, rng);
                std::copy(va.begin(), va.end(), xa.row(i));
                std::copy(vb.begin(), vb.end(), xb.row(i));
            }
            BatchCache ca = forward_batch(enc, std::move(xa));
            BatchCache cb = forward_batch(enc, std::move(xb));
            const BtLoss l = bt_loss_forward(ca.z, cb.z, cfg.loss);
            if (!std::isfinite(l.loss))
                throw NumericError("train_toy_encoder: loss diverged at epoch " +
                                   std::to_string(epoch) + ", batch " + std::to_string(batches));
            epoch_loss += l.loss;
            ++batches;

            const BtGradient g = bt_loss_gradient(ca.z, cb.z, cfg.loss);
            std::vector<double> gw1(enc.w1.size(), 0.0), gb1(enc.b1.size(), 0.0);
            std::vector<double> gw2(enc.w2.size(), 0.0), gb2(enc.b2.size(), 0.0);
            backward_batch(enc, ca, g.d_za, gw1, gb1, gw2, gb2);
            backward_batch(enc, cb, g.d_zb, gw1, gb1, gw2, gb2);

            const double step = cfg.learning_rate;
            for (std::size_t i = 0; i < enc.w1.size(); ++i) enc.w1[i] -= step * gw1[i];
            for (std::size_t i = 0; i < enc.b1.size(); ++i) enc.b1[i] -= step * gb1[i];
            for (std::size_t i = 0; i < enc.w2.size(); ++i) enc.w2[i] -= step * gw2[i];
            for (std::size_t i = 0; i < enc.b2.size(); ++i) enc.b2[i] -= step * gb2[i];
        }
        result.loss_trace.push_back(batches ? epoch_loss / static_cast<double>(batches) : 0.0);
    }
    return result;
}

} // namespace prl
