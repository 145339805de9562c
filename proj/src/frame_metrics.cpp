#include "world4d/frame_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace world4d {

namespace {

double lower_median(std::vector<double> v) {
    const std::size_t k = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

}  // namespace

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           const DepthEvalConfig& cfg) {
    if (!pred.values.same_shape(gt.values))
        throw InvalidInputError("depth_metrics: shape mismatch");
    if (!(cfg.delta_base > 1.0))
        throw InvalidInputError("depth_metrics: delta_base must be > 1");

    std::vector<double> ps, gs;
    for (int v = 0; v < pred.height(); ++v)
        for (int u = 0; u < pred.width(); ++u)
            if (pred.valid(u, v) && gt.valid(u, v)) {
                ps.push_back(pred.values(u, v));
                gs.push_back(gt.values(u, v));
            }
    if (ps.empty()) throw EmptySetError("depth_metrics: joint valid region is empty");
    for (double g : gs)
        if (g == 0.0) throw InvalidInputError("depth_metrics: gt contains zeros");

    double scale = 1.0;
    if (cfg.alignment == DepthAlignment::median_scaled)
        scale = lower_median(gs) / lower_median(ps);

    const double t1 = cfg.delta_base;
    const double t2 = t1 * cfg.delta_base;
    const double t3 = t2 * cfg.delta_base;
    double absrel_sum = 0.0, sq_sum = 0.0;
    std::size_t n1 = 0, n2 = 0, n3 = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double p = ps[i] * scale;
        const double g = gs[i];
        absrel_sum += std::abs(p - g) / g;
        sq_sum += (p - g) * (p - g);
        const double ratio = std::max(p / g, g / p);
        n1 += ratio < t1;
        n2 += ratio < t2;
        n3 += ratio < t3;
    }
    const double n = static_cast<double>(ps.size());
    DepthMetrics m;
    m.absrel = absrel_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    m.delta1 = 100.0 * static_cast<double>(n1) / n;
    m.delta2 = 100.0 * static_cast<double>(n2) / n;
    m.delta3 = 100.0 * static_cast<double>(n3) / n;
    return m;
}

FlowMetrics flow_metrics(const FlowField& pred, const FlowField& gt) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw InvalidInputError("flow_metrics: shape mismatch");
    double epe_sum = 0.0;
    std::size_t count = 0, fl_all = 0, out_1px = 0;
    for (int v = 0; v < pred.height(); ++v)
        for (int u = 0; u < pred.width(); ++u) {
            if (!pred.valid(u, v) || !gt.valid(u, v)) continue;
            const double eu = pred.du(u, v) - gt.du(u, v);
            const double ev = pred.dv(u, v) - gt.dv(u, v);
            const double epe = std::hypot(eu, ev);
            const double mag = std::hypot(gt.du(u, v), gt.dv(u, v));
            epe_sum += epe;
            fl_all += (epe > 3.0 && epe > 0.05 * mag);
            out_1px += (epe > 1.0);
            ++count;
        }
    if (count == 0) throw EmptySetError("flow_metrics: joint valid region is empty");
    FlowMetrics m;
    m.epe = epe_sum / static_cast<double>(count);
    m.fl_all_pct = 100.0 * static_cast<double>(fl_all) / static_cast<double>(count);
    m.out_1px_pct = 100.0 * static_cast<double>(out_1px) / static_cast<double>(count);
    return m;
}

Raster<double> luma_bt601(const RgbFrame& frame) {
    Raster<double> y(frame.width(), frame.height(), 0.0);
    for (int v = 0; v < frame.height(); ++v)
        for (int u = 0; u < frame.width(); ++u)
            y(u, v) = 0.299 * frame.r(u, v) + 0.587 * frame.g(u, v) + 0.114 * frame.b(u, v);
    return y;
}

Raster<double> gaussian_blur(const Raster<double>& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const int w = img.width(), h = img.height();
    Raster<double> tmp(w, h, 0.0), out(w, h, 0.0);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * img(std::clamp(u + i, 0, w - 1), v);
            tmp(u, v) = acc;
        }
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp(u, std::clamp(v + i, 0, h - 1));
            out(u, v) = acc;
        }
    return out;
}

namespace {

// Gaussian-weighted SSIM over pixels whose full window lies inside the frame.
double ssim_frame(const Raster<double>& a, const Raster<double>& b) {
    constexpr int kRadius = 5;  // 11x11 window
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    static const std::vector<double> kernel = [] {
        std::vector<double> k(2 * kRadius + 1);
        double s = 0.0;
        for (int i = -kRadius; i <= kRadius; ++i) {
            k[i + kRadius] = std::exp(-0.5 * (i * i) / (kSigma * kSigma));
            s += k[i + kRadius];
        }
        for (double& x : k) x /= s;
        return k;
    }();

    const int w = a.width(), h = a.height();
    if (w < 2 * kRadius + 1 || h < 2 * kRadius + 1)
        throw InvalidInputError("ssim: frame smaller than the 11x11 window");
    double total = 0.0;
    std::size_t count = 0;
    for (int v = kRadius; v < h - kRadius; ++v) {
        for (int u = kRadius; u < w - kRadius; ++u) {
            double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
            for (int j = -kRadius; j <= kRadius; ++j)
                for (int i = -kRadius; i <= kRadius; ++i) {
                    const double wgt = kernel[i + kRadius] * kernel[j + kRadius];
                    const double xa = a(u + i, v + j);
                    const double xb = b(u + i, v + j);
                    mu_a += wgt * xa;
                    mu_b += wgt * xb;
                    aa += wgt * xa * xa;
                    bb += wgt * xb * xb;
                    ab += wgt * xa * xb;
                }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2)) /
                     ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

}  // namespace

PixelMetrics pixel_metrics(std::span<const RgbFrame> pred, std::span<const RgbFrame> gt) {
    if (pred.size() != gt.size())
        throw InvalidInputError("pixel_metrics: sequence length mismatch");
    if (pred.empty()) throw EmptySetError("pixel_metrics: empty sequences");

    double sq_sum = 0.0;
    std::size_t n = 0;
    double ssim_sum = 0.0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
        const RgbFrame& p = pred[t];
        const RgbFrame& g = gt[t];
        if (!p.r.same_shape(g.r)) throw InvalidInputError("pixel_metrics: shape mismatch");
        const Raster<double>* pc[3] = {&p.r, &p.g, &p.b};
        const Raster<double>* gc[3] = {&g.r, &g.g, &g.b};
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < pc[c]->data().size(); ++i) {
                const double d = pc[c]->data()[i] - gc[c]->data()[i];
                sq_sum += d * d;
                ++n;
            }
        ssim_sum += ssim_frame(luma_bt601(p), luma_bt601(g));
    }

    PixelMetrics m;
    m.mse = sq_sum / static_cast<double>(n);
    m.psnr = m.mse == 0.0 ? std::numeric_limits<double>::infinity()
                          : 10.0 * std::log10(1.0 / m.mse);
    m.ssim = ssim_sum / static_cast<double>(pred.size());
    return m;
}

namespace {

Mask motion_mask(const Raster<double>& luma_t, const Raster<double>& luma_0,
                 const MotionMaskConfig& cfg) {
    Raster<double> diff(luma_t.width(), luma_t.height(), 0.0);
    for (std::size_t i = 0; i < diff.data().size(); ++i)
        diff.data()[i] = std::abs(luma_t.data()[i] - luma_0.data()[i]);
    const Raster<double> smoothed = gaussian_blur(diff, cfg.smoothing_radius);
    Mask m(diff.width(), diff.height(), 0);
    for (std::size_t i = 0; i < m.data().size(); ++i)
        m.data()[i] = smoothed.data()[i] > cfg.diff_threshold;
    return m;
}

}  // namespace

PhysicsIqScores physicsiq_scores(std::span<const RgbFrame> pred,
                                 std::span<const RgbFrame> gt,
                                 const MotionMaskConfig& cfg) {
    if (!(cfg.diff_threshold > 0.0 && cfg.diff_threshold < 1.0))
        throw InvalidInputError("physicsiq: diff_threshold must be in (0, 1)");
    if (cfg.smoothing_radius < 0.0)
        throw InvalidInputError("physicsiq: smoothing_radius must be >= 0");
    if (pred.size() != gt.size()) throw InvalidInputError("physicsiq: length mismatch");
    if (pred.size() < 2) throw InvalidInputError("physicsiq: need at least 2 frames");

    PhysicsIqScores scores;
    scores.mse = pixel_metrics(pred, gt).mse;

    const Raster<double> luma_p0 = luma_bt601(pred[0]);
    const Raster<double> luma_g0 = luma_bt601(gt[0]);
    const int w = luma_p0.width(), h = luma_p0.height();
    Mask union_p(w, h, 0), union_g(w, h, 0);
    Raster<double> freq_p(w, h, 0.0), freq_g(w, h, 0.0);
    double frame_iou_sum = 0.0;
    std::size_t frame_iou_count = 0;

    const std::size_t motion_frames = pred.size() - 1;
    for (std::size_t t = 1; t < pred.size(); ++t) {
        const Mask mp = motion_mask(luma_bt601(pred[t]), luma_p0, cfg);
        const Mask mg = motion_mask(luma_bt601(gt[t]), luma_g0, cfg);
        std::size_t inter = 0, uni = 0;
        for (std::size_t i = 0; i < mp.data().size(); ++i) {
            const bool bp = mp.data()[i], bg = mg.data()[i];
            union_p.data()[i] |= bp;
            union_g.data()[i] |= bg;
            freq_p.data()[i] += bp;
            freq_g.data()[i] += bg;
            inter += (bp && bg);
            uni += (bp || bg);
        }
        if (uni > 0) {
            frame_iou_sum += static_cast<double>(inter) / static_cast<double>(uni);
            ++frame_iou_count;
        }
    }

    std::size_t inter = 0, uni = 0;
    double wsum_min = 0.0, wsum_max = 0.0;
    for (std::size_t i = 0; i < union_p.data().size(); ++i) {
        inter += (union_p.data()[i] && union_g.data()[i]);
        uni += (union_p.data()[i] || union_g.data()[i]);
        const double fp = freq_p.data()[i] / static_cast<double>(motion_frames);
        const double fg = freq_g.data()[i] / static_cast<double>(motion_frames);
        wsum_min += std::min(fp, fg);
        wsum_max += std::max(fp, fg);
    }
    if (uni > 0)
        scores.spatial_iou = static_cast<double>(inter) / static_cast<double>(uni);
    if (frame_iou_count > 0)
        scores.spatiotemporal_iou = frame_iou_sum / static_cast<double>(frame_iou_count);
    if (wsum_max > 0.0) scores.weighted_spatial_iou = wsum_min / wsum_max;
    return scores;
}

}  // namespace world4d
