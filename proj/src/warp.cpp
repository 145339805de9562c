#include "world4d/warp.hpp"

#include <cmath>

namespace world4d {

WarpResult backward_warp(std::span<const Raster<double>> source, const Mask* source_valid,
                         const FlowField& flow) {
    if (source.empty()) throw InvalidInputError("backward_warp: no source channels");
    const int w = source[0].width();
    const int h = source[0].height();
    for (const auto& ch : source)
        if (ch.width() != w || ch.height() != h)
            throw InvalidInputError("backward_warp: channel shape mismatch");
    if (flow.width() != w || flow.height() != h)
        throw InvalidInputError("backward_warp: flow shape mismatch");

    WarpResult out;
    out.channels.assign(source.size(), Raster<double>(w, h, 0.0));
    out.coverage = Mask(w, h, 0);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (!flow.valid(u, v)) continue;
            const double su = u + flow.du(u, v);
            const double sv = v + flow.dv(u, v);
            bool ok = true;
            for (std::size_t c = 0; c < source.size(); ++c) {
                const auto s = bilinear_sample(source[c], source_valid, su, sv);
                if (!s) {
                    ok = false;
                    break;
                }
                out.channels[c](u, v) = *s;
            }
            if (ok) out.coverage(u, v) = 1;
        }
    }
    return out;
}

WarpResult backward_warp(const DepthMap& source, const FlowField& flow) {
    const Raster<double> chans[1] = {source.values};
    return backward_warp(std::span<const Raster<double>>(chans, 1), &source.valid, flow);
}

WarpResult backward_warp(const RgbFrame& source, const FlowField& flow) {
    const Raster<double> chans[3] = {source.r, source.g, source.b};
    return backward_warp(std::span<const Raster<double>>(chans, 3), nullptr, flow);
}

namespace {

struct RegionAccum {
    double abs_sum = 0.0;
    double charb_sum = 0.0;
    std::size_t count = 0;

    void add(double err, double eps) {
        abs_sum += std::abs(err);
        charb_sum += std::sqrt(err * err + eps * eps);
        ++count;
    }

    WarpErrorRegion finish() const {
        WarpErrorRegion r;
        r.pixel_count = count;
        if (count > 0) {
            r.l1 = abs_sum / static_cast<double>(count);
            r.charbonnier = charb_sum / static_cast<double>(count);
        }
        return r;
    }
};

WarpErrorStats accumulate_warp_error(const WarpResult& warped,
                                     std::span<const Raster<double>> target,
                                     const Mask* target_valid, const OcclusionMask& occ,
                                     double eps) {
    const int w = warped.coverage.width();
    const int h = warped.coverage.height();
    if (!occ.occluded.empty() && (occ.occluded.width() != w || occ.occluded.height() != h))
        throw InvalidInputError("warp error: occlusion mask shape mismatch");
    RegionAccum all, occluded, visible;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (!warped.coverage(u, v)) continue;
            if (target_valid && !(*target_valid)(u, v)) continue;
            double err = 0.0;
            for (std::size_t c = 0; c < target.size(); ++c)
                err += std::abs(warped.channels[c](u, v) - target[c](u, v));
            err /= static_cast<double>(target.size());
            all.add(err, eps);
            const bool is_occ = !occ.occluded.empty() && occ.occluded(u, v);
            (is_occ ? occluded : visible).add(err, eps);
        }
    }
    WarpErrorStats stats;
    stats.charbonnier_eps = eps;
    stats.all = all.finish();
    stats.occluded = occluded.finish();
    stats.non_occluded = visible.finish();
    return stats;
}

}  // namespace

WarpErrorStats depth_warp_error(const DepthMap& d_t, const DepthMap& d_next,
                                const FlowField& flow, const OcclusionMask& occ,
                                double charbonnier_eps) {
    if (!d_t.values.same_shape(d_next.values))
        throw InvalidInputError("depth_warp_error: depth shape mismatch");
    const WarpResult warped = backward_warp(d_t, flow);
    const Raster<double> target[1] = {d_next.values};
    return accumulate_warp_error(warped, std::span<const Raster<double>>(target, 1),
                                 &d_next.valid, occ, charbonnier_eps);
}

WarpErrorStats rgb_warp_error(const RgbFrame& i_t, const RgbFrame& i_next,
                              const FlowField& flow_pred, const OcclusionMask& occ,
                              double charbonnier_eps) {
    if (!i_t.r.same_shape(i_next.r))
        throw InvalidInputError("rgb_warp_error: frame shape mismatch");
    const WarpResult warped = backward_warp(i_t, flow_pred);
    const Raster<double> target[3] = {i_next.r, i_next.g, i_next.b};
    return accumulate_warp_error(warped, std::span<const Raster<double>>(target, 3), nullptr,
                                 occ, charbonnier_eps);
}

OcclusionMask occlusion_from_fb(const FlowField& flow_fwd, const FlowField& flow_bwd,
                                double tol_px) {
    if (!(tol_px > 0.0)) throw InvalidInputError("occlusion_from_fb: tol_px must be > 0");
    if (flow_fwd.width() != flow_bwd.width() || flow_fwd.height() != flow_bwd.height())
        throw InvalidInputError("occlusion_from_fb: flow shape mismatch");
    OcclusionMask occ;
    occ.occluded = Mask(flow_fwd.width(), flow_fwd.height(), 0);
    for (int v = 0; v < flow_fwd.height(); ++v) {
        for (int u = 0; u < flow_fwd.width(); ++u) {
            if (!flow_fwd.valid(u, v)) {
                occ.occluded(u, v) = 1;
                continue;
            }
            const double tu = u + flow_fwd.du(u, v);
            const double tv = v + flow_fwd.dv(u, v);
            const auto bu = bilinear_sample(flow_bwd.du, &flow_bwd.valid, tu, tv);
            const auto bv = bilinear_sample(flow_bwd.dv, &flow_bwd.valid, tu, tv);
            if (!bu || !bv) {
                occ.occluded(u, v) = 1;
                continue;
            }
            const double ru = flow_fwd.du(u, v) + *bu;
            const double rv = flow_fwd.dv(u, v) + *bv;
            occ.occluded(u, v) = std::hypot(ru, rv) > tol_px;
        }
    }
    return occ;
}

}  // namespace world4d
