#include "world4d/geometry.hpp"

#include <cmath>

namespace world4d {

namespace {

void require_same_shape(int w, int h, int w2, int h2, const char* what) {
    if (w != w2 || h != h2) throw InvalidInputError(std::string(what) + ": shape mismatch");
}

}  // namespace

DepthMap::DepthMap(Raster<double> values_in, Mask valid_in)
    : values(std::move(values_in)), valid(std::move(valid_in)) {
    require_same_shape(values.width(), values.height(), valid.width(), valid.height(),
                       "DepthMap");
    for (int v = 0; v < values.height(); ++v)
        for (int u = 0; u < values.width(); ++u)
            if (valid(u, v) && (!std::isfinite(values(u, v)) || values(u, v) <= 0.0))
                throw InvalidInputError("DepthMap: valid entry is not finite and > 0");
}

DepthMap DepthMap::from_values(Raster<double> values_in) {
    Mask m(values_in.width(), values_in.height(), 0);
    for (int v = 0; v < values_in.height(); ++v)
        for (int u = 0; u < values_in.width(); ++u)
            m(u, v) = std::isfinite(values_in(u, v)) && values_in(u, v) > 0.0;
    DepthMap d;
    d.values = std::move(values_in);
    d.valid = std::move(m);
    return d;
}

FlowField::FlowField(Raster<double> du_in, Raster<double> dv_in, Mask valid_in)
    : du(std::move(du_in)), dv(std::move(dv_in)), valid(std::move(valid_in)) {
    require_same_shape(du.width(), du.height(), dv.width(), dv.height(), "FlowField");
    require_same_shape(du.width(), du.height(), valid.width(), valid.height(), "FlowField");
    for (int v = 0; v < du.height(); ++v)
        for (int u = 0; u < du.width(); ++u)
            if (valid(u, v) && (!std::isfinite(du(u, v)) || !std::isfinite(dv(u, v))))
                throw InvalidInputError("FlowField: valid entry is not finite");
}

SceneFlowField::SceneFlowField(Raster<double> dx_in, Raster<double> dy_in, Raster<double> dz_in,
                               Mask valid_in)
    : dx(std::move(dx_in)), dy(std::move(dy_in)), dz(std::move(dz_in)),
      valid(std::move(valid_in)) {
    require_same_shape(dx.width(), dx.height(), dy.width(), dy.height(), "SceneFlowField");
    require_same_shape(dx.width(), dx.height(), dz.width(), dz.height(), "SceneFlowField");
    require_same_shape(dx.width(), dx.height(), valid.width(), valid.height(),
                       "SceneFlowField");
    for (int v = 0; v < dx.height(); ++v)
        for (int u = 0; u < dx.width(); ++u)
            if (valid(u, v) && (!std::isfinite(dx(u, v)) || !std::isfinite(dy(u, v)) ||
                                !std::isfinite(dz(u, v))))
                throw InvalidInputError("SceneFlowField: valid entry is not finite");
}

RgbFrame::RgbFrame(Raster<double> r_in, Raster<double> g_in, Raster<double> b_in)
    : r(std::move(r_in)), g(std::move(g_in)), b(std::move(b_in)) {
    require_same_shape(r.width(), r.height(), g.width(), g.height(), "RgbFrame");
    require_same_shape(r.width(), r.height(), b.width(), b.height(), "RgbFrame");
    for (const auto* ch : {&r, &g, &b})
        for (double x : ch->data())
            if (!(x >= 0.0 && x <= 1.0))
                throw InvalidInputError("RgbFrame: channel value outside [0, 1]");
}

PointSet4D depth_to_points4d(const DepthMap& depth, const CameraIntrinsics& K, int tau,
                             const Mask* select, double alpha) {
    if (select && !depth.values.same_shape(*select))
        throw InvalidInputError("depth_to_points4d: select mask shape mismatch");
    PointSet4D set;
    set.alpha = alpha;
    for (int v = 0; v < depth.height(); ++v) {
        for (int u = 0; u < depth.width(); ++u) {
            if (!depth.valid(u, v)) continue;
            if (select && !(*select)(u, v)) continue;
            const Eigen::Vector3d p = unproject(u, v, depth.values(u, v), K);
            set.points.push_back({p.x(), p.y(), p.z(), static_cast<double>(tau)});
        }
    }
    if (set.points.empty())
        throw EmptySetError("depth_to_points4d: no valid pixel selected");
    return set;
}

Mask moving_mask(const FlowField& flow, double delta) {
    if (delta < 0.0) throw InvalidInputError("moving_mask: delta must be >= 0");
    Mask m(flow.width(), flow.height(), 0);
    for (int v = 0; v < flow.height(); ++v)
        for (int u = 0; u < flow.width(); ++u)
            if (flow.valid(u, v))
                m(u, v) = std::hypot(flow.du(u, v), flow.dv(u, v)) > delta;
    return m;
}

Mask moving_mask(const SceneFlowField& flow, double delta) {
    if (delta < 0.0) throw InvalidInputError("moving_mask: delta must be >= 0");
    Mask m(flow.width(), flow.height(), 0);
    for (int v = 0; v < flow.height(); ++v)
        for (int u = 0; u < flow.width(); ++u)
            if (flow.valid(u, v)) {
                const double n = std::sqrt(flow.dx(u, v) * flow.dx(u, v) +
                                           flow.dy(u, v) * flow.dy(u, v) +
                                           flow.dz(u, v) * flow.dz(u, v));
                m(u, v) = n > delta;
            }
    return m;
}

}  // namespace world4d
