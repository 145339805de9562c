#include "world4d/worldline.hpp"

#include <cmath>

#include "world4d/rng.hpp"

namespace world4d {

std::vector<std::array<int, 2>> sample_seeds(const Mask& mask, std::size_t n,
                                             std::uint64_t seed) {
    std::vector<std::array<int, 2>> candidates;
    for (int v = 0; v < mask.height(); ++v)
        for (int u = 0; u < mask.width(); ++u)
            if (mask(u, v)) candidates.push_back({u, v});
    if (candidates.empty()) throw InvalidInputError("sample_seeds: mask has no true pixel");
    if (candidates.size() <= n) return candidates;

    Rng rng(seed);
    std::vector<std::array<int, 2>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng.uniform_index(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
        out.push_back(candidates[i]);
    }
    return out;
}

WorldlineSet track_2d(const std::vector<std::array<int, 2>>& seeds,
                      std::span<const FlowField> flows) {
    if (flows.empty()) throw InvalidInputError("track_2d: need at least one flow field");
    const int w = flows[0].width();
    const int h = flows[0].height();
    for (const auto& f : flows)
        if (f.width() != w || f.height() != h)
            throw InvalidInputError("track_2d: flow shape mismatch");
    const int horizon = static_cast<int>(flows.size()) + 1;

    WorldlineSet set;
    set.horizon = horizon;
    set.lines.reserve(seeds.size());
    for (const auto& seed : seeds) {
        Worldline wl;
        wl.seed_pixel = seed;
        wl.positions_2d.assign(horizon, Eigen::Vector2d::Zero());
        wl.valid.assign(horizon, 0);

        Eigen::Vector2d p(seed[0], seed[1]);
        bool alive = p.x() >= 0.0 && p.x() <= w - 1.0 && p.y() >= 0.0 && p.y() <= h - 1.0;
        if (alive) {
            wl.positions_2d[0] = p;
            wl.valid[0] = 1;
        }
        for (int t = 0; alive && t + 1 < horizon; ++t) {
            const auto du = bilinear_sample(flows[t].du, &flows[t].valid, p.x(), p.y());
            const auto dv = bilinear_sample(flows[t].dv, &flows[t].valid, p.x(), p.y());
            if (!du || !dv) {
                alive = false;
                break;
            }
            p += Eigen::Vector2d(*du, *dv);
            if (!(p.x() >= 0.0 && p.x() <= w - 1.0 && p.y() >= 0.0 && p.y() <= h - 1.0)) {
                alive = false;
                break;
            }
            wl.positions_2d[t + 1] = p;
            wl.valid[t + 1] = 1;
        }
        set.lines.push_back(std::move(wl));
    }
    return set;
}

WorldlineSet lift_3d(const WorldlineSet& tracks, std::span<const DepthMap> depths,
                     const CameraIntrinsics& K, LiftTarget target) {
    if (static_cast<int>(depths.size()) != tracks.horizon)
        throw InvalidInputError("lift_3d: depth sequence length != horizon");
    WorldlineSet out = tracks;
    for (auto& wl : out.lines) {
        auto& slot = target == LiftTarget::pred ? wl.positions_3d_pred : wl.positions_3d_gt;
        slot.assign(tracks.horizon, Eigen::Vector3d::Zero());
        bool alive = true;
        for (int t = 0; t < tracks.horizon; ++t) {
            if (!alive || !wl.valid[t]) {
                alive = false;
                wl.valid[t] = 0;
                continue;
            }
            const auto& p = wl.positions_2d[t];
            const auto d =
                bilinear_sample(depths[t].values, &depths[t].valid, p.x(), p.y());
            if (!d) {
                alive = false;
                wl.valid[t] = 0;
                continue;
            }
            slot[t] = unproject(p.x(), p.y(), *d, K);
        }
    }
    return out;
}

WorldlineMetrics worldline_metrics(const WorldlineSet& wls, double fail_tau) {
    const int horizon = wls.horizon;
    bool any_valid = false;
    for (const auto& wl : wls.lines) {
        if (wl.positions_3d_pred.empty() || wl.positions_3d_gt.empty())
            throw InvalidInputError("worldline_metrics: worldlines not lifted to 3D");
        for (auto v : wl.valid) any_valid |= (v != 0);
    }
    if (wls.lines.empty() || !any_valid)
        throw EmptySetError("worldline_metrics: no worldline with a valid frame");

    double l2_sum = 0.0;
    std::size_t l2_count = 0;
    double len_sum = 0.0;
    std::size_t failures = 0;
    std::vector<double> drift_sum(horizon, 0.0);
    std::vector<std::size_t> drift_count(horizon, 0);

    for (const auto& wl : wls.lines) {
        double err_sum = 0.0;
        std::size_t valid_frames = 0;
        bool exceeded = false;
        for (int t = 0; t < horizon; ++t) {
            if (!wl.valid[t]) continue;
            const double err = (wl.positions_3d_pred[t] - wl.positions_3d_gt[t]).norm();
            err_sum += err;
            ++valid_frames;
            drift_sum[t] += err;
            ++drift_count[t];
            exceeded |= err > fail_tau;
        }
        const bool broken = horizon > 0 && !wl.valid[horizon - 1];
        if (exceeded || broken) ++failures;
        len_sum += static_cast<double>(valid_frames);
        if (valid_frames > 0) {
            l2_sum += err_sum / static_cast<double>(valid_frames);
            ++l2_count;
        }
    }

    WorldlineMetrics m;
    m.drift_curve.resize(horizon);
    double drift_total = 0.0;
    std::size_t drift_defined = 0;
    for (int t = 0; t < horizon; ++t) {
        if (drift_count[t] > 0) {
            m.drift_curve[t] = drift_sum[t] / static_cast<double>(drift_count[t]);
            drift_total += *m.drift_curve[t];
            ++drift_defined;
        }
    }
    m.l2_error = l2_sum / static_cast<double>(l2_count);
    m.mean_drift = drift_defined > 0 ? drift_total / static_cast<double>(drift_defined) : 0.0;
    if (horizon > 0 && m.drift_curve[horizon - 1]) m.final_drift = m.drift_curve[horizon - 1];
    m.fail_rate = static_cast<double>(failures) / static_cast<double>(wls.lines.size());
    m.traj_length_frames = len_sum / static_cast<double>(wls.lines.size());
    m.traj_length_pct =
        horizon > 0 ? 100.0 * m.traj_length_frames / static_cast<double>(horizon) : 0.0;
    return m;
}

}  // namespace world4d
