#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "world4d/rng.hpp"
#include "world4d/warp.hpp"

using namespace world4d;

namespace {

FlowField uniform_flow(int w, int h, double du_val, double dv_val) {
    return FlowField(Raster<double>(w, h, du_val), Raster<double>(w, h, dv_val),
                     Mask(w, h, 1));
}

}  // namespace

TEST_CASE("backward_warp: zero flow is the bit-exact identity") {
    const int n = 12;
    Rng rng(2);
    Raster<double> src(n, n, 0.0);
    for (auto& x : src.data()) x = rng.uniform(-5, 5);
    Mask valid(n, n, 1);
    valid(4, 7) = 0;

    const Raster<double> chans[1] = {src};
    const WarpResult w = backward_warp(std::span<const Raster<double>>(chans, 1), &valid,
                                       uniform_flow(n, n, 0.0, 0.0));
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) {
            CHECK(static_cast<bool>(w.coverage(u, v)) == static_cast<bool>(valid(u, v)));
            if (valid(u, v)) CHECK(w.channels[0](u, v) == src(u, v));
        }
}

TEST_CASE("backward_warp: constant flow on a horizontal ramp") {
    const int n = 10;
    Raster<double> ramp(n, n, 0.0);
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) ramp(u, v) = u;
    const Raster<double> chans[1] = {ramp};
    const WarpResult w = backward_warp(std::span<const Raster<double>>(chans, 1), nullptr,
                                       uniform_flow(n, n, 1.0, 0.0));
    for (int v = 0; v < n; ++v) {
        for (int u = 0; u < n; ++u) {
            if (u + 1 <= n - 1) {
                CHECK(w.coverage(u, v));
                CHECK(w.channels[0](u, v) == doctest::Approx(u + 1.0).epsilon(1e-12));
            } else {
                CHECK(!w.coverage(u, v));  // flow points outside the raster
            }
        }
    }
}

TEST_CASE("backward_warp rejects shape mismatch") {
    Raster<double> src(4, 4, 1.0);
    const Raster<double> chans[1] = {src};
    CHECK_THROWS_AS(backward_warp(std::span<const Raster<double>>(chans, 1), nullptr,
                                  uniform_flow(5, 4, 0.0, 0.0)),
                    InvalidInputError);
}

TEST_CASE("depth_warp_error: identical maps under zero flow give exact zero L1") {
    const int n = 16;
    Rng rng(3);
    Raster<double> vals(n, n, 0.0);
    for (auto& x : vals.data()) x = rng.uniform(0.5, 4.0);
    const DepthMap d(vals, Mask(n, n, 1));
    OcclusionMask occ;
    occ.occluded = Mask(n, n, 0);
    const WarpErrorStats s = depth_warp_error(d, d, uniform_flow(n, n, 0.0, 0.0), occ);
    REQUIRE(s.all.l1.has_value());
    CHECK(*s.all.l1 == 0.0);
    CHECK(*s.all.charbonnier == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(*s.non_occluded.l1 == 0.0);
    CHECK(!s.occluded.l1.has_value());  // empty region reports absent, not zero
    CHECK(s.occluded.pixel_count == 0);
}

TEST_CASE("warp errors: charbonnier floors at eps and dominates L1") {
    const int n = 8;
    Rng rng(4);
    Raster<double> a(n, n, 0.0), b(n, n, 0.0);
    for (auto& x : a.data()) x = rng.uniform(0.5, 4.0);
    for (auto& x : b.data()) x = rng.uniform(0.5, 4.0);
    OcclusionMask occ;
    occ.occluded = Mask(n, n, 0);
    const WarpErrorStats s = depth_warp_error(DepthMap(a, Mask(n, n, 1)),
                                              DepthMap(b, Mask(n, n, 1)),
                                              uniform_flow(n, n, 0.0, 0.0), occ, 1e-3);
    CHECK(*s.all.l1 >= 0.0);
    CHECK(*s.all.charbonnier >= 1e-3);
    CHECK(*s.all.charbonnier >= *s.all.l1);
}

TEST_CASE("region split: all-occluded leaves non_occluded absent") {
    const int n = 6;
    const DepthMap d(Raster<double>(n, n, 2.0), Mask(n, n, 1));
    OcclusionMask occ;
    occ.occluded = Mask(n, n, 1);
    const WarpErrorStats s = depth_warp_error(d, d, uniform_flow(n, n, 0.0, 0.0), occ);
    CHECK(!s.non_occluded.l1.has_value());
    CHECK(s.occluded.l1.has_value());
    CHECK(s.all.pixel_count == s.occluded.pixel_count);
}

TEST_CASE("subset masks never change per-pixel errors, only the aggregate count") {
    const int n = 12;
    Rng rng(6);
    Raster<double> a(n, n, 0.0), b(n, n, 0.0);
    for (auto& x : a.data()) x = rng.uniform(0.5, 4.0);
    for (auto& x : b.data()) x = rng.uniform(0.5, 4.0);
    Mask valid_all(n, n, 1);
    Mask valid_half(n, n, 0);
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n / 2; ++u) valid_half(u, v) = 1;

    OcclusionMask occ;
    occ.occluded = Mask(n, n, 0);
    const FlowField zero = uniform_flow(n, n, 0.0, 0.0);
    const WarpErrorStats full =
        depth_warp_error(DepthMap(a, valid_all), DepthMap(b, valid_all), zero, occ);
    const WarpErrorStats half =
        depth_warp_error(DepthMap(a, valid_all), DepthMap(b, valid_half), zero, occ);
    CHECK(half.all.pixel_count == static_cast<std::size_t>(n) * n / 2);
    // Recompute the half-region mean from the same per-pixel errors.
    double sum = 0.0;
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n / 2; ++u) sum += std::abs(a(u, v) - b(u, v));
    CHECK(*half.all.l1 == doctest::Approx(sum / (n * n / 2)).epsilon(1e-12));
    CHECK(full.all.pixel_count == static_cast<std::size_t>(n) * n);
}

TEST_CASE("rgb_warp_error: identical frames, zero flow, averaged channels") {
    const int n = 8;
    Rng rng(8);
    Raster<double> r(n, n, 0.0), g(n, n, 0.0), b(n, n, 0.0);
    for (auto* ch : {&r, &g, &b})
        for (auto& x : ch->data()) x = rng.uniform();
    const RgbFrame frame(r, g, b);
    OcclusionMask occ;
    occ.occluded = Mask(n, n, 0);
    const WarpErrorStats s = rgb_warp_error(frame, frame, uniform_flow(n, n, 0.0, 0.0), occ);
    CHECK(*s.all.l1 == 0.0);
    CHECK(*s.non_occluded.l1 == 0.0);
}

TEST_CASE("occlusion_from_fb: exact inverses, out-of-bounds, tolerance") {
    const int n = 10;
    const FlowField fwd = uniform_flow(n, n, 2.0, 0.0);
    const FlowField bwd = uniform_flow(n, n, -2.0, 0.0);
    const OcclusionMask none = occlusion_from_fb(fwd, bwd, 1.0);
    for (int v = 0; v < n; ++v)
        for (int u = 0; u + 2 <= n - 1; ++u) CHECK(!none.occluded(u, v));
    // Forward flow leaving the raster is occluded.
    for (int v = 0; v < n; ++v) CHECK(none.occluded(n - 1, v));

    const FlowField bad_bwd = uniform_flow(n, n, -0.5, 0.0);
    const OcclusionMask occ = occlusion_from_fb(fwd, bad_bwd, 1.0);
    CHECK(occ.occluded(2, 5));  // residual 1.5 px > 1 px
    const OcclusionMask loose = occlusion_from_fb(fwd, bad_bwd, 2.0);
    CHECK(!loose.occluded(2, 5));

    CHECK_THROWS_AS(occlusion_from_fb(fwd, uniform_flow(4, 4, 0, 0), 1.0),
                    InvalidInputError);
    CHECK_THROWS_AS(occlusion_from_fb(fwd, bwd, 0.0), InvalidInputError);
}
