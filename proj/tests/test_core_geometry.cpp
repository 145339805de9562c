#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "world4d/geometry.hpp"
#include "world4d/rng.hpp"

using namespace world4d;

namespace {

CameraIntrinsics test_K() {
    CameraIntrinsics K;
    K.fx = K.fy = 100.0;
    K.cx = K.cy = 50.0;
    K.width = K.height = 101;
    return K;
}

}  // namespace

TEST_CASE("unproject: principal-point ray is the optical axis") {
    const CameraIntrinsics K = test_K();
    const Eigen::Vector3d p = unproject(K.cx, K.cy, 2.0, K);
    CHECK(p.x() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.z() == 2.0);
}

TEST_CASE("unproject: hand-evaluated K^-1 (150,50) at depth 1") {
    const CameraIntrinsics K = test_K();
    const Eigen::Vector3d p = unproject(100.0, 50.0, 1.0, K);
    // (u-cx)/fx = (100-50)/100 = 0.5 at depth 1
    CHECK(p.x() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.z() == 1.0);

    CameraIntrinsics wide = K;
    wide.width = 200;
    const Eigen::Vector3d q = unproject(150.0, 50.0, 1.0, wide);
    CHECK(q.x() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.y() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q.z() == 1.0);
}

TEST_CASE("unproject rejects bad depth") {
    const CameraIntrinsics K = test_K();
    CHECK_THROWS_AS(unproject(10, 10, 0.0, K), InvalidInputError);
    CHECK_THROWS_AS(unproject(10, 10, -1.0, K), InvalidInputError);
    CHECK_THROWS_AS(unproject(10, 10, std::nan(""), K), InvalidInputError);
}

TEST_CASE("project: optical axis and direct formula") {
    const CameraIntrinsics K = test_K();
    const Projection p = project({0.0, 0.0, 3.0}, K);
    CHECK(p.u == K.cx);
    CHECK(p.v == K.cy);
    CHECK(p.depth == 3.0);
    const Projection q = project({1.0, 0.0, 1.0}, K);
    CHECK(q.u == doctest::Approx(150.0).epsilon(1e-12));
    CHECK_THROWS_AS(project({0.0, 0.0, -1.0}, K), InvalidInputError);
    CHECK_THROWS_AS(project({0.0, 0.0, 0.0}, K), InvalidInputError);
}

TEST_CASE("round trips hold within 1e-9 for depths in [0.1, 100]") {
    const CameraIntrinsics K = test_K();
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(0.0, K.width - 1.0);
        const double v = rng.uniform(0.0, K.height - 1.0);
        const double d = rng.uniform(0.1, 100.0);
        const Projection p = project(unproject(u, v, d, K), K);
        CHECK(std::abs(p.u - u) < 1e-9);
        CHECK(std::abs(p.v - v) < 1e-9);
        CHECK(std::abs(p.depth - d) < 1e-9);

        const Eigen::Vector3d x(rng.uniform(-3, 3), rng.uniform(-3, 3),
                                rng.uniform(0.1, 100.0));
        // Keep projections inside the raster so unproject's bounds check holds.
        const Projection px = project(x, K);
        if (px.u < 0 || px.u > K.width - 1 || px.v < 0 || px.v > K.height - 1) continue;
        const Eigen::Vector3d back = unproject(px.u, px.v, px.depth, K);
        CHECK((back - x).norm() < 1e-9);
    }
}

TEST_CASE("world_to_camera: identity, translation, inverse composition, rigidity") {
    CameraPose identity;
    const Eigen::Vector3d x(1.0, 1.0, 0.0);
    CHECK((world_to_camera(x, identity) - x).norm() == 0.0);

    CameraPose shift;
    shift.translation = {0.0, 0.0, 5.0};
    CHECK((world_to_camera(x, shift) - Eigen::Vector3d(1, 1, 5)).norm() == 0.0);

    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        // Random rotation via normalized quaternion sampled from the rng.
        Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        q.normalize();
        CameraPose pose;
        pose.rotation = q.toRotationMatrix();
        pose.translation = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        pose.validate();

        const Eigen::Vector3d a(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        const Eigen::Vector3d b(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        CHECK((camera_to_world(world_to_camera(a, pose), pose) - a).norm() < 1e-9);
        const CameraPose inv = pose.inverse();
        CHECK((world_to_camera(world_to_camera(a, pose), inv) - a).norm() < 1e-9);
        // Rigid transforms preserve pairwise distances.
        const double before = (a - b).norm();
        const double after = (world_to_camera(a, pose) - world_to_camera(b, pose)).norm();
        CHECK(std::abs(before - after) < 1e-9);
    }
}

TEST_CASE("pose validation rejects non-orthonormal rotations") {
    CameraPose pose;
    pose.rotation(0, 0) = 1.5;
    CHECK_THROWS_AS(pose.validate(), InvalidInputError);
    pose.rotation = -Eigen::Matrix3d::Identity();  // det -1
    CHECK_THROWS_AS(pose.validate(), InvalidInputError);
}

TEST_CASE("depth_to_points4d: single pixel, empty selection, analytic plane") {
    CameraIntrinsics K;
    K.fx = K.fy = 10.0;
    K.cx = K.cy = 0.0;
    K.width = K.height = 1;
    DepthMap one(Raster<double>(1, 1, 1.0), Mask(1, 1, 1));
    const PointSet4D set = depth_to_points4d(one, K, 0);
    REQUIRE(set.points.size() == 1);
    CHECK(set.points[0].x == 0.0);
    CHECK(set.points[0].y == 0.0);
    CHECK(set.points[0].z == 1.0);
    CHECK(set.points[0].tau == 0.0);

    DepthMap masked(Raster<double>(1, 1, 1.0), Mask(1, 1, 0));
    CHECK_THROWS_AS(depth_to_points4d(masked, K, 0), EmptySetError);

    CameraIntrinsics K2;
    K2.fx = K2.fy = 10.0;
    K2.cx = K2.cy = 0.5;
    K2.width = K2.height = 2;
    DepthMap plane(Raster<double>(2, 2, 2.0), Mask(2, 2, 1));
    const PointSet4D quad = depth_to_points4d(plane, K2, 3);
    REQUIRE(quad.points.size() == 4);
    for (const auto& p : quad.points) {
        CHECK(p.z == 2.0);
        CHECK(p.tau == 3.0);
    }
}

TEST_CASE("depth_to_points4d emits exactly popcount(valid and select) points") {
    CameraIntrinsics K;
    K.fx = K.fy = 50.0;
    K.cx = K.cy = 8.0;
    K.width = K.height = 17;
    Rng rng(3);
    Raster<double> vals(17, 17, 0.0);
    Mask valid(17, 17, 0), select(17, 17, 0);
    std::size_t expected = 0;
    for (int v = 0; v < 17; ++v)
        for (int u = 0; u < 17; ++u) {
            vals(u, v) = rng.uniform(0.5, 4.0);
            valid(u, v) = rng.uniform() < 0.7;
            select(u, v) = rng.uniform() < 0.6;
            expected += valid(u, v) && select(u, v);
        }
    REQUIRE(expected > 0);
    const PointSet4D set = depth_to_points4d(DepthMap(vals, valid), K, 1, &select);
    CHECK(set.points.size() == expected);
}

TEST_CASE("moving_mask thresholds strictly and is monotone in delta") {
    const int n = 8;
    Raster<double> du(n, n, 0.0), dv(n, n, 0.0);
    Mask valid(n, n, 1);
    const FlowField zero(du, dv, valid);
    CHECK(count_true(moving_mask(zero, 0.5)) == 0);
    // Strict inequality: magnitude exactly 0 at delta 0 stays false.
    CHECK(count_true(moving_mask(zero, 0.0)) == 0);

    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) du(u, v) = 1.0;
    const FlowField uniform(du, dv, valid);
    CHECK(count_true(moving_mask(uniform, 0.5)) == static_cast<std::size_t>(n) * n);

    du(3, 3) = 0.25;
    const FlowField mixed(du, dv, valid);
    const Mask lo = moving_mask(mixed, 0.1);
    const Mask hi = moving_mask(mixed, 0.6);
    CHECK(lo(3, 3));
    CHECK(!hi(3, 3));
    // Raising delta never adds true pixels.
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) CHECK(hi(u, v) <= lo(u, v));

    Raster<double> sx(n, n, 0.02), sy(n, n, 0.0), sz(n, n, 0.0);
    const SceneFlowField sf(sx, sy, sz, valid);
    CHECK(count_true(moving_mask(sf, 0.01)) == static_cast<std::size_t>(n) * n);
    CHECK(count_true(moving_mask(sf, 0.02)) == 0);  // strict
}

TEST_CASE("bilinear sampling: exact at integers, footprint validity") {
    Raster<double> img(3, 3, 0.0);
    for (int v = 0; v < 3; ++v)
        for (int u = 0; u < 3; ++u) img(u, v) = u + 10.0 * v;
    CHECK(*bilinear_sample(img, nullptr, 2.0, 2.0) == 22.0);  // corner is in bounds
    CHECK(*bilinear_sample(img, nullptr, 0.5, 0.0) == doctest::Approx(0.5));
    CHECK(!bilinear_sample(img, nullptr, 2.0 + 1e-9, 2.0).has_value());
    CHECK(!bilinear_sample(img, nullptr, -0.25, 0.0).has_value());
    Mask valid(3, 3, 1);
    valid(1, 0) = 0;
    CHECK(!bilinear_sample(img, &valid, 0.5, 0.0).has_value());
    CHECK(bilinear_sample(img, &valid, 0.0, 0.5).has_value());
}
