#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "world4d/io.hpp"
#include "world4d/rng.hpp"

using namespace world4d;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "world4d_io_test";
        fs::remove_all(d);  // stale files from a previous run would skew tests
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
}

void put_bytes(const fs::path& p, const std::vector<char>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <class T>
void push_le(std::vector<char>& v, T value) {
    const std::size_t off = v.size();
    v.resize(off + sizeof(T));
    std::memcpy(v.data() + off, &value, sizeof(T));
}

}  // namespace

TEST_CASE("depth container: bit-exact round trip including invalid pixels") {
    const fs::path path = temp_dir() / "depth.d4df";
    Rng rng(5);
    Raster<double> vals(7, 5, 0.0);
    Mask valid(7, 5, 0);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 7; ++u) {
            // Round through float32 so the in-memory value matches disk exactly.
            vals(u, v) = static_cast<float>(rng.uniform(0.01, 9.0));
            valid(u, v) = rng.uniform() < 0.8;
        }
    valid(0, 0) = 1;
    const DepthMap depth(vals, valid);
    write_depth(path, depth);
    const std::vector<char> bytes1 = file_bytes(path);

    const DepthMap back = read_depth(path);
    REQUIRE(back.width() == 7);
    REQUIRE(back.height() == 5);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 7; ++u) {
            CHECK(static_cast<bool>(back.valid(u, v)) == static_cast<bool>(valid(u, v)));
            if (valid(u, v)) CHECK(back.values(u, v) == vals(u, v));
        }
    write_depth(path, back);
    CHECK(file_bytes(path) == bytes1);
}

TEST_CASE("depth container: golden 2x2 payload") {
    const fs::path path = temp_dir() / "golden.d4df";
    std::vector<char> bytes = {'D', '4', 'D', 'F'};
    push_le<std::uint32_t>(bytes, 1);
    push_le<std::uint32_t>(bytes, 2);
    push_le<std::uint32_t>(bytes, 2);
    push_le<float>(bytes, 1.5f);
    push_le<float>(bytes, 2.5f);
    push_le<float>(bytes, std::numeric_limits<float>::quiet_NaN());
    push_le<float>(bytes, 4.0f);
    put_bytes(path, bytes);

    const DepthMap d = read_depth(path);
    CHECK(d.values(0, 0) == 1.5);
    CHECK(d.values(1, 0) == 2.5);
    CHECK(!d.valid(0, 1));
    CHECK(d.values(1, 1) == 4.0);
}

TEST_CASE("depth container: format errors name the problem") {
    const fs::path dir = temp_dir();
    put_bytes(dir / "bad_magic.d4df", {'X', 'Y', 'Z', 'W', 0, 0, 0, 0});
    CHECK_THROWS_AS(read_d4df(dir / "bad_magic.d4df"), FormatError);

    std::vector<char> v2 = {'D', '4', 'D', 'F'};
    push_le<std::uint32_t>(v2, 2);
    push_le<std::uint32_t>(v2, 1);
    push_le<std::uint32_t>(v2, 1);
    push_le<float>(v2, 1.0f);
    put_bytes(dir / "bad_version.d4df", v2);
    CHECK_THROWS_AS(read_d4df(dir / "bad_version.d4df"), FormatError);

    std::vector<char> trunc = {'D', '4', 'D', 'F'};
    push_le<std::uint32_t>(trunc, 1);
    push_le<std::uint32_t>(trunc, 4);
    push_le<std::uint32_t>(trunc, 4);
    push_le<float>(trunc, 1.0f);  // far fewer than 16 floats
    put_bytes(dir / "trunc.d4df", trunc);
    try {
        read_d4df(dir / "trunc.d4df");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
}

TEST_CASE("flo: bit-exact round trip and sentinel preservation") {
    const fs::path path = temp_dir() / "flow.flo";
    Rng rng(9);
    Raster<double> du(6, 4, 0.0), dv(6, 4, 0.0);
    Mask valid(6, 4, 1);
    for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 6; ++u) {
            du(u, v) = static_cast<float>(rng.uniform(-30.0, 30.0));
            dv(u, v) = static_cast<float>(rng.uniform(-30.0, 30.0));
        }
    valid(2, 2) = 0;
    const FlowField flow(du, dv, valid);
    write_flo(path, flow);
    const auto bytes1 = file_bytes(path);

    const FlowField back = read_flo(path);
    CHECK(!back.valid(2, 2));
    for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 6; ++u)
            if (valid(u, v)) {
                CHECK(back.du(u, v) == du(u, v));
                CHECK(back.dv(u, v) == dv(u, v));
            }
    write_flo(path, back);
    CHECK(file_bytes(path) == bytes1);
}

TEST_CASE("flo: golden header and wrong magic") {
    const fs::path dir = temp_dir();
    std::vector<char> bytes;
    push_le<float>(bytes, 202021.25f);
    push_le<std::int32_t>(bytes, 2);
    push_le<std::int32_t>(bytes, 1);
    push_le<float>(bytes, 1.0f);
    push_le<float>(bytes, -2.0f);
    push_le<float>(bytes, 3.5f);
    push_le<float>(bytes, 0.25f);
    put_bytes(dir / "golden.flo", bytes);
    const FlowField f = read_flo(dir / "golden.flo");
    CHECK(f.width() == 2);
    CHECK(f.height() == 1);
    CHECK(f.du(0, 0) == 1.0);
    CHECK(f.dv(0, 0) == -2.0);
    CHECK(f.du(1, 0) == 3.5);
    CHECK(f.dv(1, 0) == 0.25);

    std::vector<char> bad;
    push_le<float>(bad, 123.0f);
    push_le<std::int32_t>(bad, 1);
    push_le<std::int32_t>(bad, 1);
    push_le<float>(bad, 0.0f);
    push_le<float>(bad, 0.0f);
    put_bytes(dir / "bad.flo", bad);
    CHECK_THROWS_AS(read_flo(dir / "bad.flo"), FormatError);
}

TEST_CASE("png: quantization round trip, golden white pixel, corrupt file") {
    const fs::path dir = temp_dir();
    Rng rng(13);
    Raster<double> r(9, 9, 0.0), g(9, 9, 0.0), b(9, 9, 0.0);
    for (auto* ch : {&r, &g, &b})
        for (auto& x : ch->data()) x = rng.uniform();
    const RgbFrame frame(r, g, b);
    write_png(dir / "img.png", frame);
    const RgbFrame back = read_png(dir / "img.png");
    double max_err = 0.0;
    for (std::size_t i = 0; i < r.data().size(); ++i) {
        max_err = std::max(max_err, std::abs(back.r.data()[i] - r.data()[i]));
        max_err = std::max(max_err, std::abs(back.g.data()[i] - g.data()[i]));
        max_err = std::max(max_err, std::abs(back.b.data()[i] - b.data()[i]));
    }
    CHECK(max_err <= 1.0 / 510.0 + 1e-12);
    // A second pass through the 8-bit grid is lossless.
    write_png(dir / "img2.png", back);
    const RgbFrame back2 = read_png(dir / "img2.png");
    CHECK(back2.r.data() == back.r.data());

    const RgbFrame white(Raster<double>(1, 1, 1.0), Raster<double>(1, 1, 1.0),
                         Raster<double>(1, 1, 1.0));
    write_png(dir / "white.png", white);
    const RgbFrame w = read_png(dir / "white.png");
    CHECK(w.r(0, 0) == 1.0);
    CHECK(w.g(0, 0) == 1.0);
    CHECK(w.b(0, 0) == 1.0);

    put_bytes(dir / "corrupt.png", {'n', 'o', 't', 'p', 'n', 'g', '!', '!'});
    CHECK_THROWS_AS(read_png(dir / "corrupt.png"), FormatError);
}

TEST_CASE("ply4d: float32 round trip, empty set, golden 2-point file") {
    const fs::path dir = temp_dir();
    PointSet4D set;
    set.alpha = 0.03;
    Rng rng(17);
    for (int i = 0; i < 64; ++i)
        set.points.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.1, 5),
                              static_cast<double>(i % 8)});
    write_ply4d(dir / "pts.ply", set);
    const PointSet4D back = read_ply4d(dir / "pts.ply");
    REQUIRE(back.points.size() == set.points.size());
    CHECK(back.alpha == doctest::Approx(0.03));
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        CHECK(back.points[i].x == static_cast<float>(set.points[i].x));
        CHECK(back.points[i].y == static_cast<float>(set.points[i].y));
        CHECK(back.points[i].z == static_cast<float>(set.points[i].z));
        CHECK(back.points[i].tau == set.points[i].tau);
    }

    PointSet4D empty;
    write_ply4d(dir / "empty.ply", empty);
    CHECK(read_ply4d(dir / "empty.ply").points.empty());

    std::ofstream golden(dir / "golden.ply");
    golden << "ply\nformat ascii 1.0\ncomment alpha 0.05\nelement vertex 2\n"
              "property float x\nproperty float y\nproperty float z\nproperty float tau\n"
              "end_header\n1 2 3 0\n-1.5 0 4.25 7\n";
    golden.close();
    const PointSet4D g = read_ply4d(dir / "golden.ply");
    REQUIRE(g.points.size() == 2);
    CHECK(g.alpha == 0.05);
    CHECK(g.points[0].x == 1.0);
    CHECK(g.points[1].z == 4.25);
    CHECK(g.points[1].tau == 7.0);
}

TEST_CASE("manifest: round trip, validation, version gate") {
    const fs::path dir = temp_dir() / "seq";
    fs::create_directories(dir / "depth");

    SequenceManifest m;
    m.frame_count = 2;
    m.fps = 24.0;
    m.width = 2;
    m.height = 2;
    m.intrinsics = {10.0, 10.0, 0.5, 0.5, 2, 2};
    m.extrinsics.assign(2, CameraPose{});
    m.modalities = {{"depth", "depth/%06d.d4df"}};
    m.provenance = {{"generator", "external"}};
    write_manifest(dir / "manifest.json", m);

    const SequenceManifest back = read_manifest(dir / "manifest.json");
    CHECK(back.frame_count == 2);
    CHECK(back.fps == 24.0);
    CHECK(back.intrinsics.fx == 10.0);
    CHECK(back.modalities.at("depth") == "depth/%06d.d4df");
    CHECK(back.extrinsics.size() == 2);

    // Missing depth files: validation names the path.
    try {
        validate_manifest(back, dir);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("000000.d4df") != std::string::npos);
    }
    const DepthMap d(Raster<double>(2, 2, 1.0), Mask(2, 2, 1));
    write_depth(dir / "depth" / "000000.d4df", d);
    write_depth(dir / "depth" / "000001.d4df", d);
    CHECK_NOTHROW(validate_manifest(back, dir));

    // Version bump is rejected with a clear message.
    std::ifstream in(dir / "manifest.json");
    nlohmann::json j = nlohmann::json::parse(in);
    in.close();
    j["schema_version"] = 2;
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << j.dump(2);
    out.close();
    try {
        read_manifest(dir / "manifest.json");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
    }
}

TEST_CASE("scene spec json round trip is structural") {
    SceneSpec spec;
    ObjectSpec o;
    o.shape = Shape::box;
    o.size = 0.2;
    o.initial_position = {0.1, 0.5, -0.2};
    o.initial_velocity = {1.0, 0.0, 0.25};
    o.density = 1234.0;
    o.restitution = 0.66;
    o.friction = 0.4;
    o.albedo = {0.2, 0.4, 0.8};
    spec.objects.push_back(o);
    spec.gravity = 11.0;
    spec.duration = 0.5;
    spec.rng_seed = 99;
    const SceneSpec back = scene_spec_from_json(scene_spec_to_json(spec));
    CHECK(back.objects.size() == 1);
    CHECK(back.objects[0].shape == Shape::box);
    CHECK(back.objects[0].size == 0.2);
    CHECK(back.objects[0].density == 1234.0);
    CHECK(back.gravity == 11.0);
    CHECK(back.rng_seed == 99);
    CHECK((back.objects[0].initial_velocity - o.initial_velocity).norm() == 0.0);
}
