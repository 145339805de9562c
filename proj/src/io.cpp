#include "world4d/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace world4d {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr float kFloMagic = 202021.25f;
constexpr double kFloInvalid = 1e10;

[[noreturn]] void format_fail(const fs::path& path, std::size_t offset,
                              const std::string& what) {
    throw FormatError(path.string() + ": " + what + " (byte offset " +
                      std::to_string(offset) + ")");
}

std::vector<char> read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open for reading");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return bytes;
}

void write_all(const fs::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw FormatError(path.string() + ": write failed");
}

template <class T>
T read_le(const std::vector<char>& bytes, std::size_t offset, const fs::path& path) {
    if (offset + sizeof(T) > bytes.size()) format_fail(path, offset, "truncated file");
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    return value;
}

template <class T>
void append_le(std::vector<char>& bytes, T value) {
    const std::size_t offset = bytes.size();
    bytes.resize(offset + sizeof(T));
    std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

}  // namespace

Raster<double> read_d4df(const fs::path& path) {
    const std::vector<char> bytes = read_all(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "D4DF", 4) != 0)
        format_fail(path, 0, "bad magic, expected \"D4DF\"");
    const auto version = read_le<std::uint32_t>(bytes, 4, path);
    if (version != 1)
        format_fail(path, 4, "unsupported version " + std::to_string(version) +
                                 ", this reader handles version 1");
    const auto width = read_le<std::uint32_t>(bytes, 8, path);
    const auto height = read_le<std::uint32_t>(bytes, 12, path);
    if (width == 0 || height == 0 || width > 1u << 20 || height > 1u << 20)
        format_fail(path, 8, "implausible dimensions");
    const std::size_t expected = 16 + std::size_t{4} * width * height;
    if (bytes.size() != expected)
        format_fail(path, bytes.size(),
                    "payload size mismatch, expected " + std::to_string(expected) + " bytes");
    Raster<double> raster(static_cast<int>(width), static_cast<int>(height), 0.0);
    for (std::size_t i = 0; i < raster.data().size(); ++i)
        raster.data()[i] = read_le<float>(bytes, 16 + 4 * i, path);
    return raster;
}

void write_d4df(const fs::path& path, const Raster<double>& raster) {
    std::vector<char> bytes;
    bytes.reserve(16 + 4 * raster.data().size());
    bytes.insert(bytes.end(), {'D', '4', 'D', 'F'});
    append_le<std::uint32_t>(bytes, 1);
    append_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(raster.width()));
    append_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(raster.height()));
    for (double v : raster.data()) append_le<float>(bytes, static_cast<float>(v));
    write_all(path, bytes.data(), bytes.size());
}

DepthMap read_depth(const fs::path& path) {
    return DepthMap::from_values(read_d4df(path));
}

void write_depth(const fs::path& path, const DepthMap& depth) {
    Raster<double> payload = depth.values;
    for (int v = 0; v < depth.height(); ++v)
        for (int u = 0; u < depth.width(); ++u)
            if (!depth.valid(u, v))
                payload(u, v) = std::numeric_limits<double>::quiet_NaN();
    write_d4df(path, payload);
}

FlowField read_flo(const fs::path& path) {
    const std::vector<char> bytes = read_all(path);
    const float magic = read_le<float>(bytes, 0, path);
    if (magic != kFloMagic) format_fail(path, 0, "bad magic, expected 202021.25");
    const auto width = read_le<std::int32_t>(bytes, 4, path);
    const auto height = read_le<std::int32_t>(bytes, 8, path);
    if (width <= 0 || height <= 0 || width > 1 << 20 || height > 1 << 20)
        format_fail(path, 4, "implausible dimensions");
    const std::size_t count = static_cast<std::size_t>(width) * height;
    const std::size_t expected = 12 + 8 * count;
    if (bytes.size() != expected)
        format_fail(path, bytes.size(),
                    "payload size mismatch, expected " + std::to_string(expected) + " bytes");
    Raster<double> du(width, height, 0.0), dv(width, height, 0.0);
    Mask valid(width, height, 0);
    for (std::size_t i = 0; i < count; ++i) {
        const float fu = read_le<float>(bytes, 12 + 8 * i, path);
        const float fv = read_le<float>(bytes, 16 + 8 * i, path);
        du.data()[i] = fu;
        dv.data()[i] = fv;
        valid.data()[i] = std::isfinite(fu) && std::isfinite(fv) &&
                          std::abs(fu) <= 1e9 && std::abs(fv) <= 1e9;
    }
    return FlowField(std::move(du), std::move(dv), std::move(valid));
}

void write_flo(const fs::path& path, const FlowField& flow) {
    std::vector<char> bytes;
    bytes.reserve(12 + 8 * flow.du.data().size());
    append_le<float>(bytes, kFloMagic);
    append_le<std::int32_t>(bytes, flow.width());
    append_le<std::int32_t>(bytes, flow.height());
    for (int v = 0; v < flow.height(); ++v)
        for (int u = 0; u < flow.width(); ++u) {
            if (flow.valid(u, v)) {
                append_le<float>(bytes, static_cast<float>(flow.du(u, v)));
                append_le<float>(bytes, static_cast<float>(flow.dv(u, v)));
            } else {
                append_le<float>(bytes, static_cast<float>(kFloInvalid));
                append_le<float>(bytes, static_cast<float>(kFloInvalid));
            }
        }
    write_all(path, bytes.data(), bytes.size());
}

namespace {

struct PngReadCtx {
    const std::vector<char>* bytes;
    std::size_t offset;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->offset + n > ctx->bytes->size()) png_error(png, "truncated PNG");
    std::memcpy(out, ctx->bytes->data() + ctx->offset, n);
    ctx->offset += n;
}

void png_write_fn(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<char>*>(png_get_io_ptr(png));
    out->insert(out->end(), reinterpret_cast<char*>(data), reinterpret_cast<char*>(data) + n);
}

void png_flush_fn(png_structp) {}

}  // namespace

RgbFrame read_png(const fs::path& path) {
    const std::vector<char> bytes = read_all(path);
    if (bytes.size() < 8 ||
        png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
        format_fail(path, 0, "not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(path.string() + ": libpng initialization failed");
    }
    std::vector<png_byte> raw;
    int width = 0, height = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": corrupt PNG");
    }
    PngReadCtx ctx{&bytes, 0};
    png_set_read_fn(png, &ctx, png_read_fn);
    png_read_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    if (png_get_rowbytes(png, info) != static_cast<png_size_t>(width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": unexpected PNG channel layout");
    }
    raw.resize(static_cast<std::size_t>(width) * height * 3);
    std::vector<png_bytep> rows(height);
    for (int v = 0; v < height; ++v)
        rows[v] = raw.data() + static_cast<std::size_t>(v) * width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Raster<double> r(width, height, 0.0), g(width, height, 0.0), b(width, height, 0.0);
    for (std::size_t i = 0; i < r.data().size(); ++i) {
        r.data()[i] = raw[3 * i + 0] / 255.0;
        g.data()[i] = raw[3 * i + 1] / 255.0;
        b.data()[i] = raw[3 * i + 2] / 255.0;
    }
    return RgbFrame(std::move(r), std::move(g), std::move(b));
}

void write_png(const fs::path& path, const RgbFrame& frame) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error(path.string() + ": libpng initialization failed");
    }
    std::vector<char> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(path.string() + ": PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_write_fn, png_flush_fn);
    png_set_IHDR(png, info, frame.width(), frame.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<std::size_t>(frame.width()) * 3);
    for (int v = 0; v < frame.height(); ++v) {
        for (int u = 0; u < frame.width(); ++u) {
            row[3 * u + 0] = static_cast<png_byte>(std::lround(frame.r(u, v) * 255.0));
            row[3 * u + 1] = static_cast<png_byte>(std::lround(frame.g(u, v) * 255.0));
            row[3 * u + 2] = static_cast<png_byte>(std::lround(frame.b(u, v) * 255.0));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    write_all(path, out.data(), out.size());
}

PointSet4D read_ply4d(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open for reading");
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line))
            throw FormatError(path.string() + ": truncated header, expected " +
                              std::string(what));
        return line;
    };
    if (next_line("ply magic") != "ply") throw FormatError(path.string() + ": not a PLY file");
    if (next_line("format line") != "format ascii 1.0")
        throw FormatError(path.string() + ": only \"format ascii 1.0\" is supported");

    PointSet4D set;
    std::size_t vertex_count = 0;
    std::vector<std::string> properties;
    bool saw_end = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment") {
            std::string key;
            ls >> key;
            if (key == "alpha") ls >> set.alpha;
        } else if (tok == "element") {
            std::string name;
            ls >> name >> vertex_count;
            if (name != "vertex")
                throw FormatError(path.string() + ": unexpected element \"" + name + "\"");
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            properties.push_back(name);
        } else if (tok == "end_header") {
            saw_end = true;
            break;
        } else {
            throw FormatError(path.string() + ": unexpected header token \"" + tok + "\"");
        }
    }
    if (!saw_end) throw FormatError(path.string() + ": missing end_header");
    if (properties != std::vector<std::string>{"x", "y", "z", "tau"})
        throw FormatError(path.string() + ": expected properties x, y, z, tau");

    set.points.reserve(vertex_count);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        // Properties are float32 on disk; parse at that precision so the
        // round trip is bit-exact at the float level.
        float x, y, z, tau;
        if (!(in >> x >> y >> z >> tau))
            throw FormatError(path.string() + ": truncated vertex data at index " +
                              std::to_string(i));
        set.points.push_back({x, y, z, tau});
    }
    return set;
}

void write_ply4d(const fs::path& path, const PointSet4D& set) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.9g", set.alpha);
    out << "ply\nformat ascii 1.0\ncomment alpha " << buf << "\nelement vertex "
        << set.points.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nproperty float tau\n"
           "end_header\n";
    for (const auto& p : set.points) {
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g\n",
                      static_cast<double>(static_cast<float>(p.x)),
                      static_cast<double>(static_cast<float>(p.y)),
                      static_cast<double>(static_cast<float>(p.z)),
                      static_cast<double>(static_cast<float>(p.tau)));
        out << buf;
    }
    if (!out) throw FormatError(path.string() + ": write failed");
}

std::filesystem::path SequenceManifest::frame_path(const fs::path& base_dir,
                                                   const std::string& modality,
                                                   int frame) const {
    const auto it = modalities.find(modality);
    if (it == modalities.end())
        throw InvalidInputError("manifest has no modality \"" + modality + "\"");
    const std::string& pattern = it->second;
    if (pattern.find('%') == std::string::npos) return base_dir / pattern;
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern.c_str(), frame);
    return base_dir / buf;
}

int SequenceManifest::modality_count(const std::string& modality) const {
    if (modality == "rgb" || modality == "depth" || modality == "object_id")
        return frame_count;
    if (modality == "points4d") return 1;
    return frame_count - 1;  // flow-like: one per adjacent frame pair
}

namespace {

const std::map<std::string, std::string> kUnits = {
    {"depth", "meters"}, {"flow", "pixels"}, {"scene_flow", "meters"}};

}  // namespace

SequenceManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open for reading");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": invalid JSON: " + e.what());
    }
    try {
        SequenceManifest m;
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != 1)
            throw FormatError(path.string() + ": unsupported schema_version " +
                              std::to_string(m.schema_version) +
                              ", this reader handles version 1");
        m.frame_count = j.at("frame_count").get<int>();
        m.fps = j.at("fps").get<double>();
        m.width = j.at("resolution").at("width").get<int>();
        m.height = j.at("resolution").at("height").get<int>();
        m.intrinsics = intrinsics_from_json(j.at("intrinsics"));
        for (const auto& e : j.at("extrinsics")) m.extrinsics.push_back(pose_from_json(e));
        for (const auto& [key, value] : j.at("modalities").items())
            m.modalities[key] = value.get<std::string>();
        m.provenance = j.value("provenance", json::object());
        if (m.frame_count <= 0)
            throw FormatError(path.string() + ": frame_count must be positive");
        if (static_cast<int>(m.extrinsics.size()) != m.frame_count)
            throw FormatError(path.string() + ": extrinsics count != frame_count");
        return m;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": manifest field error: " + e.what());
    }
}

void write_manifest(const fs::path& path, const SequenceManifest& manifest) {
    json j;
    j["schema_version"] = manifest.schema_version;
    j["frame_count"] = manifest.frame_count;
    j["fps"] = manifest.fps;
    j["resolution"] = {{"width", manifest.width}, {"height", manifest.height}};
    j["units"] = kUnits;
    j["intrinsics"] = intrinsics_to_json(manifest.intrinsics);
    json ext = json::array();
    for (const auto& pose : manifest.extrinsics) ext.push_back(pose_to_json(pose));
    j["extrinsics"] = std::move(ext);
    j["modalities"] = manifest.modalities;
    j["provenance"] = manifest.provenance;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw FormatError(path.string() + ": write failed");
}

void validate_manifest(const SequenceManifest& manifest, const fs::path& base_dir) {
    if (manifest.width != manifest.intrinsics.width ||
        manifest.height != manifest.intrinsics.height)
        throw FormatError("manifest: resolution does not match intrinsics raster size");
    manifest.intrinsics.validate();
    for (const auto& pose : manifest.extrinsics) pose.validate();
    for (const auto& [name, pattern] : manifest.modalities) {
        const int count = manifest.modality_count(name);
        for (int f = 0; f < count; ++f) {
            const fs::path p = manifest.frame_path(base_dir, name, f);
            if (!fs::exists(p))
                throw FormatError("manifest: missing file for modality \"" + name +
                                  "\": " + p.string());
            // Cheap header parse; full payload reads happen lazily at use.
            if (name == "rgb") {
                std::ifstream in(p, std::ios::binary);
                char sig[8] = {};
                in.read(sig, 8);
                if (png_sig_cmp(reinterpret_cast<png_const_bytep>(sig), 0, 8) != 0)
                    throw FormatError("manifest: " + p.string() + " is not a PNG");
            } else if (name == "flow" || name == "flow_bwd") {
                const FlowField ff = read_flo(p);
                if (ff.width() != manifest.width || ff.height() != manifest.height)
                    throw FormatError("manifest: " + p.string() + " has wrong dimensions");
            } else if (name != "points4d") {
                const Raster<double> r = read_d4df(p);
                if (r.width() != manifest.width || r.height() != manifest.height)
                    throw FormatError("manifest: " + p.string() + " has wrong dimensions");
            }
        }
    }
}

nlohmann::json scene_spec_to_json(const SceneSpec& spec) {
    json objects = json::array();
    for (const auto& o : spec.objects) {
        objects.push_back(
            {{"shape", o.shape == Shape::sphere ? "sphere" : "box"},
             {"size", o.size},
             {"initial_position",
              {o.initial_position.x(), o.initial_position.y(), o.initial_position.z()}},
             {"initial_velocity",
              {o.initial_velocity.x(), o.initial_velocity.y(), o.initial_velocity.z()}},
             {"density", o.density},
             {"restitution", o.restitution},
             {"friction", o.friction},
             {"albedo", {o.albedo.x(), o.albedo.y(), o.albedo.z()}}});
    }
    return {{"objects", std::move(objects)},
            {"gravity", spec.gravity},
            {"ground_plane", spec.ground_plane},
            {"duration", spec.duration},
            {"fps", spec.fps},
            {"rng_seed", spec.rng_seed},
            {"perturbation_ratio", spec.perturbation_ratio},
            {"light_dir", {spec.light_dir.x(), spec.light_dir.y(), spec.light_dir.z()}},
            {"friction_model", "tangential factor clamp(1 - mu*(1+e)|v_n|/|v_t|, 0, 1)"}};
}

SceneSpec scene_spec_from_json(const json& j) {
    try {
        SceneSpec spec;
        for (const auto& jo : j.at("objects")) {
            ObjectSpec o;
            const std::string shape = jo.at("shape").get<std::string>();
            if (shape == "sphere")
                o.shape = Shape::sphere;
            else if (shape == "box")
                o.shape = Shape::box;
            else
                throw InvalidInputError("scene spec: unknown shape \"" + shape + "\"");
            o.size = jo.at("size").get<double>();
            const auto p = jo.at("initial_position");
            o.initial_position = {p.at(0).get<double>(), p.at(1).get<double>(),
                                  p.at(2).get<double>()};
            const auto v = jo.at("initial_velocity");
            o.initial_velocity = {v.at(0).get<double>(), v.at(1).get<double>(),
                                  v.at(2).get<double>()};
            o.density = jo.at("density").get<double>();
            o.restitution = jo.at("restitution").get<double>();
            o.friction = jo.at("friction").get<double>();
            const auto a = jo.at("albedo");
            o.albedo = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
            spec.objects.push_back(o);
        }
        spec.gravity = j.at("gravity").get<double>();
        spec.ground_plane = j.at("ground_plane").get<double>();
        spec.duration = j.at("duration").get<double>();
        spec.fps = j.at("fps").get<double>();
        spec.rng_seed = j.value("rng_seed", std::uint64_t{0});
        spec.perturbation_ratio = j.value("perturbation_ratio", 0.0);
        if (j.contains("light_dir")) {
            const auto l = j.at("light_dir");
            spec.light_dir = {l.at(0).get<double>(), l.at(1).get<double>(),
                              l.at(2).get<double>()};
        }
        return spec;
    } catch (const json::exception& e) {
        throw FormatError(std::string("scene spec: field error: ") + e.what());
    }
}

nlohmann::json pose_to_json(const CameraPose& pose) {
    json rot = json::array();
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) rot.push_back(pose.rotation(row, col));
    return {{"rotation", std::move(rot)},
            {"translation",
             {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

CameraPose pose_from_json(const json& j) {
    try {
        CameraPose pose;
        const auto rot = j.at("rotation");
        if (rot.size() != 9) throw FormatError("pose: rotation must have 9 entries");
        for (int row = 0; row < 3; ++row)
            for (int col = 0; col < 3; ++col)
                pose.rotation(row, col) = rot.at(3 * row + col).get<double>();
        const auto t = j.at("translation");
        pose.translation = {t.at(0).get<double>(), t.at(1).get<double>(),
                            t.at(2).get<double>()};
        return pose;
    } catch (const json::exception& e) {
        throw FormatError(std::string("pose: field error: ") + e.what());
    }
}

nlohmann::json intrinsics_to_json(const CameraIntrinsics& K) {
    return {{"fx", K.fx}, {"fy", K.fy},        {"cx", K.cx},
            {"cy", K.cy}, {"width", K.width},  {"height", K.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
    try {
        CameraIntrinsics K;
        K.fx = j.at("fx").get<double>();
        K.fy = j.at("fy").get<double>();
        K.cx = j.at("cx").get<double>();
        K.cy = j.at("cy").get<double>();
        K.width = j.at("width").get<int>();
        K.height = j.at("height").get<int>();
        return K;
    } catch (const json::exception& e) {
        throw FormatError(std::string("intrinsics: field error: ") + e.what());
    }
}

}  // namespace world4d
