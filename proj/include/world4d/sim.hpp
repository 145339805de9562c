#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "world4d/error.hpp"

namespace world4d {

enum class Shape { sphere, box };

/// One rigid body. size is the sphere radius or the cube edge length. Boxes
/// stay axis-aligned (no angular dynamics).
struct ObjectSpec {
    Shape shape = Shape::sphere;
    double size = 0.1;
    Eigen::Vector3d initial_position = Eigen::Vector3d::Zero();
    Eigen::Vector3d initial_velocity = Eigen::Vector3d::Zero();
    double density = 1000.0;      // kg/m^3
    double restitution = 0.5;     // e
    double friction = 0.3;        // mu
    Eigen::Vector3d albedo = Eigen::Vector3d(0.7, 0.7, 0.7);

    double clearance() const { return shape == Shape::sphere ? size : 0.5 * size; }
    double bounding_radius() const {
        return shape == Shape::sphere ? size : 0.5 * std::sqrt(3.0) * size;
    }
    double volume() const;
    double mass() const { return density * volume(); }
};

struct SceneSpec {
    std::vector<ObjectSpec> objects;
    double gravity = 9.81;       // m/s^2, downward along -y
    double ground_plane = 0.0;   // world y of the ground
    double duration = 1.0;       // seconds
    double fps = 24.0;
    std::uint64_t rng_seed = 0;
    double perturbation_ratio = 0.0;  // delta used when the spec was randomized
    Eigen::Vector3d light_dir = Eigen::Vector3d(0.35, -0.85, 0.4).normalized();

    int frame_count() const { return static_cast<int>(duration * fps + 0.5) + 1; }
    void validate() const;
};

enum class Complexity { single, two_body, multi };

/// Deterministic scene draw with Table-range physical parameters and the
/// requested object count class (1 / 2 / 3-6).
SceneSpec randomize_scene(Complexity complexity, std::uint64_t seed);

/// Also samples the complexity class with the 30/35/35 curriculum mix.
SceneSpec randomize_scene(std::uint64_t seed);

struct ObjectState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
    bool on_ground = false;
};

struct ContactEvent {
    double time = 0.0;
    enum class Kind { ground, pair } kind = Kind::ground;
    int a = -1, b = -1;  // object indices; b is -1 for ground contacts
};

/// Exact piecewise-ballistic trajectory sampled at frame times.
struct SceneTrace {
    SceneSpec spec;
    std::vector<double> timestamps;
    std::vector<std::vector<ObjectState>> frames;  // [frame][object]
    std::vector<ContactEvent> events;

    int frame_count() const { return static_cast<int>(frames.size()); }
};

// Event-driven simulation. Ballistic arcs are closed-form between contacts;
// ground-contact times are exact quadratic roots, pair contacts use the
// quadratic fast path when both bodies are in free flight and a bisection
// refine otherwise. Ground bounces reflect the vertical velocity by -e and
// damp the tangential velocity by clamp(1 - mu*(1+e)|v_n|/|v_t|, 0, 1).
SceneTrace simulate(const SceneSpec& spec);

}  // namespace world4d
