#include "world4d/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "world4d/rng.hpp"

namespace world4d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeEps = 1e-12;

}  // namespace

double ObjectSpec::volume() const {
    if (shape == Shape::sphere) return 4.0 / 3.0 * std::numbers::pi * size * size * size;
    return size * size * size;
}

void SceneSpec::validate() const {
    if (objects.empty()) throw InvalidInputError("scene: needs at least one object");
    if (!(fps > 0.0)) throw InvalidInputError("scene: fps must be > 0");
    if (!(duration > 0.0)) throw InvalidInputError("scene: duration must be > 0");
    if (!(gravity >= 0.0)) throw InvalidInputError("scene: gravity must be >= 0");
    for (const auto& o : objects) {
        if (!(o.size > 0.0)) throw InvalidInputError("scene: object size must be > 0");
        if (!(o.density > 0.0)) throw InvalidInputError("scene: density must be > 0");
        if (!(o.restitution >= 0.0 && o.restitution < 1.0))
            throw InvalidInputError("scene: restitution must be in [0, 1)");
        if (o.friction < 0.0) throw InvalidInputError("scene: friction must be >= 0");
        if (o.initial_position.y() < ground_plane + o.clearance() - 1e-12)
            throw InvalidInputError("scene: object initialized below the ground plane");
    }
}

namespace {

struct Body {
    // Closed-form segment starting at t0: free flight under gravity, or a
    // ground-resting slide with constant friction deceleration.
    double t0 = 0.0;
    Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
    Eigen::Vector3d v0 = Eigen::Vector3d::Zero();
    bool resting = false;
    double slide_stop = kInf;  // absolute time the resting slide reaches zero speed

    const ObjectSpec* spec = nullptr;
    double gravity = 9.81;
    double rest_y = 0.0;  // ground_plane + clearance

    Eigen::Vector3d position(double t) const {
        double dt = t - t0;
        if (resting) {
            dt = std::min(dt, slide_stop - t0);
            const Eigen::Vector3d h = v0 * dt + 0.5 * decel() * dt * dt;
            return {p0.x() + h.x(), rest_y, p0.z() + h.z()};
        }
        return {p0.x() + v0.x() * dt, p0.y() + v0.y() * dt - 0.5 * gravity * dt * dt,
                p0.z() + v0.z() * dt};
    }

    Eigen::Vector3d velocity(double t) const {
        double dt = t - t0;
        if (resting) {
            if (t >= slide_stop) return Eigen::Vector3d::Zero();
            return v0 + decel() * dt;
        }
        return {v0.x(), v0.y() - gravity * dt, v0.z()};
    }

    Eigen::Vector3d decel() const {
        const double speed = v0.norm();
        if (speed <= 0.0) return Eigen::Vector3d::Zero();
        return -(spec->friction * gravity) * (v0 / speed);
    }

    void rebase(double t) {
        const Eigen::Vector3d p = position(t);
        const Eigen::Vector3d v = velocity(t);
        t0 = t;
        p0 = p;
        v0 = v;
        if (resting) {
            p0.y() = rest_y;
            v0.y() = 0.0;
            const double a = spec->friction * gravity;
            slide_stop = a > 0.0 ? t + v0.norm() / a : kInf;
        }
    }

    // Both transitions assume the segment was already rebased to time t and
    // v0 holds the post-event velocity.
    void enter_rest(double t) {
        t0 = t;
        resting = true;
        p0.y() = rest_y;
        v0.y() = 0.0;
        const double a = spec->friction * gravity;
        slide_stop = a > 0.0 ? t + v0.norm() / a : kInf;
    }

    void leave_rest(double t) {
        t0 = t;
        resting = false;
        slide_stop = kInf;
    }
};

// Absolute time of the next ground contact: smallest admissible root of
// -g/2 tau^2 + vy tau + (y - yc) = 0 with tau > kTimeEps and a downward
// crossing. Uses the numerically stable quadratic form.
std::optional<double> ground_contact_time(const Body& b, double now, double horizon) {
    if (b.resting) return std::nullopt;
    const Eigen::Vector3d p = b.position(now);
    const Eigen::Vector3d v = b.velocity(now);
    const double bq = v.y();
    const double c = p.y() - b.rest_y;
    // Already at the surface and not rising: contact right now. The bounce
    // resolver turns a near-zero approach speed into a resting state.
    if (c <= 1e-12 && bq <= 1e-9) return now <= horizon ? std::optional<double>(now)
                                                        : std::nullopt;
    if (b.gravity == 0.0) {
        if (bq >= 0.0) return std::nullopt;
        const double tau = -c / bq;
        if (tau > kTimeEps && now + tau <= horizon + kTimeEps) return now + tau;
        return std::nullopt;
    }
    const double a = -0.5 * b.gravity;
    const double disc = bq * bq - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double r1, r2;
    if (bq == 0.0 && sq == 0.0) {
        r1 = r2 = 0.0;
    } else {
        const double q = -0.5 * (bq + std::copysign(sq, bq));
        r1 = q / a;
        r2 = q != 0.0 ? c / q : r1;
    }
    if (r1 > r2) std::swap(r1, r2);
    for (double tau : {r1, r2})
        if (tau > kTimeEps && now + tau <= horizon + kTimeEps &&
            bq - b.gravity * tau < 0.0)
            return now + tau;
    return std::nullopt;
}

// Earliest touching time of the bounding spheres within (now, horizon].
std::optional<double> pair_contact_time(const Body& a, const Body& b, double now,
                                        double horizon) {
    const double radius = a.spec->bounding_radius() + b.spec->bounding_radius();
    const auto gap = [&](double t) {
        return (a.position(t) - b.position(t)).squaredNorm() - radius * radius;
    };
    if (!a.resting && !b.resting) {
        // Identical gravitational acceleration cancels: relative motion is linear.
        const Eigen::Vector3d dp = a.position(now) - b.position(now);
        const Eigen::Vector3d dv = a.velocity(now) - b.velocity(now);
        const double qa = dv.squaredNorm();
        const double qb = 2.0 * dp.dot(dv);
        const double qc = dp.squaredNorm() - radius * radius;
        if (qc <= 0.0) {
            // Already touching; report only if approaching.
            return qb < -1e-7 ? std::optional<double>(now + kTimeEps) : std::nullopt;
        }
        if (qa <= 0.0) return std::nullopt;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0) return std::nullopt;
        const double tau = (-qb - std::sqrt(disc)) / (2.0 * qa);
        if (tau > kTimeEps && now + tau <= horizon + kTimeEps) return now + tau;
        return std::nullopt;
    }
    // Mixed free/resting segments make the gap quartic; scan for the first
    // sign change and refine by bisection.
    constexpr int kSteps = 128;
    double prev_t = now;
    double prev_g = gap(now);
    if (prev_g <= 0.0) {
        const Eigen::Vector3d dp = a.position(now) - b.position(now);
        const Eigen::Vector3d dv = a.velocity(now) - b.velocity(now);
        return dp.dot(dv) < -1e-7 ? std::optional<double>(now + kTimeEps) : std::nullopt;
    }
    for (int i = 1; i <= kSteps; ++i) {
        const double t = now + (horizon - now) * i / kSteps;
        const double g = gap(t);
        if (g <= 0.0) {
            double lo = prev_t, hi = t;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (gap(mid) > 0.0 ? lo : hi) = mid;
            }
            return hi;
        }
        prev_t = t;
        prev_g = g;
    }
    return std::nullopt;
}

void resolve_ground_bounce(Body& b, double t, std::vector<ContactEvent>& events, int index) {
    b.rebase(t);
    b.p0.y() = b.rest_y;  // contact is exact, kill the root residual
    const double vy_in = b.v0.y();
    const double vy_out = -b.spec->restitution * vy_in;
    const double dv_n = std::abs(vy_out - vy_in);
    Eigen::Vector3d vt(b.v0.x(), 0.0, b.v0.z());
    const double vt_norm = vt.norm();
    if (vt_norm > 0.0) {
        const double factor =
            std::clamp(1.0 - b.spec->friction * dv_n / vt_norm, 0.0, 1.0);
        vt *= factor;
    }
    events.push_back({t, ContactEvent::Kind::ground, index, -1});
    // Rebound apex below 1e-9 m means the bounce cascade has converged.
    const double apex = b.gravity > 0.0 ? vy_out * vy_out / (2.0 * b.gravity)
                                        : (vy_out > 1e-9 ? kInf : 0.0);
    if (apex < 1e-9) {
        b.v0 = Eigen::Vector3d(vt.x(), 0.0, vt.z());
        b.enter_rest(t);
    } else {
        b.v0 = Eigen::Vector3d(vt.x(), vy_out, vt.z());
    }
}

void resolve_pair_impulse(Body& a, Body& b, double t, std::vector<ContactEvent>& events,
                          int ia, int ib) {
    a.rebase(t);
    b.rebase(t);
    Eigen::Vector3d n = b.p0 - a.p0;
    const double dist = n.norm();
    if (dist <= 0.0) return;
    n /= dist;
    const double rel_n = (b.v0 - a.v0).dot(n);
    if (rel_n >= 0.0) return;  // separating
    double e = std::sqrt(a.spec->restitution * b.spec->restitution);
    if (-rel_n < 1e-4) e = 0.0;  // kill micro-bounce chatter
    const double inv_mass = 1.0 / a.spec->mass() + 1.0 / b.spec->mass();
    const double impulse = -(1.0 + e) * rel_n / inv_mass;
    a.v0 -= impulse / a.spec->mass() * n;
    b.v0 += impulse / b.spec->mass() * n;
    events.push_back({t, ContactEvent::Kind::pair, ia, ib});
    if (a.resting && a.v0.y() > 1e-9) a.leave_rest(t);
    if (b.resting && b.v0.y() > 1e-9) b.leave_rest(t);
    if (a.resting) {
        a.v0.y() = 0.0;
        a.enter_rest(t);
    }
    if (b.resting) {
        b.v0.y() = 0.0;
        b.enter_rest(t);
    }
}

}  // namespace

SceneTrace simulate(const SceneSpec& spec) {
    spec.validate();

    std::vector<Body> bodies;
    bodies.reserve(spec.objects.size());
    for (const auto& o : spec.objects) {
        Body b;
        b.spec = &o;
        b.gravity = spec.gravity;
        b.rest_y = spec.ground_plane + o.clearance();
        b.p0 = o.initial_position;
        b.v0 = o.initial_velocity;
        bodies.push_back(b);
    }

    SceneTrace trace;
    trace.spec = spec;
    const int frames = spec.frame_count();
    trace.timestamps.reserve(frames);
    trace.frames.reserve(frames);

    double now = 0.0;
    const int n = static_cast<int>(bodies.size());
    for (int f = 0; f < frames; ++f) {
        const double t_frame = static_cast<double>(f) / spec.fps;
        // Advance through all contact events inside (now, t_frame].
        int guard = 0;
        const int guard_max = 64 * n * n + 256;
        while (guard++ < guard_max) {
            double t_event = kInf;
            int kind = -1, ea = -1, eb = -1;
            for (int i = 0; i < n; ++i)
                if (const auto tg = ground_contact_time(bodies[i], now, t_frame))
                    if (*tg < t_event) {
                        t_event = *tg;
                        kind = 0;
                        ea = i;
                    }
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (const auto tp = pair_contact_time(bodies[i], bodies[j], now, t_frame))
                        if (*tp < t_event) {
                            t_event = *tp;
                            kind = 1;
                            ea = i;
                            eb = j;
                        }
            if (kind < 0 || t_event > t_frame) break;
            if (kind == 0)
                resolve_ground_bounce(bodies[ea], t_event, trace.events, ea);
            else
                resolve_pair_impulse(bodies[ea], bodies[eb], t_event, trace.events, ea, eb);
            now = t_event;
        }
        now = t_frame;

        trace.timestamps.push_back(t_frame);
        std::vector<ObjectState> states;
        states.reserve(n);
        for (const auto& b : bodies) {
            ObjectState s;
            s.position = b.position(t_frame);
            s.velocity = b.velocity(t_frame);
            s.on_ground = b.resting;
            states.push_back(s);
        }
        trace.frames.push_back(std::move(states));
    }
    return trace;
}

namespace {

Eigen::Vector3d sample_albedo(Rng& rng) {
    return {rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95), rng.uniform(0.15, 0.95)};
}

}  // namespace

SceneSpec randomize_scene(Complexity complexity, std::uint64_t seed) {
    Rng rng(seed);
    SceneSpec spec;
    spec.rng_seed = seed;
    spec.gravity = rng.uniform(5.0, 15.0);
    spec.ground_plane = 0.0;
    spec.duration = 1.0;
    spec.fps = 24.0;
    spec.perturbation_ratio = rng.uniform(0.05, 0.25);
    spec.light_dir =
        Eigen::Vector3d(rng.uniform(-0.6, 0.6), -1.0, rng.uniform(-0.6, 0.6)).normalized();

    std::size_t count = 1;
    double size_lo = 0.06, size_hi = 0.18;
    switch (complexity) {
        case Complexity::single: count = 1; break;
        case Complexity::two_body:
            count = 2;
            size_lo = 0.05;
            size_hi = 0.14;
            break;
        case Complexity::multi:
            count = 3 + rng.uniform_index(4);  // 3..6
            size_lo = 0.04;
            size_hi = 0.10;
            break;
    }

    const double delta = spec.perturbation_ratio;
    for (std::size_t i = 0; i < count; ++i) {
        ObjectSpec o;
        o.shape = rng.uniform() < 0.5 ? Shape::sphere : Shape::box;
        double size = rng.uniform(size_lo, size_hi);
        if (o.shape == Shape::box) size *= 1.6;  // edge length vs radius
        size *= 1.0 + rng.uniform(-delta, delta);
        o.size = std::clamp(size, 0.03, 0.32);
        o.density = rng.uniform(100.0, 10000.0);
        o.restitution = rng.uniform(0.1, 0.95);
        o.friction = rng.uniform(0.1, 1.0);
        o.albedo = sample_albedo(rng);
        Eigen::Vector3d v(rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.5),
                          rng.uniform(-1.0, 1.0));
        o.initial_velocity = v * (1.0 + rng.uniform(-delta, delta));

        // Rejection placement: above ground, separated from earlier objects.
        for (int attempt = 0;; ++attempt) {
            if (attempt > 10000)
                throw Error("randomize_scene: could not place objects without overlap");
            const Eigen::Vector3d pos(rng.uniform(-0.5, 0.5),
                                      rng.uniform(o.clearance() + 0.05, 1.1),
                                      rng.uniform(-0.5, 0.5));
            bool ok = true;
            for (const auto& other : spec.objects)
                if ((pos - other.initial_position).norm() <
                    1.15 * (o.bounding_radius() + other.bounding_radius()))
                    ok = false;
            if (ok) {
                o.initial_position = pos;
                break;
            }
        }
        spec.objects.push_back(o);
    }
    spec.validate();
    return spec;
}

SceneSpec randomize_scene(std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    const double u = rng.uniform();
    Complexity c = u < 0.30 ? Complexity::single
                            : (u < 0.65 ? Complexity::two_body : Complexity::multi);
    return randomize_scene(c, seed);
}

}  // namespace world4d
