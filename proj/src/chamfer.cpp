#include "world4d/chamfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "world4d/parallel.hpp"
#include "world4d/rng.hpp"

namespace world4d {

double dist4d(const Point4D& p, const Point4D& q, double alpha) {
    if (!(alpha > 0.0)) throw InvalidInputError("dist4d: alpha must be > 0");
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    const double dz = p.z - q.z;
    const double dt = p.tau - q.tau;
    return dx * dx + dy * dy + dz * dz + alpha * alpha * dt * dt;
}

namespace {

// (x, y, z, alpha*tau) embedding; squared Euclidean distance here equals
// dist4d up to rounding of the time coordinate product.
struct Embedded {
    std::vector<double> c[4];
    std::size_t size = 0;
};

Embedded embed(const PointSet4D& set, double alpha) {
    Embedded e;
    e.size = set.points.size();
    for (auto& v : e.c) v.reserve(e.size);
    for (const auto& p : set.points) {
        e.c[0].push_back(p.x);
        e.c[1].push_back(p.y);
        e.c[2].push_back(p.z);
        e.c[3].push_back(alpha * p.tau);
    }
    return e;
}

inline double sq_dist(const Embedded& a, std::size_t i, const double q[4]) {
    const double d0 = a.c[0][i] - q[0];
    const double d1 = a.c[1][i] - q[1];
    const double d2 = a.c[2][i] - q[2];
    const double d3 = a.c[3][i] - q[3];
    return d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
}

double nn_brute(const Embedded& target, const double q[4]) {
    double best = std::numeric_limits<double>::infinity();
    const double* t0 = target.c[0].data();
    const double* t1 = target.c[1].data();
    const double* t2 = target.c[2].data();
    const double* t3 = target.c[3].data();
    for (std::size_t j = 0; j < target.size; ++j) {
        const double d0 = t0[j] - q[0];
        const double d1 = t1[j] - q[1];
        const double d2 = t2[j] - q[2];
        const double d3 = t3[j] - q[3];
        const double d = d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
        best = std::min(best, d);
    }
    return best;
}

// Static k-d tree over the 4D embedding. Nodes split the widest dimension at
// the median; leaves hold up to 16 points. The far subtree is visited whenever
// it could contain a point at a distance strictly below the current best, so
// the returned minimum matches an exhaustive scan exactly.
class KdTree4 {
public:
    explicit KdTree4(const Embedded& pts) : pts_(pts) {
        order_.resize(pts.size);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        nodes_.reserve(pts.size / 8 + 8);
        root_ = build(0, pts.size);
    }

    double nearest(const double q[4]) const {
        double best = std::numeric_limits<double>::infinity();
        search(root_, q, best);
        return best;
    }

private:
    struct Node {
        int split_dim = -1;  // -1 marks a leaf
        double split_val = 0.0;
        std::int32_t left = -1, right = -1;
        std::uint32_t begin = 0, end = 0;
    };

    std::int32_t build(std::size_t begin, std::size_t end) {
        Node node;
        node.begin = static_cast<std::uint32_t>(begin);
        node.end = static_cast<std::uint32_t>(end);
        if (end - begin > 16) {
            int dim = 0;
            double widest = -1.0;
            for (int d = 0; d < 4; ++d) {
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (std::size_t i = begin; i < end; ++i) {
                    const double x = pts_.c[d][order_[i]];
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
                if (hi - lo > widest) {
                    widest = hi - lo;
                    dim = d;
                }
            }
            if (widest > 0.0) {
                const std::size_t mid = begin + (end - begin) / 2;
                std::nth_element(order_.begin() + begin, order_.begin() + mid,
                                 order_.begin() + end, [&](std::size_t a, std::size_t b) {
                                     return pts_.c[dim][a] < pts_.c[dim][b];
                                 });
                node.split_dim = dim;
                node.split_val = pts_.c[dim][order_[mid]];
                const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
                nodes_.push_back(node);
                const std::int32_t l = build(begin, mid);
                const std::int32_t r = build(mid, end);
                nodes_[id].left = l;
                nodes_[id].right = r;
                return id;
            }
        }
        const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(node);
        return id;
    }

    void search(std::int32_t id, const double q[4], double& best) const {
        const Node& node = nodes_[id];
        if (node.split_dim < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i)
                best = std::min(best, sq_dist(pts_, order_[i], q));
            return;
        }
        const double diff = q[node.split_dim] - node.split_val;
        const std::int32_t near = diff < 0.0 ? node.left : node.right;
        const std::int32_t far = diff < 0.0 ? node.right : node.left;
        search(near, q, best);
        if (diff * diff < best) search(far, q, best);
    }

    const Embedded& pts_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

// Mean nearest-neighbor distance from every query point into target. Partial
// sums are produced per fixed-size block and reduced in block order, so the
// result does not depend on the worker count.
double mean_nn(const Embedded& query, const Embedded& target, ChamferAcceleration accel,
               int workers) {
    constexpr std::size_t kBlock = 1024;
    const std::size_t blocks = (query.size + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks, 0.0);

    std::optional<KdTree4> tree_storage;
    if (accel == ChamferAcceleration::indexed) tree_storage.emplace(target);
    const KdTree4* tree = tree_storage ? &*tree_storage : nullptr;

    parallel_for(
        blocks, workers,
        [&](std::size_t b) {
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(query.size, lo + kBlock);
            double acc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                const double q[4] = {query.c[0][i], query.c[1][i], query.c[2][i],
                                     query.c[3][i]};
                acc += tree ? tree->nearest(q) : nn_brute(target, q);
            }
            partial[b] = acc;
        },
        1);

    double total = 0.0;
    for (double s : partial) total += s;
    return total / static_cast<double>(query.size);
}

}  // namespace

double chamfer4d(const PointSet4D& gen, const PointSet4D& gt, const ChamferConfig& cfg,
                 int workers) {
    if (!(cfg.alpha > 0.0)) throw InvalidInputError("chamfer4d: alpha must be > 0");
    if (gen.points.empty() || gt.points.empty())
        throw EmptySetError("chamfer4d: operand point set is empty");
    const Embedded a = embed(gen, cfg.alpha);
    const Embedded b = embed(gt, cfg.alpha);
    return mean_nn(a, b, cfg.acceleration, workers) +
           mean_nn(b, a, cfg.acceleration, workers);
}

double reward(const PointSet4D& gen, const PointSet4D& gt, const ChamferConfig& cfg,
              int workers) {
    return -chamfer4d(gen, gt, cfg, workers);
}

PointSet4D subsample_points(const PointSet4D& set, std::size_t budget, std::uint64_t seed) {
    if (budget == 0 || set.points.size() <= budget) return set;
    std::vector<std::size_t> idx(set.points.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    PointSet4D out;
    out.alpha = set.alpha;
    out.points.reserve(budget);
    for (std::size_t i = 0; i < budget; ++i) {
        const std::size_t j = i + rng.uniform_index(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out.points.push_back(set.points[idx[i]]);
    }
    return out;
}

}  // namespace world4d
