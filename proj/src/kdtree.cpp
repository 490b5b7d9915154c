#include "usv/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace usv::cloud {

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points), order_(points.size()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    std::iota(order_.begin(), order_.end(), 0u);
    if (!order_.empty()) {
        nodes_.reserve(2 * (order_.size() / leaf_size_ + 1));
        build(0, static_cast<std::uint32_t>(order_.size()));
    }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();

    Eigen::Vector3d lo = points_[order_[begin]];
    Eigen::Vector3d hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;

    if (end - begin <= leaf_size_) return id;

    int dim = 0;
    (hi - lo).maxCoeff(&dim);
    if (hi(dim) - lo(dim) <= 0.0) return id;  // all points coincide

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return points_[a](dim) < points_[b](dim);
                     });
    nodes_[id].dim = dim;
    nodes_[id].split = points_[order_[mid]](dim);
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::radius_search(const Vec3& query, double radius,
                           std::vector<std::uint32_t>& out) const {
    if (nodes_.empty()) return;
    const double r2 = radius * radius;
    std::int32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
        // squared distance from query to the node's bounding box, and to its far corner
        double near2 = 0.0;
        double far2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double dlo = node.lo(k) - query(k);
            const double dhi = query(k) - node.hi(k);
            if (dlo > 0.0) {
                near2 += dlo * dlo;
            } else if (dhi > 0.0) {
                near2 += dhi * dhi;
            }
            const double a = std::abs(node.lo(k) - query(k));
            const double b = std::abs(node.hi(k) - query(k));
            const double m = std::max(a, b);
            far2 += m * m;
        }
        if (near2 > r2) continue;
        if (far2 <= r2) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) out.push_back(order_[i]);
            continue;
        }
        if (node.left < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                if (squared_distance(points_[order_[i]], query) <= r2) out.push_back(order_[i]);
            }
            continue;
        }
        stack[top++] = node.left;
        stack[top++] = node.right;
    }
}

KdTree::Consumption KdTree::start_consuming() const {
    Consumption state;
    state.remaining.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) state.remaining[i] = nodes_[i].end - nodes_[i].begin;
    state.taken.assign(order_.size(), 0);
    return state;
}

void KdTree::radius_consume(const Vec3& query, double radius, Consumption& state,
                            std::vector<std::uint32_t>& out) const {
    if (nodes_.empty()) return;
    consume(0, query, radius * radius, state, out);
}

std::uint32_t KdTree::consume(std::int32_t id, const Vec3& query, double r2, Consumption& state,
                              std::vector<std::uint32_t>& out) const {
    const auto slot = static_cast<std::size_t>(id);
    if (state.remaining[slot] == 0) return 0;
    const Node& node = nodes_[slot];
    double near2 = 0.0;
    double far2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double dlo = node.lo(k) - query(k);
        const double dhi = query(k) - node.hi(k);
        if (dlo > 0.0) {
            near2 += dlo * dlo;
        } else if (dhi > 0.0) {
            near2 += dhi * dhi;
        }
        const double m = std::max(std::abs(node.lo(k) - query(k)), std::abs(node.hi(k) - query(k)));
        far2 += m * m;
    }
    if (near2 > r2) return 0;

    std::uint32_t claimed = 0;
    if (node.left < 0) {
        const bool all_inside = far2 <= r2;
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const std::uint32_t p = order_[i];
            if (state.taken[p]) continue;
            if (!all_inside && squared_distance(points_[p], query) > r2) continue;
            state.taken[p] = 1;
            out.push_back(p);
            ++claimed;
        }
    } else {
        claimed = consume(node.left, query, r2, state, out) + consume(node.right, query, r2, state, out);
    }
    state.remaining[slot] -= claimed;
    return claimed;
}

}  // namespace usv::cloud
