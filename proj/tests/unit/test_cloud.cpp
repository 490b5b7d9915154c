#include "usv/cloud.hpp"
#include "usv/kdtree.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

using namespace usv;
using namespace usv::cloud;

namespace {

PointCloud blob(const Vec3& center, std::size_t n, double spread, std::mt19937_64& rng,
                double timestamp = 0.0) {
    std::uniform_real_distribution<double> u(-spread, spread);
    PointCloud c{timestamp, {}};
    for (std::size_t i = 0; i < n; ++i) c.points.push_back(center + Vec3(u(rng), u(rng), 0.0));
    return c;
}

PointCloud concat(const PointCloud& a, const PointCloud& b) {
    PointCloud c = a;
    c.points.insert(c.points.end(), b.points.begin(), b.points.end());
    return c;
}

std::vector<std::vector<std::size_t>> partition(const std::vector<Cluster>& clusters) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& c : clusters) out.push_back(c.point_indices);
    return out;
}

PointCloud rectangle(double length, double width, double yaw, const Vec2& center) {
    PointCloud c;
    const Vec2 ax(std::cos(yaw), std::sin(yaw));
    const Vec2 perp(-ax.y(), ax.x());
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 4; ++j) {
            const Vec2 p = center + ax * (length * (i / 20.0 - 0.5)) + perp * (width * (j / 4.0 - 0.5));
            c.points.emplace_back(p.x(), p.y(), 0.0);
        }
    }
    return c;
}

Cluster all_of(const PointCloud& c) {
    Cluster cl;
    for (std::size_t i = 0; i < c.size(); ++i) cl.point_indices.push_back(i);
    return cl;
}

double yaw_diff(double a, double b) {
    double d = std::fmod(std::abs(a - b), std::numbers::pi);
    return std::min(d, std::numbers::pi - d);
}

}  // namespace

TEST(KdTree, RadiusSearchMatchesBruteForce) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 3000; ++i) pts.emplace_back(u(rng), u(rng), 0.3 * u(rng));
    KdTree tree(pts, 8);
    EXPECT_EQ(tree.size(), pts.size());
    for (int q = 0; q < 200; ++q) {
        const Vec3 query(u(rng), u(rng), u(rng) * 0.1);
        const double r = 0.5 + std::abs(u(rng)) * 0.3;
        std::vector<std::uint32_t> got;
        tree.radius_search(query, r, got);
        std::sort(got.begin(), got.end());
        std::vector<std::uint32_t> want;
        for (std::uint32_t i = 0; i < pts.size(); ++i) {
            if (squared_distance(pts[i], query) <= r * r) want.push_back(i);
        }
        EXPECT_EQ(got, want);
    }
}

TEST(KdTree, ConsumingSearchReportsEachPointOnce) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 2000; ++i) pts.emplace_back(u(rng), u(rng), 0.2 * u(rng));
    KdTree tree(pts, 8);
    auto state = tree.start_consuming();
    std::vector<char> seen(pts.size(), 0);
    for (int q = 0; q < 300; ++q) {
        const Vec3 query(u(rng), u(rng), 0.0);
        const double r = 0.3 + 0.2 * std::abs(u(rng));
        std::vector<std::uint32_t> got;
        tree.radius_consume(query, r, state, got);
        std::sort(got.begin(), got.end());
        std::vector<std::uint32_t> want;
        for (std::uint32_t i = 0; i < pts.size(); ++i) {
            if (!seen[i] && squared_distance(pts[i], query) <= r * r) want.push_back(i);
        }
        ASSERT_EQ(got, want);
        for (auto i : got) seen[i] = 1;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(state.taken[i], seen[i]);
}

TEST(KdTree, EmptyAndDuplicatePoints) {
    std::vector<Vec3> none;
    KdTree empty(none);
    std::vector<std::uint32_t> out;
    empty.radius_search(Vec3::Zero(), 1.0, out);
    EXPECT_TRUE(out.empty());

    std::vector<Vec3> same(100, Vec3(1, 2, 3));
    KdTree dup(same, 4);
    dup.radius_search(Vec3(1, 2, 3), 0.0, out);
    EXPECT_EQ(out.size(), 100u);
}

TEST(Accumulator, WindowOfThree) {
    std::mt19937_64 rng(1);
    CloudAccumulator acc(3);
    PointCloud merged;
    for (int i = 0; i < 4; ++i) merged = acc.accumulate(blob(Vec3::Zero(), 100, 1.0, rng, i));
    EXPECT_EQ(merged.size(), 300u);
    EXPECT_EQ(merged.timestamp, 3.0);
    EXPECT_EQ(acc.history().size(), 3u);
    EXPECT_EQ(acc.history().front().timestamp, 1.0);
}

TEST(Accumulator, WindowOneIsIdentity) {
    std::mt19937_64 rng(2);
    CloudAccumulator acc(1);
    acc.accumulate(blob(Vec3::Zero(), 10, 1.0, rng, 0.0));
    const auto in = blob(Vec3(5, 5, 0), 17, 1.0, rng, 1.0);
    const auto out = acc.accumulate(in);
    EXPECT_EQ(out.points, in.points);
}

TEST(Accumulator, EmptyCloudKeepsHistorySize) {
    std::mt19937_64 rng(3);
    CloudAccumulator acc(3);
    acc.accumulate(blob(Vec3::Zero(), 10, 1.0, rng, 0.0));
    acc.accumulate(blob(Vec3::Zero(), 20, 1.0, rng, 1.0));
    EXPECT_EQ(acc.accumulate(PointCloud{2.0, {}}).size(), 30u);
}

TEST(Accumulator, BoundedByWindowTimesLargest) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> n(0, 50);
    CloudAccumulator acc(3);
    std::size_t largest = 0;
    for (int i = 0; i < 30; ++i) {
        const auto c = blob(Vec3::Zero(), static_cast<std::size_t>(n(rng)), 1.0, rng, i);
        largest = std::max(largest, c.size());
        EXPECT_LE(acc.accumulate(c).size(), 3 * largest);
    }
}

TEST(Accumulator, Errors) {
    EXPECT_THROW(CloudAccumulator(0), Error);
    CloudAccumulator acc(2);
    acc.accumulate(PointCloud{5.0, {}});
    acc.accumulate(PointCloud{5.0, {}});  // equal timestamps are allowed
    try {
        acc.accumulate(PointCloud{4.0, {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::sequencing);
    }
}

TEST(Filter, RangeExamples) {
    PointCloud c{0.0, {Vec3(1.0, 0, 0), Vec3(150, 0, 0), Vec3(30, 40, 9), Vec3(0, 2.0, 0), Vec3(0, 0, 100)}};
    const auto f = filter_cloud(c, 2.0, 100.0);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f.points[0], Vec3(30, 40, 9));
    EXPECT_EQ(f.points[1], Vec3(0, 2.0, 0));
}

TEST(Filter, Idempotent) {
    std::mt19937_64 rng(5);
    const auto c = blob(Vec3::Zero(), 500, 150.0, rng);
    const auto once = filter_cloud(c, 2.0, 100.0);
    EXPECT_EQ(filter_cloud(once, 2.0, 100.0).points, once.points);
}

TEST(SeaPlane, IdentityExamples) {
    const auto p = project_to_sea_plane(PointCloud{0.0, {Vec3(1, 2, 3), Vec3(-4, 0, -7)}});
    EXPECT_EQ(p.points[0], Vec3(1, 2, 0));
    EXPECT_EQ(p.points[1], Vec3(-4, 0, 0));
}

TEST(SeaPlane, NinetyDegreeRoll) {
    const Eigen::Quaterniond q(Eigen::AngleAxisd(std::numbers::pi / 2.0, Vec3::UnitX()));
    const auto p = project_to_sea_plane(PointCloud{0.0, {Vec3(0, 0, 1)}}, q);
    EXPECT_NEAR((p.points[0] - Vec3(0, -1, 0)).norm(), 0.0, 1e-12);
    const Vec3 hand = oracle::rotate_by_hand(q.w(), q.x(), q.y(), q.z(), Vec3(0, 0, 1));
    EXPECT_NEAR((hand - Vec3(0, -1, 0)).norm(), 0.0, 1e-12);
}

TEST(SeaPlane, MatchesHandRotation) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
        q.normalize();
        const Vec3 p(g(rng) * 10, g(rng) * 10, g(rng) * 10);
        const auto out = project_to_sea_plane(PointCloud{0.0, {p}}, q);
        Vec3 hand = oracle::rotate_by_hand(q.w(), q.x(), q.y(), q.z(), p);
        hand.z() = 0.0;
        EXPECT_NEAR((out.points[0] - hand).norm(), 0.0, 1e-12);
    }
}

TEST(SeaPlane, NonUnitQuaternionRejected) {
    try {
        project_to_sea_plane(PointCloud{0.0, {Vec3(1, 0, 0)}}, Eigen::Quaterniond(1.1, 0, 0, 0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_orientation);
    }
    EXPECT_NO_THROW(project_to_sea_plane(PointCloud{0.0, {}}, Eigen::Quaterniond(1.0 + 5e-7, 0, 0, 0)));
}

TEST(Clustering, TwoSeparatedBlobs) {
    std::mt19937_64 rng(7);
    const auto c = concat(blob(Vec3(0, 0, 0), 50, 1.0, rng), blob(Vec3(10, 0, 0), 50, 1.0, rng));
    const auto clusters = euclidean_cluster(c, ClusterParams{3.0, 30, 10000});
    ASSERT_EQ(clusters.size(), 2u);
    EXPECT_EQ(clusters[0].size(), 50u);
    EXPECT_EQ(clusters[0].point_indices.front(), 0u);
    EXPECT_EQ(clusters[1].point_indices.front(), 50u);
    Vec3 mean = Vec3::Zero();
    for (std::size_t i = 0; i < 50; ++i) mean += c.points[i];
    EXPECT_NEAR((clusters[0].centroid - mean / 50.0).norm(), 0.0, 1e-12);
}

TEST(Clustering, SmallBlobDropped) {
    std::mt19937_64 rng(8);
    EXPECT_TRUE(euclidean_cluster(blob(Vec3::Zero(), 20, 1.0, rng), ClusterParams{}).empty());
}

TEST(Clustering, SizeOrderingAndMaxSize) {
    std::mt19937_64 rng(9);
    auto c = concat(blob(Vec3(0, 0, 0), 40, 1.0, rng), blob(Vec3(20, 0, 0), 80, 1.0, rng));
    c = concat(c, blob(Vec3(40, 0, 0), 40, 1.0, rng));
    const auto clusters = euclidean_cluster(c, ClusterParams{3.0, 30, 10000});
    ASSERT_EQ(clusters.size(), 3u);
    EXPECT_EQ(clusters[0].size(), 80u);
    EXPECT_EQ(clusters[1].point_indices.front(), 0u);
    EXPECT_EQ(clusters[2].point_indices.front(), 120u);
    EXPECT_EQ(euclidean_cluster(c, ClusterParams{3.0, 30, 50}).size(), 2u);
}

TEST(Clustering, MatchesUnionFindOracle) {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> n(0, 500);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::uniform_real_distribution<double> tol(0.5, 4.0);
    std::uniform_int_distribution<int> mins(1, 20);
    for (int trial = 0; trial < 100; ++trial) {
        PointCloud c;
        const int count = n(rng);
        for (int i = 0; i < count; ++i) c.points.emplace_back(u(rng), u(rng), trial % 2 ? 0.0 : u(rng) * 0.1);
        const ClusterParams params{tol(rng), static_cast<std::size_t>(mins(rng)), 200};
        EXPECT_EQ(partition(euclidean_cluster(c, params)),
                  oracle::union_find_clusters(c.points, params.tolerance, params.min_size, params.max_size));
    }
}

TEST(Clustering, PermutationInvariant) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    PointCloud c;
    for (int i = 0; i < 300; ++i) c.points.emplace_back(u(rng), u(rng), 0.0);
    std::vector<std::size_t> perm(c.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PointCloud shuffled;
    for (auto i : perm) shuffled.points.push_back(c.points[i]);
    const ClusterParams params{2.0, 3, 10000};
    auto as_sets = [](const std::vector<Cluster>& cl, const std::vector<std::size_t>* map) {
        std::set<std::set<std::size_t>> out;
        for (const auto& k : cl) {
            std::set<std::size_t> s;
            for (auto i : k.point_indices) s.insert(map ? (*map)[i] : i);
            out.insert(s);
        }
        return out;
    };
    EXPECT_EQ(as_sets(euclidean_cluster(c, params), nullptr),
              as_sets(euclidean_cluster(shuffled, params), &perm));
}

TEST(Clustering, SubsetIndicesReferToFullCloud) {
    std::mt19937_64 rng(12);
    const auto c = concat(blob(Vec3(0, 0, 0), 50, 1.0, rng), blob(Vec3(10, 0, 0), 50, 1.0, rng));
    std::vector<std::size_t> subset;
    for (std::size_t i = 50; i < 100; i += 2) subset.push_back(i);
    const auto clusters = euclidean_cluster(c, subset, ClusterParams{3.0, 5, 10000});
    ASSERT_EQ(clusters.size(), 1u);
    EXPECT_EQ(clusters[0].point_indices, subset);
}

TEST(Clustering, ParamsValidation) {
    EXPECT_THROW((ClusterParams{0.0, 30, 100}.validate()), Error);
    EXPECT_THROW((ClusterParams{1.0, 0, 100}.validate()), Error);
    EXPECT_THROW((ClusterParams{1.0, 50, 40}.validate()), Error);
}

TEST(OrientedBox, AxisAligned) {
    const auto c = rectangle(10.0, 2.0, 0.0, Vec2(3.0, -4.0));
    const auto b = fit_oriented_box(c, all_of(c));
    EXPECT_NEAR(yaw_diff(b.yaw, 0.0), 0.0, 1e-6);
    EXPECT_NEAR(b.length, 10.0, 1e-6);
    EXPECT_NEAR(b.width, 2.0, 1e-6);
    EXPECT_NEAR((b.center - Vec3(3.0, -4.0, 0.0)).norm(), 0.0, 1e-6);
    EXPECT_GE(b.yaw, 0.0);
    EXPECT_LT(b.yaw, std::numbers::pi);
}

TEST(OrientedBox, RotatedThirtyDegrees) {
    const double yaw = std::numbers::pi / 6.0;
    const auto c = rectangle(10.0, 2.0, yaw, Vec2(-7.0, 12.0));
    const auto b = fit_oriented_box(c, all_of(c));
    EXPECT_NEAR(b.yaw, yaw, 1e-6);
    EXPECT_NEAR(b.length, 10.0, 1e-6);
    EXPECT_NEAR(b.width, 2.0, 1e-6);
}

TEST(OrientedBox, RotationEquivariant) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const auto base = rectangle(8.0, 3.0, 0.3, Vec2(0, 0));
    const auto b0 = fit_oriented_box(base, all_of(base));
    for (int i = 0; i < 50; ++i) {
        const double theta = u(rng);
        PointCloud r = base;
        const Eigen::Rotation2Dd rot(theta);
        for (auto& p : r.points) {
            const Vec2 q = rot * Vec2(p.x(), p.y());
            p = Vec3(q.x(), q.y(), 0.0);
        }
        const auto b = fit_oriented_box(r, all_of(r));
        EXPECT_NEAR(yaw_diff(b.yaw, b0.yaw + theta), 0.0, 1e-6);
        EXPECT_NEAR(b.length, b0.length, 1e-6);
        EXPECT_NEAR(b.width, b0.width, 1e-6);
    }
}

TEST(OrientedBox, DegenerateClusters) {
    const PointCloud single{0.0, {Vec3(4, 5, 0)}};
    const auto b = fit_oriented_box(single, all_of(single));
    EXPECT_EQ(b.length, 0.0);
    EXPECT_EQ(b.width, 0.0);
    EXPECT_EQ(b.yaw, 0.0);
    EXPECT_EQ(b.center, Vec3(4, 5, 0));

    const PointCloud line{0.0, {Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(2, 2, 0)}};
    const auto l = fit_oriented_box(line, all_of(line));
    EXPECT_NEAR(l.width, 0.0, 1e-9);
    EXPECT_NEAR(l.length, std::sqrt(8.0), 1e-9);
    EXPECT_NEAR(l.yaw, std::numbers::pi / 4.0, 1e-9);

    try {
        fit_oriented_box(single, Cluster{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_cluster);
    }
}

TEST(OrientedBox, HeightFromZExtent) {
    PointCloud c = rectangle(4.0, 2.0, 0.0, Vec2(0, 0));
    c.points[0].z() = -1.0;
    c.points[1].z() = 2.5;
    EXPECT_NEAR(fit_oriented_box(c, all_of(c)).height, 3.5, 1e-12);
}

TEST(FoldYaw, Range) {
    EXPECT_NEAR(fold_yaw(-0.1), std::numbers::pi - 0.1, 1e-12);
    EXPECT_EQ(fold_yaw(std::numbers::pi), 0.0);
    EXPECT_NEAR(fold_yaw(7.0), 7.0 - 2.0 * std::numbers::pi, 1e-12);
}
