#include "usv/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace usv;
using namespace usv::metrics;

namespace {

Prediction pred(BBox2D box, double conf, ObjectClass c = ObjectClass::boat,
                std::optional<std::uint64_t> id = std::nullopt) {
    return {box, c, conf, id};
}

GroundTruthObject gt(BBox2D box, ObjectClass c = ObjectClass::boat,
                     std::optional<std::uint64_t> id = std::nullopt) {
    return {box, c, id};
}

// Independent 11-point AP over a ranked (confidence, is_tp) list.
double oracle_ap(std::vector<std::pair<double, bool>> ranked, std::size_t n_gt) {
    if (ranked.empty() || n_gt == 0) return 0.0;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> rec{0.0}, prec{1.0};
    double tp = 0, fp = 0;
    for (const auto& [c, hit] : ranked) {
        (hit ? tp : fp) += 1.0;
        rec.push_back(tp / static_cast<double>(n_gt));
        prec.push_back(tp / (tp + fp));
    }
    double sum = 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double r = k / 10.0;
        double best = 0.0;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            if (rec[i] >= r - 1e-12) best = std::max(best, prec[i]);
        }
        sum += best;
    }
    return sum / 11.0;
}

BBox2D random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 200.0), s(5.0, 60.0);
    const double x = u(rng), y = u(rng);
    return {x, y, x + s(rng), y + s(rng)};
}

BBox2D jitter(const BBox2D& b, std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> g(0.0, sigma);
    BBox2D o{b.x_min + g(rng), b.y_min + g(rng), b.x_max + g(rng), b.y_max + g(rng)};
    if (o.x_max <= o.x_min) o.x_max = o.x_min + 1.0;
    if (o.y_max <= o.y_min) o.y_max = o.y_min + 1.0;
    return o;
}

struct RandomSequence {
    std::vector<PredictionFrame> preds;
    std::vector<GroundTruthFrame> gts;
};

RandomSequence random_sequence(std::mt19937_64& rng, int frames) {
    std::uniform_int_distribution<int> n(0, 4);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    std::bernoulli_distribution keep(0.8);
    RandomSequence s;
    for (int f = 0; f < frames; ++f) {
        GroundTruthFrame gf{f, {}};
        PredictionFrame pf{f, {}};
        const int k = n(rng);
        for (int i = 0; i < k; ++i) {
            const auto b = random_box(rng);
            gf.objects.push_back(gt(b));
            if (keep(rng)) pf.predictions.push_back(pred(jitter(b, rng, 4.0), conf(rng)));
        }
        const int extra = n(rng) / 2;
        for (int i = 0; i < extra; ++i) pf.predictions.push_back(pred(random_box(rng), conf(rng)));
        s.gts.push_back(gf);
        s.preds.push_back(pf);
    }
    return s;
}

}  // namespace

TEST(Iou, Examples) {
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
    EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {1, 0, 3, 2}), 1.0 / 3.0);
}

TEST(MatchFrame, Examples) {
    const BBox2D b{10, 10, 50, 40};
    auto m = match_frame({pred(b, 0.9)}, {gt(b)}, 0.5);
    EXPECT_EQ(m.tp, 1u);
    EXPECT_EQ(m.fp, 0u);
    EXPECT_EQ(m.fn, 0u);

    m = match_frame({pred(b, 0.9)}, {}, 0.5);
    EXPECT_EQ(m.tp, 0u);
    EXPECT_EQ(m.fp, 1u);
    EXPECT_EQ(m.fn, 0u);

    // the higher-confidence of two overlapping predictions takes the gt
    m = match_frame({pred({12, 10, 52, 40}, 0.6), pred({11, 10, 51, 40}, 0.8)}, {gt(b)}, 0.5);
    EXPECT_EQ(m.tp, 1u);
    EXPECT_EQ(m.fp, 1u);
    EXPECT_EQ(m.fn, 0u);
    EXPECT_FALSE(m.prediction_is_tp[0]);
    EXPECT_TRUE(m.prediction_is_tp[1]);
    EXPECT_EQ(m.matched_gt[1], 0u);
}

TEST(MatchFrame, ClassMustAgree) {
    const BBox2D b{10, 10, 50, 40};
    const auto m = match_frame({pred(b, 0.9, ObjectClass::buoy)}, {gt(b)}, 0.5);
    EXPECT_EQ(m.tp, 0u);
    EXPECT_EQ(m.fp, 1u);
    EXPECT_EQ(m.fn, 1u);
}

TEST(MatchFrame, PicksHighestIouGt) {
    const auto m = match_frame({pred({0, 0, 10, 10}, 0.9)}, {gt({2, 0, 12, 10}), gt({1, 0, 11, 10})}, 0.1);
    EXPECT_EQ(m.matched_gt[0], 1u);
}

TEST(MatchFrame, CountsBoundedAndConserved) {
    std::mt19937_64 rng(61);
    for (int i = 0; i < 300; ++i) {
        const auto s = random_sequence(rng, 1);
        const auto& p = s.preds[0].predictions;
        const auto& g = s.gts[0].objects;
        const auto m = match_frame(p, g, 0.5);
        EXPECT_LE(m.tp, std::min(p.size(), g.size()));
        EXPECT_EQ(m.tp + m.fp, p.size());
        EXPECT_EQ(m.tp + m.fn, g.size());
    }
}

TEST(MatchFrame, RaisingThresholdNeverIncreasesTp) {
    std::mt19937_64 rng(62);
    for (int i = 0; i < 300; ++i) {
        const auto s = random_sequence(rng, 1);
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (double thr : {0.05, 0.15, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            const auto m = match_frame(s.preds[0].predictions, s.gts[0].objects, thr);
            EXPECT_LE(m.tp, prev);
            prev = m.tp;
        }
    }
}

TEST(AveragePrecision, PerfectIsOne) {
    std::vector<PredictionFrame> p;
    std::vector<GroundTruthFrame> g;
    for (int f = 0; f < 5; ++f) {
        const BBox2D b{10.0 * f, 0, 10.0 * f + 20, 30};
        p.push_back({f, {pred(b, 1.0)}});
        g.push_back({f, {gt(b)}});
    }
    EXPECT_DOUBLE_EQ(average_precision_11pt(p, g, ObjectClass::boat, 0.5), 1.0);
}

TEST(AveragePrecision, NoPredictionsIsZero) {
    const std::vector<GroundTruthFrame> g{{0, {gt({0, 0, 10, 10})}}};
    EXPECT_EQ(average_precision_11pt({}, g, ObjectClass::boat, 0.5), 0.0);
    EXPECT_EQ(average_precision_11pt({{0, {}}}, g, ObjectClass::boat, 0.5), 0.0);
}

TEST(AveragePrecision, CraftedTwoPredictionCase) {
    const BBox2D b{10, 10, 50, 40};
    const BBox2D away{300, 300, 340, 330};
    const std::vector<GroundTruthFrame> g{{0, {gt(b)}}};
    const std::vector<PredictionFrame> right{{0, {pred(b, 0.9), pred(away, 0.8)}}};
    EXPECT_DOUBLE_EQ(average_precision_11pt(right, g, ObjectClass::boat, 0.5), 1.0);
    // spurious first: precision 1 only at the recall-0 anchor, 0.5 at the other ten points
    const std::vector<PredictionFrame> swapped{{0, {pred(b, 0.8), pred(away, 0.9)}}};
    EXPECT_EQ(average_precision_11pt(swapped, g, ObjectClass::boat, 0.5), 6.0 / 11.0);
}

TEST(AveragePrecision, MatchesIndependentOracle) {
    std::mt19937_64 rng(63);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_sequence(rng, 6);
        std::vector<std::pair<double, bool>> ranked;
        std::size_t n_gt = 0;
        for (std::size_t f = 0; f < s.gts.size(); ++f) {
            n_gt += s.gts[f].objects.size();
            const auto m = match_frame(s.preds[f].predictions, s.gts[f].objects, 0.5);
            for (std::size_t i = 0; i < s.preds[f].predictions.size(); ++i) {
                ranked.emplace_back(s.preds[f].predictions[i].confidence, m.prediction_is_tp[i]);
            }
        }
        EXPECT_NEAR(average_precision_11pt(s.preds, s.gts, ObjectClass::boat, 0.5),
                    oracle_ap(ranked, n_gt), 1e-12);
    }
}

TEST(AveragePrecision, InvariantUnderMonotoneConfidenceTransform) {
    std::mt19937_64 rng(64);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = random_sequence(rng, 5);
        const double before = average_precision_11pt(s.preds, s.gts, ObjectClass::boat, 0.5);
        for (auto& f : s.preds) {
            for (auto& p : f.predictions) p.confidence = std::exp(3.0 * p.confidence) - 7.0;
        }
        EXPECT_DOUBLE_EQ(average_precision_11pt(s.preds, s.gts, ObjectClass::boat, 0.5), before);
    }
}

TEST(FScore, Examples) {
    EXPECT_DOUBLE_EQ(f_score(1.0, 1.0), 1.0);
    EXPECT_EQ(f_score(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(f_score(0.5, 1.0), 2.0 / 3.0);
}

TEST(IdSwitches, Assignments) {
    std::vector<IdAssignment> stable(10, IdAssignment{{1, 7}});
    EXPECT_EQ(count_id_switches(stable), 0u);

    auto once = stable;
    for (std::size_t f = 5; f < once.size(); ++f) once[f][1] = 8;
    EXPECT_EQ(count_id_switches(once), 1u);

    std::vector<IdAssignment> swap{{{1, 10}, {2, 20}}, {{1, 10}, {2, 20}}, {{1, 20}, {2, 10}}};
    EXPECT_EQ(count_id_switches(swap), 2u);

    // a gap without a match keeps the previous id
    std::vector<IdAssignment> gap{{{1, 3}}, {}, {{1, 3}}};
    EXPECT_EQ(count_id_switches(gap), 0u);
}

TEST(IdSwitches, IouForm) {
    std::vector<PredictionFrame> p;
    std::vector<GroundTruthFrame> g;
    for (int f = 0; f < 6; ++f) {
        const BBox2D a{0, 0, 20, 20}, b{100, 0, 120, 20};
        g.push_back({f, {gt(a, ObjectClass::boat, 1), gt(b, ObjectClass::boat, 2)}});
        const std::uint64_t ia = f < 3 ? 11 : 12;
        p.push_back({f, {pred(a, 0.9, ObjectClass::boat, ia), pred(b, 0.9, ObjectClass::boat, 21)}});
    }
    EXPECT_EQ(count_id_switches(p, g, 0.5), 1u);
}

TEST(Evaluate, PerfectPredictions) {
    std::vector<PredictionFrame> p;
    std::vector<GroundTruthFrame> g;
    for (int f = 0; f < 4; ++f) {
        const BBox2D a{5.0 * f, 0, 5.0 * f + 30, 20};
        g.push_back({f, {gt(a, ObjectClass::boat, 1), gt({200, 200, 220, 230}, ObjectClass::buoy, 2)}});
        p.push_back({f, {pred(a, 1.0, ObjectClass::boat, 1), pred({200, 200, 220, 230}, 1.0, ObjectClass::buoy, 2)}});
    }
    const auto r = evaluate(p, g, 0.5, false);
    EXPECT_DOUBLE_EQ(r.map, 1.0);
    EXPECT_DOUBLE_EQ(r.f_score, 1.0);
    EXPECT_EQ(r.per_class_ap.size(), 2u);
    EXPECT_EQ(r.id_switches, 0u);
    EXPECT_EQ(r.tp, 8u);
}

TEST(Evaluate, SingleClassMapEqualsAp) {
    std::mt19937_64 rng(65);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = random_sequence(rng, 5);
        const auto r = evaluate(s.preds, s.gts, 0.5, false);
        EXPECT_DOUBLE_EQ(r.map, average_precision_11pt(s.preds, s.gts, ObjectClass::boat, 0.5));
    }
}

TEST(Evaluate, CountsAndFScoreConsistent) {
    std::mt19937_64 rng(66);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = random_sequence(rng, 6);
        std::size_t total = 0;
        for (const auto& f : s.gts) total += f.objects.size();
        s.preds.erase(s.preds.begin());  // a frame without predictions counts as empty
        const auto r = evaluate(s.preds, s.gts, 0.5, false);
        EXPECT_EQ(r.tp + r.fn, total);
        const double p = r.tp + r.fp ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
        const double rc = total ? static_cast<double>(r.tp) / static_cast<double>(total) : 0.0;
        EXPECT_DOUBLE_EQ(r.precision, p);
        EXPECT_DOUBLE_EQ(r.recall, rc);
        EXPECT_DOUBLE_EQ(r.f_score, p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0);
    }
}

TEST(Evaluate, EmptyPredictionsRecallZero) {
    const std::vector<GroundTruthFrame> g{{0, {gt({0, 0, 10, 10})}}, {1, {gt({0, 0, 10, 10})}}};
    const auto r = evaluate({}, g, 0.5, false);
    EXPECT_EQ(r.recall, 0.0);
    EXPECT_EQ(r.map, 0.0);
    EXPECT_EQ(r.fn, 2u);
}

TEST(Evaluate, ClassAgnosticCastsToBoat) {
    const BBox2D b{0, 0, 10, 10};
    const std::vector<GroundTruthFrame> g{{0, {gt(b, ObjectClass::other)}}};
    const std::vector<PredictionFrame> p{{0, {pred(b, 0.9, ObjectClass::buoy)}}};
    EXPECT_EQ(evaluate(p, g, 0.5, false).tp, 0u);
    const auto r = evaluate(p, g, 0.5, true);
    EXPECT_EQ(r.tp, 1u);
    EXPECT_EQ(r.per_class_ap.count(ObjectClass::boat), 1u);
}

TEST(Evaluate, ThresholdValidated) {
    for (double bad : {0.0, -0.1, 1.5, std::nan("")}) {
        try {
            evaluate({}, {}, bad, false);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::configuration);
        }
    }
}
