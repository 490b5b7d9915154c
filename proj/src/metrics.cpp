#include "usv/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace usv::metrics {

double iou(const BBox2D& a, const BBox2D& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

FrameMatch match_frame(const std::vector<Prediction>& preds,
                       const std::vector<GroundTruthObject>& gts, double iou_threshold) {
    FrameMatch out;
    out.prediction_is_tp.assign(preds.size(), false);
    out.matched_gt.assign(preds.size(), std::nullopt);

    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].confidence > preds[b].confidence;
    });

    std::vector<char> gt_used(gts.size(), 0);
    for (auto p : order) {
        double best = -1.0;
        std::optional<std::size_t> best_gt;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_used[g] || gts[g].class_id != preds[p].class_id) continue;
            const double v = iou(preds[p].box, gts[g].box);
            if (v >= iou_threshold && v > best) {
                best = v;
                best_gt = g;
            }
        }
        if (best_gt) {
            gt_used[*best_gt] = 1;
            out.prediction_is_tp[p] = true;
            out.matched_gt[p] = best_gt;
            ++out.tp;
        } else {
            ++out.fp;
        }
    }
    out.fn = gts.size() - out.tp;
    return out;
}

namespace {

template <typename T>
std::vector<T> of_class(const std::vector<T>& items, ObjectClass c) {
    std::vector<T> out;
    for (const auto& it : items) {
        if (it.class_id == c) out.push_back(it);
    }
    return out;
}

const PredictionFrame* find_frame(const std::vector<PredictionFrame>& frames, std::int64_t index) {
    for (const auto& f : frames) {
        if (f.frame_index == index) return &f;
    }
    return nullptr;
}

}  // namespace

double average_precision_11pt(const std::vector<PredictionFrame>& preds,
                              const std::vector<GroundTruthFrame>& gts, ObjectClass class_id,
                              double iou_threshold) {
    struct Scored {
        double confidence;
        bool tp;
    };
    std::vector<Scored> scored;
    std::size_t total_gt = 0;
    std::set<std::int64_t> gt_frames;

    for (const auto& gf : gts) {
        gt_frames.insert(gf.frame_index);
        const auto gt_c = of_class(gf.objects, class_id);
        total_gt += gt_c.size();
        const PredictionFrame* pf = find_frame(preds, gf.frame_index);
        if (pf == nullptr) continue;
        const auto pred_c = of_class(pf->predictions, class_id);
        const auto m = match_frame(pred_c, gt_c, iou_threshold);
        for (std::size_t i = 0; i < pred_c.size(); ++i) {
            scored.push_back({pred_c[i].confidence, m.prediction_is_tp[i]});
        }
    }
    // predictions on frames without ground truth are false positives
    for (const auto& pf : preds) {
        if (gt_frames.count(pf.frame_index)) continue;
        for (const auto& p : pf.predictions) {
            if (p.class_id == class_id) scored.push_back({p.confidence, false});
        }
    }

    if (scored.empty() || total_gt == 0) return 0.0;
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.confidence > b.confidence; });

    std::vector<double> recall{0.0};
    std::vector<double> precision{1.0};
    std::size_t tp = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].tp) ++tp;
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    }

    double sum = 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double r = k / 10.0;
        double best = 0.0;
        for (std::size_t i = 0; i < recall.size(); ++i) {
            if (recall[i] >= r - 1e-12) best = std::max(best, precision[i]);
        }
        sum += best;
    }
    return sum / 11.0;
}

double f_score(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

std::size_t count_id_switches(const std::vector<IdAssignment>& per_frame) {
    std::map<std::uint64_t, std::uint64_t> previous;
    std::size_t switches = 0;
    for (const auto& frame : per_frame) {
        for (const auto& [gt_id, pred_id] : frame) {
            auto it = previous.find(gt_id);
            if (it != previous.end() && it->second != pred_id) ++switches;
            previous[gt_id] = pred_id;
        }
    }
    return switches;
}

std::size_t count_id_switches(const std::vector<PredictionFrame>& preds,
                              const std::vector<GroundTruthFrame>& gts, double iou_threshold) {
    std::vector<IdAssignment> frames;
    for (const auto& gf : gts) {
        IdAssignment assignment;
        if (const PredictionFrame* pf = find_frame(preds, gf.frame_index)) {
            const auto m = match_frame(pf->predictions, gf.objects, iou_threshold);
            for (std::size_t i = 0; i < pf->predictions.size(); ++i) {
                if (!m.matched_gt[i]) continue;
                const auto& gt = gf.objects[*m.matched_gt[i]];
                const auto& pred = pf->predictions[i];
                if (gt.gt_track_id && pred.track_id) assignment[*gt.gt_track_id] = *pred.track_id;
            }
        }
        frames.push_back(std::move(assignment));
    }
    return count_id_switches(frames);
}

EvalReport evaluate(std::vector<PredictionFrame> preds, std::vector<GroundTruthFrame> gts,
                    double iou_threshold, bool class_agnostic) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw Error(ErrorCode::configuration, "iou_threshold must be in (0, 1]");
    }
    if (class_agnostic) {
        for (auto& f : preds) {
            for (auto& p : f.predictions) p.class_id = ObjectClass::boat;
        }
        for (auto& f : gts) {
            for (auto& g : f.objects) g.class_id = ObjectClass::boat;
        }
    }
    std::sort(gts.begin(), gts.end(),
              [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
    std::sort(preds.begin(), preds.end(),
              [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });

    EvalReport report;
    report.iou_threshold = iou_threshold;

    std::set<ObjectClass> classes;
    for (const auto& gf : gts) {
        for (const auto& g : gf.objects) classes.insert(g.class_id);
    }
    for (auto c : classes) {
        report.per_class_ap[c] = average_precision_11pt(preds, gts, c, iou_threshold);
    }
    if (!classes.empty()) {
        double sum = 0.0;
        for (const auto& [c, ap] : report.per_class_ap) sum += ap;
        report.map = sum / static_cast<double>(classes.size());
    }

    std::set<std::int64_t> gt_frames;
    for (const auto& gf : gts) {
        gt_frames.insert(gf.frame_index);
        const PredictionFrame* pf = find_frame(preds, gf.frame_index);
        const std::vector<Prediction> empty;
        const auto m = match_frame(pf ? pf->predictions : empty, gf.objects, iou_threshold);
        report.tp += m.tp;
        report.fp += m.fp;
        report.fn += m.fn;
    }
    for (const auto& pf : preds) {
        if (!gt_frames.count(pf.frame_index)) report.fp += pf.predictions.size();
    }

    const double tp = static_cast<double>(report.tp);
    report.precision = report.tp + report.fp > 0 ? tp / static_cast<double>(report.tp + report.fp) : 0.0;
    report.recall = report.tp + report.fn > 0 ? tp / static_cast<double>(report.tp + report.fn) : 0.0;
    report.f_score = f_score(report.precision, report.recall);
    report.id_switches = count_id_switches(preds, gts, iou_threshold);
    return report;
}

}  // namespace usv::metrics
