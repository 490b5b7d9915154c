#pragma once

// Detection and tracking evaluation: greedy IoU matching, precision/recall,
// 11-point interpolated average precision, F-score and ID switches.

#include "usv/common.hpp"
#include "usv/geometry.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace usv::metrics {

using geometry::BBox2D;

double iou(const BBox2D& a, const BBox2D& b);

struct Prediction {
    BBox2D box;
    ObjectClass class_id = ObjectClass::boat;
    double confidence = 1.0;
    std::optional<std::uint64_t> track_id;
};

struct GroundTruthObject {
    BBox2D box;
    ObjectClass class_id = ObjectClass::boat;
    std::optional<std::uint64_t> gt_track_id;
};

struct PredictionFrame {
    std::int64_t frame_index = 0;
    std::vector<Prediction> predictions;
};

struct GroundTruthFrame {
    std::int64_t frame_index = 0;
    std::vector<GroundTruthObject> objects;
};

struct FrameMatch {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::vector<bool> prediction_is_tp;                   // per input prediction
    std::vector<std::optional<std::size_t>> matched_gt;  // per input prediction
};

/// Predictions are visited in descending confidence (stable); each takes the
/// unmatched same-class ground truth of highest IoU >= threshold.
FrameMatch match_frame(const std::vector<Prediction>& preds,
                       const std::vector<GroundTruthObject>& gts, double iou_threshold);

/// 11-point interpolated AP for one class. The precision-recall curve starts
/// at (recall 0, precision 1); an empty prediction list scores 0.
double average_precision_11pt(const std::vector<PredictionFrame>& preds,
                              const std::vector<GroundTruthFrame>& gts, ObjectClass class_id,
                              double iou_threshold);

double f_score(double precision, double recall);

/// One frame of ground-truth-to-prediction assignments (gt id -> predicted id).
using IdAssignment = std::map<std::uint64_t, std::uint64_t>;

/// For each gt track, counts frames whose matched predicted id differs from
/// the previously matched predicted id. Frames without a match do not reset
/// the previous id.
std::size_t count_id_switches(const std::vector<IdAssignment>& per_frame);

/// IoU-based form: predictions and ground truths carrying track ids are
/// matched per frame with match_frame.
std::size_t count_id_switches(const std::vector<PredictionFrame>& preds,
                              const std::vector<GroundTruthFrame>& gts, double iou_threshold);

struct EvalReport {
    std::map<ObjectClass, double> per_class_ap;
    double map = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t id_switches = 0;
    double iou_threshold = 0.0;
};

/// Full evaluation over frames present in the ground truth. With
/// `class_agnostic`, every class is cast to boat. Throws
/// ErrorCode::configuration unless 0 < iou_threshold <= 1.
EvalReport evaluate(std::vector<PredictionFrame> preds, std::vector<GroundTruthFrame> gts,
                    double iou_threshold, bool class_agnostic);

}  // namespace usv::metrics
