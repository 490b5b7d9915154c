#pragma once

// Image-plane multi-object tracker: Jaccard + appearance association cost,
// Hungarian matching, constant-acceleration Kalman prediction and a
// tentative/confirmed/deleted lifecycle.

#include "usv/common.hpp"
#include "usv/geometry.hpp"
#include "usv/tracking/descriptor.hpp"
#include "usv/tracking/hungarian.hpp"
#include "usv/tracking/kalman.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace usv::tracking {

using geometry::BBox2D;

struct Detection2D {
    BBox2D box;
    ObjectClass class_id = ObjectClass::boat;
    double confidence = 1.0;
    std::int64_t frame_index = 0;
    double timestamp = 0.0;
};

enum class TrackStatus { tentative, confirmed, deleted };

/// How the detection confidence scales the association cost.
enum class PenaltyMode {
    /// 1 above 0.5, 1 + (1 - c) below: low-confidence detections cost more.
    amplify,
    /// 1 above 0.5, (1 - c) below.
    literal,
};

struct TrackerConfig {
    int confirm_frames = 3;
    int max_misses = 10;
    double add_confidence = 0.5;
    int kalman_warmup = 10;
    double descriptor_delete_threshold = 1.5;
    bool use_appearance = false;
    double gate = 2.0;
    PenaltyMode penalty_mode = PenaltyMode::amplify;
    double process_noise = 1e-2;
    double measurement_noise = 1.0;
    double initial_covariance = 10.0;

    /// Throws ErrorCode::configuration on non-positive counts or negative thresholds.
    void validate() const;
};

struct Track2D {
    std::uint64_t id = 0;
    ObjectClass class_id = ObjectClass::boat;
    KalmanEstimate filter;
    BBox2D box;  // reported box
    std::optional<AppearanceDescriptor> descriptor;
    int hits = 0;
    int misses = 0;
    int age = 0;
    TrackStatus status = TrackStatus::tentative;

    BBox2D predicted_box() const;
};

/// 1 - IoU. 0 for identical boxes, 1 for disjoint ones.
double jaccard_distance(const BBox2D& a, const BBox2D& b);

double confidence_penalty(double confidence, PenaltyMode mode = PenaltyMode::amplify);

/// penalty(confidence) * (jaccard(track box, detection box) + descriptor distance);
/// the descriptor term is zero unless `use_appearance` and both descriptors exist.
double matching_cost(const Track2D& track, const Detection2D& det,
                     const AppearanceDescriptor* det_descriptor, bool use_appearance,
                     PenaltyMode mode = PenaltyMode::amplify);

class Tracker2D {
public:
    explicit Tracker2D(TrackerConfig config = {});

    /// Advances one frame. `patches`, when given, must align with `detections`.
    /// Returns the confirmed tracks. Throws ErrorCode::sequencing when frame
    /// indices do not strictly increase or detections disagree with `frame_index`.
    std::vector<Track2D> step(std::int64_t frame_index, const std::vector<Detection2D>& detections,
                              const std::vector<GrayPatch>* patches = nullptr);

    /// Every live (non-deleted) track, confirmed or not.
    const std::vector<Track2D>& tracks() const { return tracks_; }
    const TrackerConfig& config() const { return config_; }
    const KalmanModel& model() const { return model_; }

private:
    TrackerConfig config_;
    KalmanModel model_;
    std::vector<Track2D> tracks_;
    std::uint64_t next_id_ = 1;
    std::optional<std::int64_t> last_frame_;
};

}  // namespace usv::tracking
