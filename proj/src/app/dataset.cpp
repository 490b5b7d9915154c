#include "usv/app/dataset.hpp"

#include "text.hpp"
#include "usv/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace usv::app {

using detail::where;

namespace {

void expect_columns(const detail::Line& line, const std::vector<std::string_view>& t,
                    std::size_t lo, std::size_t hi, std::string_view what) {
    if (t.size() < lo || t.size() > hi) {
        std::string expected = std::to_string(lo);
        if (hi != lo) expected += "-" + std::to_string(hi);
        throw Error(ErrorCode::parse, where(line.number) + std::string(what) + ": expected " +
                                          expected + " columns, found " + std::to_string(t.size()));
    }
}

template <typename T>
void require_ordered(const std::vector<T>& items, std::string_view what) {
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (items[i].timestamp < items[i - 1].timestamp) {
            throw Error(ErrorCode::sequencing, std::string(what) + " stream is not time-ordered at record " +
                                                   std::to_string(i));
        }
    }
}

// Index of the record nearest to t within slack; ties keep the earlier one.
template <typename T>
std::optional<std::size_t> nearest(const std::vector<T>& items, double t, double slack) {
    auto it = std::lower_bound(items.begin(), items.end(), t,
                               [](const T& item, double value) { return item.timestamp < value; });
    std::optional<std::size_t> best;
    double best_dt = 0.0;
    auto consider = [&](std::size_t i) {
        const double dt = std::abs(items[i].timestamp - t);
        // tolerance absorbs decimal round-off in text timestamps
        if (dt > slack + 1e-9) return;
        if (!best || dt < best_dt || (dt == best_dt && i < *best)) {
            best = i;
            best_dt = dt;
        }
    };
    const auto pos = static_cast<std::size_t>(it - items.begin());
    if (pos > 0) consider(pos - 1);
    if (pos < items.size()) consider(pos);
    return best;
}

std::string fixed9(double v) { return format_fixed(v, 9); }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out << content;
}

}  // namespace

std::vector<SyncedFrame> synchronize(const std::vector<CloudRecord>& clouds,
                                     const std::vector<DetectionSet>& detections,
                                     const std::vector<OrientationRecord>& orientations,
                                     double slack) {
    require_ordered(clouds, "cloud");
    require_ordered(detections, "detection");
    require_ordered(orientations, "orientation");
    for (std::size_t i = 1; i < clouds.size(); ++i) {
        if (clouds[i].frame_index <= clouds[i - 1].frame_index) {
            throw Error(ErrorCode::sequencing, "cloud frame indices must increase, found " +
                                                   std::to_string(clouds[i].frame_index) + " after " +
                                                   std::to_string(clouds[i - 1].frame_index));
        }
    }

    std::vector<SyncedFrame> out;
    out.reserve(clouds.size());
    for (const auto& c : clouds) {
        SyncedFrame frame;
        frame.cloud = c;
        if (auto d = nearest(detections, c.timestamp, slack)) {
            frame.detections = detections[*d].detections;
            for (auto& det : frame.detections) det.frame_index = c.frame_index;
            frame.detection_timestamp = detections[*d].timestamp;
        }
        if (auto o = nearest(orientations, c.timestamp, slack)) {
            frame.orientation = orientations[*o].orientation;
            frame.orientation_timestamp = orientations[*o].timestamp;
        }
        out.push_back(std::move(frame));
    }
    return out;
}

std::vector<CloudRecord> parse_manifest(std::string_view text) {
    std::vector<CloudRecord> out;
    for (const auto& line : detail::content_lines(text)) {
        const auto t = detail::tokens(line.text);
        expect_columns(line, t, 3, 3, "manifest");
        out.push_back({detail::to_int(t[0], line.number), detail::to_double(t[1], line.number),
                       std::string(t[2])});
    }
    return out;
}

std::string write_manifest(const std::vector<CloudRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += std::to_string(r.frame_index) + " " + fixed9(r.timestamp) + " " + r.path + "\n";
    }
    return out;
}

cloud::PointCloud parse_cloud(std::string_view text, double timestamp) {
    cloud::PointCloud cloud;
    cloud.timestamp = timestamp;
    for (const auto& line : detail::content_lines(text)) {
        const auto t = detail::tokens(line.text);
        expect_columns(line, t, 3, 3, "cloud");
        cloud.points.emplace_back(detail::to_double(t[0], line.number),
                                  detail::to_double(t[1], line.number),
                                  detail::to_double(t[2], line.number));
    }
    return cloud;
}

std::string write_cloud(const cloud::PointCloud& cloud) {
    std::string out;
    out.reserve(cloud.points.size() * 40);
    for (const auto& p : cloud.points) {
        out += fixed9(p.x()) + " " + fixed9(p.y()) + " " + fixed9(p.z()) + "\n";
    }
    return out;
}

std::vector<DetectionSet> parse_detections(std::string_view text) {
    std::vector<DetectionSet> out;
    for (const auto& line : detail::content_lines(text)) {
        const auto t = detail::tokens(line.text);
        expect_columns(line, t, 8, 8, "detections");
        tracking::Detection2D det;
        det.frame_index = detail::to_int(t[0], line.number);
        det.timestamp = detail::to_double(t[1], line.number);
        det.class_id = detail::to_class(t[2], line.number);
        det.confidence = detail::to_double(t[3], line.number);
        det.box = {detail::to_double(t[4], line.number), detail::to_double(t[5], line.number),
                   detail::to_double(t[6], line.number), detail::to_double(t[7], line.number)};
        if (!det.box.valid()) throw Error(ErrorCode::parse, where(line.number) + "empty bounding box");
        if (out.empty() || out.back().frame_index != det.frame_index) {
            out.push_back({det.frame_index, det.timestamp, {}});
        }
        out.back().detections.push_back(det);
    }
    return out;
}

std::string write_detections(const std::vector<DetectionSet>& sets) {
    std::string out;
    for (const auto& s : sets) {
        for (const auto& d : s.detections) {
            out += std::to_string(s.frame_index) + " " + fixed9(s.timestamp) + " " +
                   std::to_string(static_cast<int>(d.class_id)) + " " + fixed9(d.confidence) + " " +
                   fixed9(d.box.x_min) + " " + fixed9(d.box.y_min) + " " + fixed9(d.box.x_max) +
                   " " + fixed9(d.box.y_max) + "\n";
        }
    }
    return out;
}

std::vector<OrientationRecord> parse_orientations(std::string_view text) {
    std::vector<OrientationRecord> out;
    for (const auto& line : detail::content_lines(text)) {
        const auto t = detail::tokens(line.text);
        expect_columns(line, t, 5, 5, "orientation");
        OrientationRecord r;
        r.timestamp = detail::to_double(t[0], line.number);
        r.orientation = Eigen::Quaterniond(
            detail::to_double(t[1], line.number), detail::to_double(t[2], line.number),
            detail::to_double(t[3], line.number), detail::to_double(t[4], line.number));
        out.push_back(r);
    }
    return out;
}

std::string write_orientations(const std::vector<OrientationRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        const auto& q = r.orientation;
        out += fixed9(r.timestamp) + " " + fixed9(q.w()) + " " + fixed9(q.x()) + " " +
               fixed9(q.y()) + " " + fixed9(q.z()) + "\n";
    }
    return out;
}

namespace {

struct BoxRecord {
    std::int64_t frame_index;
    ObjectClass class_id;
    double confidence;
    geometry::BBox2D box;
    std::optional<std::uint64_t> track_id;
};

std::vector<BoxRecord> parse_box_records(std::string_view text) {
    std::vector<BoxRecord> out;
    for (const auto& line : detail::content_lines(text)) {
        const auto t = detail::tokens(line.text);
        expect_columns(line, t, 8, 9, "box record");
        BoxRecord r;
        r.frame_index = detail::to_int(t[0], line.number);
        r.class_id = detail::to_class(t[2], line.number);
        r.confidence = detail::to_double(t[3], line.number);
        r.box = {detail::to_double(t[4], line.number), detail::to_double(t[5], line.number),
                 detail::to_double(t[6], line.number), detail::to_double(t[7], line.number)};
        if (t.size() == 9) {
            const auto id = detail::to_int(t[8], line.number);
            if (id < 0) throw Error(ErrorCode::parse, where(line.number) + "negative track id");
            r.track_id = static_cast<std::uint64_t>(id);
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace

std::vector<metrics::PredictionFrame> parse_prediction_frames(std::string_view text) {
    std::map<std::int64_t, metrics::PredictionFrame> frames;
    for (const auto& r : parse_box_records(text)) {
        auto& f = frames[r.frame_index];
        f.frame_index = r.frame_index;
        f.predictions.push_back({r.box, r.class_id, r.confidence, r.track_id});
    }
    std::vector<metrics::PredictionFrame> out;
    for (auto& [k, f] : frames) out.push_back(std::move(f));
    return out;
}

std::vector<metrics::GroundTruthFrame> parse_ground_truth_frames(std::string_view text) {
    std::map<std::int64_t, metrics::GroundTruthFrame> frames;
    for (const auto& r : parse_box_records(text)) {
        auto& f = frames[r.frame_index];
        f.frame_index = r.frame_index;
        f.objects.push_back({r.box, r.class_id, r.track_id});
    }
    std::vector<metrics::GroundTruthFrame> out;
    for (auto& [k, f] : frames) out.push_back(std::move(f));
    return out;
}

std::vector<GroundTruth3D> parse_ground_truth_3d(std::string_view text) {
    std::vector<GroundTruth3D> out;
    for (const auto& line : detail::content_lines(text)) {
        const auto t = detail::tokens(line.text);
        expect_columns(line, t, 9, 9, "3D ground truth");
        GroundTruth3D g;
        g.frame_index = detail::to_int(t[0], line.number);
        const auto id = detail::to_int(t[1], line.number);
        if (id < 0) throw Error(ErrorCode::parse, where(line.number) + "negative track id");
        g.gt_track_id = static_cast<std::uint64_t>(id);
        g.class_id = detail::to_class(t[2], line.number);
        g.box.center = Vec3(detail::to_double(t[3], line.number), detail::to_double(t[4], line.number), 0.0);
        g.box.yaw = detail::to_double(t[5], line.number);
        g.box.length = detail::to_double(t[6], line.number);
        g.box.width = detail::to_double(t[7], line.number);
        g.box.height = detail::to_double(t[8], line.number);
        out.push_back(g);
    }
    return out;
}

Dataset open_dataset(const fs::path& root, double sync_slack) {
    if (!fs::is_directory(root)) {
        throw Error(ErrorCode::configuration, "dataset directory not found: " + root.string());
    }
    const auto calib_path = root / "calibration.txt";
    if (!fs::exists(calib_path)) {
        throw Error(ErrorCode::configuration, "missing calibration file " + calib_path.string());
    }
    const auto manifest_path = root / "manifest.txt";
    if (!fs::exists(manifest_path)) {
        throw Error(ErrorCode::configuration, "missing manifest file " + manifest_path.string());
    }
    Dataset ds{root, geometry::load_calibration_file(calib_path.string()), {}, false};

    const auto clouds = parse_manifest(read_text_file(manifest_path.string()));
    std::vector<DetectionSet> detections;
    if (const auto p = root / "detections.txt"; fs::exists(p)) {
        detections = parse_detections(read_text_file(p.string()));
        ds.has_detections = true;
    }
    std::vector<OrientationRecord> orientations;
    if (const auto p = root / "orientation.txt"; fs::exists(p)) {
        orientations = parse_orientations(read_text_file(p.string()));
    }
    ds.frames = synchronize(clouds, detections, orientations, sync_slack);
    return ds;
}

fusion::FrameBundle load_bundle(const Dataset& dataset, const SyncedFrame& frame) {
    fusion::FrameBundle b;
    b.frame_index = frame.cloud.frame_index;
    b.cloud_timestamp = frame.cloud.timestamp;
    b.cloud = parse_cloud(read_text_file((dataset.root / frame.cloud.path).string()),
                          frame.cloud.timestamp);
    b.detections = frame.detections;
    b.detection_timestamp = frame.detection_timestamp;
    b.orientation = frame.orientation;
    b.orientation_timestamp = frame.orientation_timestamp;
    return b;
}

void write_dataset(const sim::Scenario& scenario, const fs::path& root) {
    fs::create_directories(root / "clouds");
    write_file(root / "calibration.txt", geometry::write_calibration(scenario.calibration));

    std::vector<CloudRecord> manifest;
    std::vector<DetectionSet> detections;
    std::vector<OrientationRecord> orientations;
    std::string gt2d;
    std::string gt3d;
    for (const auto& frame : scenario.frames) {
        const auto& b = frame.bundle;
        char name[32];
        std::snprintf(name, sizeof name, "clouds/%06lld.txt", static_cast<long long>(b.frame_index));
        manifest.push_back({b.frame_index, b.cloud_timestamp, name});
        write_file(root / name, write_cloud(b.cloud));
        if (!b.detections.empty()) {
            detections.push_back({b.frame_index, b.detection_timestamp.value_or(b.cloud_timestamp),
                                  b.detections});
        }
        if (b.orientation) {
            orientations.push_back({b.orientation_timestamp.value_or(b.cloud_timestamp), *b.orientation});
        }
        const std::string prefix = std::to_string(b.frame_index) + " " + fixed9(b.cloud_timestamp) + " ";
        for (const auto& gt : frame.truth) {
            const std::string cls = std::to_string(static_cast<int>(gt.class_id));
            if (gt.box2d) {
                gt2d += prefix + cls + " " + fixed9(1.0) + " " + fixed9(gt.box2d->x_min) + " " +
                        fixed9(gt.box2d->y_min) + " " + fixed9(gt.box2d->x_max) + " " +
                        fixed9(gt.box2d->y_max) + " " + std::to_string(gt.gt_track_id) + "\n";
            }
            const auto& box = gt.box3d;
            gt3d += std::to_string(b.frame_index) + " " + std::to_string(gt.gt_track_id) + " " + cls +
                    " " + fixed9(box.center.x()) + " " + fixed9(box.center.y()) + " " +
                    fixed9(box.yaw) + " " + fixed9(box.length) + " " + fixed9(box.width) + " " +
                    fixed9(box.height) + "\n";
        }
    }
    write_file(root / "manifest.txt", write_manifest(manifest));
    write_file(root / "detections.txt", write_detections(detections));
    if (!orientations.empty()) write_file(root / "orientation.txt", write_orientations(orientations));
    write_file(root / "ground_truth.txt", gt2d);
    write_file(root / "ground_truth_3d.txt", gt3d);
}

}  // namespace usv::app
