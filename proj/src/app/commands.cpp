#include "usv/app/commands.hpp"

#include "usv/app/config.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace usv::app {

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out << content;
}

StageSummary summarize(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    StageSummary s;
    s.median_ms = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    s.p95_ms = values[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

}  // namespace

std::string format_obstacle_line(const fusion::ObstacleMap& map) {
    std::string out = std::to_string(map.frame_index) + " " + std::to_string(map.obstacles.size());
    for (const auto& ob : map.obstacles) {
        out += " " + std::to_string(ob.track_id) + " " + std::string(fusion::source_name(ob.source)) + " " +
               (ob.label ? std::string(class_name(*ob.label)) : std::string("unknown")) + " " +
               format_fixed(ob.box.center.x()) + " " + format_fixed(ob.box.center.y()) + " " +
               format_fixed(ob.box.yaw) + " " + format_fixed(ob.box.length) + " " +
               format_fixed(ob.box.width);
    }
    return out + "\n";
}

std::string timing_csv_header() {
    std::string out = "frame_index";
    for (std::size_t s = 0; s < fusion::kStageCount; ++s) {
        out += ",";
        out += fusion::stage_name(static_cast<fusion::Stage>(s));
    }
    return out + ",total\n";
}

std::string format_timing_row(const fusion::TimingRow& row) {
    std::string out = std::to_string(row.frame_index);
    for (double ms : row.stage_ms) out += "," + format_fixed(ms, 3);
    return out + "," + format_fixed(row.total_ms, 3) + "\n";
}

int RunSummary::exit_code() const { return skipped * 10 > frames ? 1 : 0; }

RunSummary run_pipeline(const fs::path& dataset_dir, fusion::PipelineConfig config,
                        const fs::path& output_dir) {
    config.validate();
    const Dataset ds = open_dataset(dataset_dir, config.sync_slack);
    if (config.camera_path && !ds.has_detections) {
        spdlog::warn("no detections.txt in {}; running the LiDAR-only path", dataset_dir.string());
        config.camera_path = false;
    }
    fusion::Pipeline pipeline(config, ds.calibration);

    RunSummary summary;
    summary.frames = ds.frames.size();
    for (const auto& frame : ds.frames) {
        try {
            const auto map = pipeline.step(load_bundle(ds, frame));
            summary.obstacle_text += format_obstacle_line(map);
            summary.timing.push_back(map.timing);
        } catch (const Error& e) {
            spdlog::error("frame {} skipped: {}", frame.cloud.frame_index, e.what());
            ++summary.skipped;
        }
    }
    if (summary.exit_code() != 0) {
        spdlog::error("{} of {} frames skipped", summary.skipped, summary.frames);
    }

    if (!output_dir.empty()) {
        fs::create_directories(output_dir);
        write_file(output_dir / "obstacles.txt", summary.obstacle_text);
        std::string csv = timing_csv_header();
        for (const auto& row : summary.timing) csv += format_timing_row(row);
        write_file(output_dir / "timing.csv", csv);
    }
    return summary;
}

std::vector<OverlayPoint> project_debug(const fs::path& dataset_dir, std::int64_t frame_index,
                                        double sync_slack) {
    const Dataset ds = open_dataset(dataset_dir, sync_slack);
    const auto it = std::find_if(ds.frames.begin(), ds.frames.end(), [&](const SyncedFrame& f) {
        return f.cloud.frame_index == frame_index;
    });
    if (it == ds.frames.end()) {
        throw Error(ErrorCode::lookup, "frame " + std::to_string(frame_index) + " not in the manifest");
    }
    const auto bundle = load_bundle(ds, *it);
    const double w = ds.calibration.image_width();
    const double h = ds.calibration.image_height();
    std::vector<OverlayPoint> out;
    for (const auto& p : bundle.cloud.points) {
        const auto px = geometry::project_to_image(ds.calibration, p);
        if (!px || px->u < 0.0 || px->u >= w || px->v < 0.0 || px->v >= h) continue;
        out.push_back({px->u, px->v, p.norm()});
    }
    return out;
}

std::string format_overlay(const std::vector<OverlayPoint>& points) {
    std::string out;
    for (const auto& p : points) {
        out += format_fixed(p.u, 3) + " " + format_fixed(p.v, 3) + " " + format_fixed(p.range, 3) + "\n";
    }
    return out;
}

EvalResult evaluate_files(const fs::path& predictions, const fs::path& ground_truth,
                          double iou_threshold, bool class_agnostic) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw Error(ErrorCode::configuration, "iou_threshold must be in (0, 1]");
    }
    auto preds = parse_prediction_frames(read_text_file(predictions.string()));
    auto gts = parse_ground_truth_frames(read_text_file(ground_truth.string()));

    EvalResult result;
    std::set<std::int64_t> pred_frames;
    for (const auto& f : preds) pred_frames.insert(f.frame_index);
    std::size_t covered = 0;
    for (const auto& f : gts) covered += pred_frames.count(f.frame_index);
    if (!gts.empty()) {
        result.gt_frame_coverage = static_cast<double>(covered) / static_cast<double>(gts.size());
    }
    if (covered < gts.size()) {
        spdlog::warn("predictions cover {} of {} ground-truth frames; missing frames count as empty",
                     covered, gts.size());
    }
    result.report = metrics::evaluate(std::move(preds), std::move(gts), iou_threshold, class_agnostic);
    return result;
}

std::string format_eval_report(const EvalResult& result) {
    const auto& r = result.report;
    std::string out;
    out += "iou_threshold: " + format_fixed(r.iou_threshold) + "\n";
    for (const auto& [c, ap] : r.per_class_ap) {
        out += "ap." + std::string(class_name(c)) + ": " + format_fixed(ap) + "\n";
    }
    out += "map: " + format_fixed(r.map) + "\n";
    out += "precision: " + format_fixed(r.precision) + "\n";
    out += "recall: " + format_fixed(r.recall) + "\n";
    out += "f_score: " + format_fixed(r.f_score) + "\n";
    out += "tp: " + std::to_string(r.tp) + "\n";
    out += "fp: " + std::to_string(r.fp) + "\n";
    out += "fn: " + std::to_string(r.fn) + "\n";
    out += "id_switches: " + std::to_string(r.id_switches) + "\n";
    out += "gt_frame_coverage: " + format_fixed(result.gt_frame_coverage) + "\n";
    return out;
}

std::string format_eval_json(const EvalResult& result) {
    const auto& r = result.report;
    nlohmann::ordered_json j;
    j["iou_threshold"] = r.iou_threshold;
    nlohmann::ordered_json ap = nlohmann::ordered_json::object();
    for (const auto& [c, v] : r.per_class_ap) ap[std::string(class_name(c))] = v;
    j["ap"] = ap;
    j["map"] = r.map;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f_score"] = r.f_score;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["id_switches"] = r.id_switches;
    j["gt_frame_coverage"] = result.gt_frame_coverage;
    return j.dump(2) + "\n";
}

ProfileSummary summarize_timing(const std::vector<fusion::TimingRow>& rows, double budget_ms) {
    ProfileSummary s;
    s.rows = rows.size();
    s.budget_ms = budget_ms;
    for (std::size_t st = 0; st < fusion::kStageCount; ++st) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.stage_ms[st]);
        s.stages[st] = summarize(std::move(v));
    }
    std::vector<double> totals;
    for (const auto& r : rows) {
        totals.push_back(r.total_ms);
        if (r.total_ms > budget_ms) ++s.over_budget;
    }
    s.total = summarize(std::move(totals));
    return s;
}

ProfileSummary profile_bundles(const std::vector<fusion::FrameBundle>& bundles,
                               const geometry::CalibrationModel& calibration,
                               const fusion::PipelineConfig& config, std::size_t repetitions) {
    config.validate();
    std::vector<fusion::TimingRow> rows;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        fusion::Pipeline pipeline(config, calibration);
        for (const auto& b : bundles) rows.push_back(pipeline.step(b).timing);
    }
    return summarize_timing(rows, 1000.0 / config.frame_rate);
}

ProfileSummary profile_dataset(const fs::path& dataset_dir, const fusion::PipelineConfig& config,
                               std::size_t repetitions) {
    config.validate();
    const Dataset ds = open_dataset(dataset_dir, config.sync_slack);
    auto effective = config;
    if (effective.camera_path && !ds.has_detections) {
        spdlog::warn("no detections.txt in {}; profiling the LiDAR-only path", dataset_dir.string());
        effective.camera_path = false;
    }
    std::vector<fusion::FrameBundle> bundles;
    for (const auto& f : ds.frames) bundles.push_back(load_bundle(ds, f));
    return profile_bundles(bundles, ds.calibration, effective, repetitions);
}

std::string format_profile(const ProfileSummary& summary) {
    std::string out = "stage median_ms p95_ms\n";
    for (std::size_t st = 0; st < fusion::kStageCount; ++st) {
        out += std::string(fusion::stage_name(static_cast<fusion::Stage>(st))) + " " +
               format_fixed(summary.stages[st].median_ms, 3) + " " +
               format_fixed(summary.stages[st].p95_ms, 3) + "\n";
    }
    out += "total " + format_fixed(summary.total.median_ms, 3) + " " +
           format_fixed(summary.total.p95_ms, 3) + "\n";
    out += "rows: " + std::to_string(summary.rows) + "\n";
    out += "budget_ms: " + format_fixed(summary.budget_ms, 3) + "\n";
    out += "over_budget: " + std::to_string(summary.over_budget) + "\n";
    return out;
}

std::size_t simulate_to(const sim::ScenarioConfig& config, const fs::path& output_dir) {
    const auto scenario = sim::generate_scenario(config);
    write_dataset(scenario, output_dir);
    write_file(output_dir / "scenario.txt", write_scenario_config(config));
    return scenario.frames.size();
}

}  // namespace usv::app
