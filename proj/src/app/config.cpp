#include "usv/app/config.hpp"

#include "text.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace usv::app {

using detail::where;

namespace {

constexpr auto kCfg = ErrorCode::configuration;

struct Field {
    std::string name;
    std::function<void(std::string_view, int)> set;
    std::function<std::string()> get;
};

Field real(std::string name, double& ref) {
    return {std::move(name), [&ref](std::string_view v, int line) { ref = detail::to_double(v, line, kCfg); },
            [&ref] { return format_fixed(ref, 6); }};
}

Field integer(std::string name, int& ref) {
    return {std::move(name),
            [&ref](std::string_view v, int line) { ref = static_cast<int>(detail::to_int(v, line, kCfg)); },
            [&ref] { return std::to_string(ref); }};
}

Field count(std::string name, std::size_t& ref) {
    return {std::move(name),
            [&ref, name](std::string_view v, int line) {
                const auto x = detail::to_int(v, line, kCfg);
                if (x < 0) throw Error(kCfg, where(line) + name + " must be non-negative");
                ref = static_cast<std::size_t>(x);
            },
            [&ref] { return std::to_string(ref); }};
}

Field seed(std::string name, std::uint64_t& ref) {
    return {std::move(name),
            [&ref, name](std::string_view v, int line) {
                const auto x = detail::to_int(v, line, kCfg);
                if (x < 0) throw Error(kCfg, where(line) + name + " must be non-negative");
                ref = static_cast<std::uint64_t>(x);
            },
            [&ref] { return std::to_string(ref); }};
}

Field boolean(std::string name, bool& ref) {
    return {std::move(name),
            [&ref](std::string_view v, int line) {
                if (v == "true" || v == "1") {
                    ref = true;
                } else if (v == "false" || v == "0") {
                    ref = false;
                } else {
                    throw Error(kCfg, where(line) + "expected true or false, found '" + std::string(v) + "'");
                }
            },
            [&ref] { return std::string(ref ? "true" : "false"); }};
}

template <typename E>
Field choice(std::string name, E& ref, std::vector<std::pair<std::string, E>> options) {
    return {std::move(name),
            [&ref, options](std::string_view v, int line) {
                for (const auto& [label, value] : options) {
                    if (v == label) {
                        ref = value;
                        return;
                    }
                }
                throw Error(kCfg, where(line) + "unknown option '" + std::string(v) + "'");
            },
            [&ref, options] {
                for (const auto& [label, value] : options) {
                    if (value == ref) return label;
                }
                return std::string();
            }};
}

Field klass(std::string name, ObjectClass& ref) {
    return {std::move(name), [&ref](std::string_view v, int line) { ref = detail::to_class(v, line, kCfg); },
            [&ref] { return std::string(class_name(ref)); }};
}

Field vec3(std::string name, Vec3& ref) {
    return {std::move(name),
            [&ref](std::string_view v, int line) {
                const auto t = detail::tokens(v);
                if (t.size() != 3) throw Error(kCfg, where(line) + "expected three numbers");
                for (int i = 0; i < 3; ++i) ref(i) = detail::to_double(t[i], line, kCfg);
            },
            [&ref] {
                return format_fixed(ref.x()) + " " + format_fixed(ref.y()) + " " + format_fixed(ref.z());
            }};
}

std::vector<Field> pipeline_fields(fusion::PipelineConfig& c) {
    using fusion::SelectionStrategy;
    using tracking::PenaltyMode;
    return {
        count("accumulation_window", c.accumulation_window),
        real("r_min", c.r_min),
        real("r_max", c.r_max),
        real("cluster.tolerance", c.cluster.tolerance),
        count("cluster.min_size", c.cluster.min_size),
        count("cluster.max_size", c.cluster.max_size),
        count("frustum_min_size", c.frustum_min_size),
        real("fusion.track_distance_threshold", c.fusion.track_distance_threshold),
        integer("fusion.max_misses_3d", c.fusion.max_misses_3d),
        choice("fusion.selection_strategy", c.fusion.selection_strategy,
               std::vector<std::pair<std::string, SelectionStrategy>>{
                   {"largest", SelectionStrategy::largest}, {"nearest", SelectionStrategy::nearest}}),
        real("fusion.hybrid_match_distance", c.fusion.hybrid_match_distance),
        integer("tracker.confirm_frames", c.tracker.confirm_frames),
        integer("tracker.max_misses", c.tracker.max_misses),
        real("tracker.add_confidence", c.tracker.add_confidence),
        integer("tracker.kalman_warmup", c.tracker.kalman_warmup),
        real("tracker.descriptor_delete_threshold", c.tracker.descriptor_delete_threshold),
        boolean("tracker.use_appearance", c.tracker.use_appearance),
        real("tracker.gate", c.tracker.gate),
        choice("tracker.penalty_mode", c.tracker.penalty_mode,
               std::vector<std::pair<std::string, PenaltyMode>>{{"amplify", PenaltyMode::amplify},
                                                                {"literal", PenaltyMode::literal}}),
        real("tracker.process_noise", c.tracker.process_noise),
        real("tracker.measurement_noise", c.tracker.measurement_noise),
        real("tracker.initial_covariance", c.tracker.initial_covariance),
        real("sync_slack", c.sync_slack),
        real("frame_rate", c.frame_rate),
        real("detection_min_confidence", c.detection_min_confidence),
        boolean("camera_path", c.camera_path),
        boolean("lidar_path", c.lidar_path),
        boolean("sticky_labels", c.sticky_labels),
        boolean("smooth_detections", c.smooth_detections),
    };
}

std::vector<Field> scenario_fields(sim::ScenarioConfig& c) {
    return {
        real("frame_rate", c.frame_rate),
        real("duration", c.duration),
        seed("seed", c.seed),
        real("lidar.azimuth_resolution_deg", c.lidar.azimuth_resolution_deg),
        real("lidar.max_range", c.lidar.max_range),
        real("lidar.range_noise_sigma", c.lidar.range_noise_sigma),
        integer("lidar.channels", c.lidar.channels),
        real("lidar.min_elevation_deg", c.lidar.min_elevation_deg),
        real("lidar.max_elevation_deg", c.lidar.max_elevation_deg),
        real("lidar.sensor_height", c.lidar.sensor_height),
        real("detector.dropout", c.detector.dropout),
        real("detector.confidence_min", c.detector.confidence_min),
        real("detector.confidence_max", c.detector.confidence_max),
        real("detector.pixel_jitter_sigma", c.detector.pixel_jitter_sigma),
        real("camera.focal", c.camera.focal),
        integer("camera.width", c.camera.width),
        integer("camera.height", c.camera.height),
        vec3("camera.position", c.camera.position),
        real("sea.roll_amplitude_deg", c.sea.roll_amplitude_deg),
        real("sea.pitch_amplitude_deg", c.sea.pitch_amplitude_deg),
        real("sea.period", c.sea.period),
    };
}

std::vector<Field> boat_fields(sim::BoatActor& b) {
    return {
        real("length", b.length),
        real("width", b.width),
        real("height", b.height),
        real("x", b.position.x()),
        real("y", b.position.y()),
        real("yaw", b.yaw),
        real("vx", b.velocity.x()),
        real("vy", b.velocity.y()),
        real("ax", b.acceleration.x()),
        real("ay", b.acceleration.y()),
        klass("class", b.class_id),
        seed("gt_track_id", b.gt_track_id),
    };
}

void apply(const std::vector<Field>& fields, const std::vector<KeyValue>& entries,
           std::string_view section) {
    std::set<std::string> seen;
    for (const auto& kv : entries) {
        const Field* field = nullptr;
        for (const auto& f : fields) {
            if (f.name == kv.key) field = &f;
        }
        if (field == nullptr) {
            throw Error(kCfg, where(kv.line) + "unknown key '" + kv.key + "'" +
                                  (section.empty() ? "" : " in [" + std::string(section) + "]"));
        }
        if (!seen.insert(kv.key).second) {
            throw Error(kCfg, where(kv.line) + "duplicate key '" + kv.key + "'");
        }
        field->set(kv.value, kv.line);
    }
}

std::string dump(const std::vector<Field>& fields) {
    std::string out;
    for (const auto& f : fields) out += f.name + ": " + f.get() + "\n";
    return out;
}

}  // namespace

std::vector<ConfigSection> parse_sections(std::string_view text) {
    std::vector<ConfigSection> sections(1);
    for (const auto& line : detail::content_lines(text)) {
        auto body = line.text;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) {
            body = detail::trim(body.substr(0, hash));
        }
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) {
                throw Error(ErrorCode::parse, where(line.number) + "malformed section header");
            }
            sections.push_back({std::string(detail::trim(body.substr(1, body.size() - 2))), {}});
            continue;
        }
        const auto colon = body.find(':');
        if (colon == std::string_view::npos) {
            throw Error(ErrorCode::parse, where(line.number) + "expected 'key: value'");
        }
        const auto key = detail::trim(body.substr(0, colon));
        const auto value = detail::trim(body.substr(colon + 1));
        if (key.empty()) throw Error(ErrorCode::parse, where(line.number) + "empty key");
        if (value.empty()) {
            throw Error(ErrorCode::parse, where(line.number) + "missing value for '" + std::string(key) + "'");
        }
        sections.back().entries.push_back({std::string(key), std::string(value), line.number});
    }
    return sections;
}

fusion::PipelineConfig parse_pipeline_config(std::string_view text) {
    const auto sections = parse_sections(text);
    if (sections.size() > 1) {
        throw Error(kCfg, "pipeline configuration has no sections, found [" + sections[1].name + "]");
    }
    fusion::PipelineConfig config;
    apply(pipeline_fields(config), sections.front().entries, "");
    config.validate();
    return config;
}

std::string write_pipeline_config(const fusion::PipelineConfig& config) {
    auto copy = config;
    return dump(pipeline_fields(copy));
}

fusion::PipelineConfig load_pipeline_config(const std::string& path) {
    return parse_pipeline_config(read_text_file(path));
}

sim::ScenarioConfig parse_scenario_config(std::string_view text) {
    const auto sections = parse_sections(text);
    sim::ScenarioConfig config;
    apply(scenario_fields(config), sections.front().entries, "");
    std::uint64_t next_id = 1;
    for (std::size_t i = 1; i < sections.size(); ++i) {
        if (sections[i].name != "boat") {
            throw Error(kCfg, "unknown section [" + sections[i].name + "]");
        }
        sim::BoatActor boat;
        boat.gt_track_id = next_id;
        apply(boat_fields(boat), sections[i].entries, "boat");
        next_id = boat.gt_track_id + 1;
        config.boats.push_back(boat);
    }
    config.validate();
    return config;
}

sim::ScenarioConfig load_scenario_config(const std::string& path) {
    return parse_scenario_config(read_text_file(path));
}

std::string write_scenario_config(const sim::ScenarioConfig& config) {
    auto copy = config;
    std::string out = dump(scenario_fields(copy));
    for (auto& boat : copy.boats) out += "\n[boat]\n" + dump(boat_fields(boat));
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace usv::app
