// usvtrack: command-line front end for the obstacle detection and tracking
// pipeline.

#include "usv/app/commands.hpp"
#include "usv/app/config.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace usv;

fusion::PipelineConfig pipeline_config(const std::string& path) {
    return path.empty() ? fusion::PipelineConfig{} : app::load_pipeline_config(path);
}

void write_text(const app::fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Camera-LiDAR obstacle detection and tracking for surface vessels"};
    cli.require_subcommand(1);

    std::string config_path;
    std::string dataset;
    std::string output;
    std::optional<std::uint64_t> seed;

    auto* run = cli.add_subcommand("run", "Run the pipeline over a dataset directory");
    run->add_option("--config", config_path, "Pipeline configuration (key: value)");
    run->add_option("--dataset", dataset, "Dataset directory")->required();
    run->add_option("--output", output, "Output directory")->default_val("out");

    auto* simulate = cli.add_subcommand("simulate", "Generate a synthetic dataset");
    simulate->add_option("--config", config_path, "Scenario configuration")->required();
    simulate->add_option("--output", output, "Dataset directory to write")->required();
    simulate->add_option("--seed", seed, "Override the scenario seed");

    std::string predictions;
    std::string ground_truth;
    double iou_threshold = 0.0;
    bool class_agnostic = false;
    auto* evaluate = cli.add_subcommand("evaluate", "Score predictions against ground truth");
    evaluate->add_option("--predictions", predictions, "Prediction box file")->required();
    evaluate->add_option("--ground-truth", ground_truth, "Ground-truth box file")->required();
    evaluate->add_option("--iou", iou_threshold, "IoU threshold in (0, 1]")->required();
    evaluate->add_flag("--class-agnostic", class_agnostic, "Treat every class as boat");
    evaluate->add_option("--output", output, "Directory for eval_report.txt and eval_report.json");

    std::size_t repetitions = 1;
    auto* profile = cli.add_subcommand("profile", "Per-stage timing summary");
    profile->add_option("--config", config_path, "Pipeline configuration (key: value)");
    profile->add_option("--dataset", dataset, "Dataset directory")->required();
    profile->add_option("--repetitions", repetitions, "Passes over the dataset")->default_val(1);
    profile->add_option("--output", output, "Directory for profile.txt");

    std::int64_t frame = 0;
    auto* project = cli.add_subcommand("project", "Project a frame's cloud into the image");
    project->add_option("--config", config_path, "Pipeline configuration (key: value)");
    project->add_option("--dataset", dataset, "Dataset directory")->required();
    project->add_option("--frame", frame, "Frame index")->required();
    project->add_option("--output", output, "Directory for overlay_<frame>.txt");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (run->parsed()) {
            const auto config = pipeline_config(config_path);
            const auto summary = app::run_pipeline(dataset, config, output);
            std::cout << "frames: " << summary.frames << "\nskipped: " << summary.skipped << "\n";
            return summary.exit_code();
        }
        if (simulate->parsed()) {
            auto config = app::load_scenario_config(config_path);
            if (seed) config.seed = *seed;
            const auto frames = app::simulate_to(config, output);
            std::cout << "frames: " << frames << "\n";
            return 0;
        }
        if (evaluate->parsed()) {
            const auto result = app::evaluate_files(predictions, ground_truth, iou_threshold, class_agnostic);
            const auto text = app::format_eval_report(result);
            std::cout << text;
            if (!output.empty()) {
                app::fs::create_directories(output);
                write_text(app::fs::path(output) / "eval_report.txt", text);
                write_text(app::fs::path(output) / "eval_report.json", app::format_eval_json(result));
            }
            return 0;
        }
        if (profile->parsed()) {
            const auto config = pipeline_config(config_path);
            const auto text = app::format_profile(app::profile_dataset(dataset, config, repetitions));
            std::cout << text;
            if (!output.empty()) {
                app::fs::create_directories(output);
                write_text(app::fs::path(output) / "profile.txt", text);
            }
            return 0;
        }
        if (project->parsed()) {
            const auto config = pipeline_config(config_path);
            const auto text = app::format_overlay(app::project_debug(dataset, frame, config.sync_slack));
            if (output.empty()) {
                std::cout << text;
            } else {
                app::fs::create_directories(output);
                write_text(app::fs::path(output) / ("overlay_" + std::to_string(frame) + ".txt"), text);
            }
            return 0;
        }
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
