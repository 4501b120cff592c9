#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "angio/evaluation.hpp"
#include "angio/pipeline.hpp"
#include "angio/tree_logic.hpp"

namespace {

// Exit codes: 0 success, 1 partial (inputs skipped), 2 config/schema error.
constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

angio::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return angio::PipelineConfig{};
    return angio::PipelineConfig::load(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coronary angiogram enhancement, candidate post-processing and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string input_dir, output_dir, only_stage;
    int jobs = 1;
    auto* prep = app.add_subcommand("prep", "Run the enhancement recipe over an image directory");
    prep->add_option("--config", config_path, "Pipeline config (JSON)");
    prep->add_option("-i,--input", input_dir, "Input image directory")->required();
    prep->add_option("-o,--output", output_dir, "Output directory")->required();
    prep->add_option("-j,--jobs", jobs, "Concurrent images")->default_val(1);
    prep->add_option("--stage", only_stage, "Write only this stage's output");

    std::vector<std::string> prediction_files;
    std::string post_output;
    double iou_override = -1.0;
    long long min_area_override = -1;
    int erode_override = -1;
    bool strict_ancestry = false;
    auto* post = app.add_subcommand("post", "Merge, filter and anatomy-validate candidate files");
    post->add_option("--config", config_path, "Pipeline config (JSON)");
    post->add_option("predictions", prediction_files, "Per-model candidate files")->required();
    post->add_option("-o,--output", post_output, "Output candidate file")->required();
    post->add_option("--iou", iou_override, "Ensemble fusion IoU threshold");
    post->add_option("--min-area", min_area_override, "Minimum candidate area in pixels");
    post->add_option("--erode", erode_override, "Serial erosion iterations");
    post->add_flag("--strict-ancestry", strict_ancestry,
                   "Require every ancestor segment on the root path");

    std::string pred_path, gt_path, report_path;
    auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
    eval->add_option("--pred", pred_path, "Prediction candidate file")->required();
    eval->add_option("--gt", gt_path, "Ground-truth annotation file")->required();
    eval->add_option("-o,--output", report_path, "Report file (JSON)");

    std::string graph_path;
    auto* graph_check = app.add_subcommand("graph-check", "Validate an anatomy graph config");
    graph_check->add_option("graph", graph_path, "Anatomy graph file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (prep->parsed()) {
            const angio::PipelineConfig config = load_config(config_path);
            const angio::PrepResult result =
                angio::run_prep(config, input_dir, output_dir, jobs, only_stage);
            std::cout << "prep: " << result.processed << " image(s), " << result.files_written
                      << " output(s), " << result.skipped << " skipped\n";
            return result.skipped > 0 ? kExitPartial : kExitOk;
        }
        if (post->parsed()) {
            angio::PipelineConfig config = load_config(config_path);
            if (iou_override >= 0.0) config.post.iou_threshold = iou_override;
            if (min_area_override >= 0) config.post.min_area = min_area_override;
            if (erode_override >= 0) config.post.erosion_iterations = erode_override;
            if (strict_ancestry) config.post.validation.mode = angio::AncestryMode::strict;
            std::vector<std::filesystem::path> files(prediction_files.begin(),
                                                     prediction_files.end());
            const angio::PostResult result = angio::run_postprocess(config, files, post_output);
            std::cout << "post: " << result.images << " image(s), kept " << result.kept
                      << ", removed " << result.removed << "\n";
            return kExitOk;
        }
        if (eval->parsed()) {
            const angio::EvalReport report = angio::run_eval(pred_path, gt_path);
            if (!report_path.empty()) angio::write_report(report_path, report);
            angio::print_report(std::cout, report);
            return kExitOk;
        }
        if (graph_check->parsed()) {
            angio::AnatomyGraph::load(graph_path);
            std::cout << "graph-check: " << graph_path << " OK\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
