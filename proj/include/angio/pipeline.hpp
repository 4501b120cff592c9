#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "angio/candidates.hpp"
#include "angio/evaluation.hpp"
#include "angio/guided.hpp"
#include "angio/image_core.hpp"
#include "angio/morphology.hpp"
#include "angio/spectral.hpp"
#include "angio/tree_logic.hpp"

namespace angio {

/// One enhancement stage of the prep recipe. `input` selects what the stage
/// consumes: "original", "previous" (the stage listed before it), or the
/// name of an earlier stage.
struct StageSpec {
    std::string op;
    std::string input = "previous";

    double d0 = 12.0;                     // homomorphic cutoff
    int order = 2;                        // homomorphic Butterworth order
    FilterKind kind = FilterKind::highpass;
    double m0 = 128.0;                    // normalize target mean
    double var0 = 100.0;                  // normalize target variance
    std::vector<int> radii = default_tophat_radii();
    int tile = 64;                        // equalize tile size
    double clip_limit = 0.01;
    double sigma = 2.0;                   // smooth
    GuidedFilterParams guided{8, 0.2, 2};
    DfbParams dfb;
};

struct PostConfig {
    double iou_threshold = 0.5;
    long long min_area = 450;
    std::vector<SegmentClass> excluded_classes = default_excluded_classes();
    int erosion_iterations = 0;
    ValidationParams validation;
    std::string anatomy_graph_path;  // empty: built-in SYNTAX graph
};

struct PipelineConfig {
    std::vector<StageSpec> stages;
    PostConfig post;

    /// The seven-stage default recipe with the reference parameters:
    /// homomorphic(d0=12) -> normalize(128,100) -> tophat(3..19) on that
    /// chain; equalize(64,0.01) -> smooth(sigma=2) as a second chain; guided
    /// (r=8, eps=0.2, 1/2 resolution) and the directional filter bank on the
    /// original image.
    static std::vector<StageSpec> default_recipe();

    /// Load and validate a JSON config; unknown ops, duplicate stage names,
    /// dangling inputs, parameter precondition violations, and post-chain
    /// reordering are all rejected here rather than at run time.
    static PipelineConfig load(const std::filesystem::path& file);

    PipelineConfig() : stages(default_recipe()) {}
};

/// Apply one recipe stage to an image.
GrayImage apply_stage(const StageSpec& stage, const GrayImage& input);

struct PrepResult {
    int processed = 0;
    int skipped = 0;
    int files_written = 0;
};

/// Run the recipe over every readable .png/.pgm in input_dir; stage outputs
/// land in output_dir/<stage>/<stem>.<stage>.png. Unreadable files are
/// skipped with a warning and counted. `only_stage` restricts the writes to
/// one stage (its chain of inputs is still computed). Images are processed
/// concurrently up to `jobs` threads; identical inputs and config produce
/// byte-identical outputs.
PrepResult run_prep(const PipelineConfig& config, const std::filesystem::path& input_dir,
                    const std::filesystem::path& output_dir, int jobs = 1,
                    const std::string& only_stage = "");

struct PostResult {
    int images = 0;
    int kept = 0;
    int removed = 0;
};

/// Candidate post-processing over one or more per-model prediction files:
/// merge_ensemble -> area_filter -> class_filter -> optional erode ->
/// validate_tree -> resolve_confusables per image. Writes the final
/// candidate file to output_file and a per-image removal/relabel log (every
/// removal carries a machine-readable reason) to `<output_file>.log.json`.
PostResult run_postprocess(const PipelineConfig& config,
                           const std::vector<std::filesystem::path>& prediction_files,
                           const std::filesystem::path& output_file);

/// Score predictions against ground truth. Prediction image ids must be a
/// subset of the ground-truth ids (offenders are listed in the error);
/// ground-truth images without predictions score as all-missed.
EvalReport run_eval(const std::filesystem::path& predictions_file,
                    const std::filesystem::path& ground_truth_file);

}  // namespace angio
