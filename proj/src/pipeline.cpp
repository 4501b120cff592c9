#include "angio/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "angio/image_io.hpp"

namespace angio {

namespace {

using nlohmann::json;

const std::set<std::string>& known_ops() {
    static const std::set<std::string> ops = {"homomorphic", "normalize", "tophat", "equalize",
                                              "smooth",      "guided",    "dfb"};
    return ops;
}

[[noreturn]] void config_error(const std::string& what) {
    throw std::runtime_error("config: " + what);
}

StageSpec stage_from_json(const json& j) {
    StageSpec s;
    if (!j.contains("op")) config_error("stage without 'op'");
    s.op = j["op"].get<std::string>();
    if (!known_ops().count(s.op)) config_error("unknown stage op '" + s.op + "'");
    if (j.contains("input")) s.input = j["input"].get<std::string>();
    if (j.contains("d0")) s.d0 = j["d0"].get<double>();
    if (j.contains("order")) s.order = j["order"].get<int>();
    if (j.contains("kind")) {
        const std::string kind = j["kind"].get<std::string>();
        if (kind == "lowpass") {
            s.kind = FilterKind::lowpass;
        } else if (kind == "highpass") {
            s.kind = FilterKind::highpass;
        } else {
            config_error("stage '" + s.op + "': kind must be lowpass or highpass");
        }
    }
    if (j.contains("m0")) s.m0 = j["m0"].get<double>();
    if (j.contains("var0")) s.var0 = j["var0"].get<double>();
    if (j.contains("radii")) s.radii = j["radii"].get<std::vector<int>>();
    if (j.contains("tile")) s.tile = j["tile"].get<int>();
    if (j.contains("clip_limit")) s.clip_limit = j["clip_limit"].get<double>();
    if (j.contains("sigma")) s.sigma = j["sigma"].get<double>();
    if (j.contains("radius")) s.guided.radius = j["radius"].get<int>();
    if (j.contains("epsilon")) s.guided.epsilon = j["epsilon"].get<double>();
    if (j.contains("subsample")) s.guided.subsample = j["subsample"].get<int>();
    if (j.contains("directions")) s.dfb.directions = j["directions"].get<int>();
    if (j.contains("cutoff")) s.dfb.cutoff = j["cutoff"].get<double>();
    if (j.contains("stopband_db")) s.dfb.stopband_db = j["stopband_db"].get<double>();
    return s;
}

void validate_stage_params(const StageSpec& s) {
    const std::string at = "stage '" + s.op + "': ";
    if (s.op == "homomorphic") {
        if (s.d0 <= 0.0) config_error(at + "d0 must be > 0");
        if (s.order < 1) config_error(at + "order must be >= 1");
    } else if (s.op == "normalize") {
        if (s.var0 < 0.0) config_error(at + "var0 must be >= 0");
    } else if (s.op == "tophat") {
        if (s.radii.empty()) config_error(at + "radii must be non-empty");
        for (std::size_t i = 0; i < s.radii.size(); ++i) {
            if (s.radii[i] < 1) config_error(at + "radii must be positive");
            if (i > 0 && s.radii[i] <= s.radii[i - 1]) {
                config_error(at + "radii must be strictly increasing");
            }
        }
    } else if (s.op == "equalize") {
        if (s.tile < 1) config_error(at + "tile must be >= 1");
        if (s.clip_limit <= 0.0) config_error(at + "clip_limit must be > 0");
    } else if (s.op == "smooth") {
        if (s.sigma <= 0.0) config_error(at + "sigma must be > 0");
    } else if (s.op == "guided") {
        if (s.guided.radius < 1) config_error(at + "radius must be >= 1");
        if (s.guided.epsilon < 0.0) config_error(at + "epsilon must be >= 0");
        if (s.guided.subsample < 1) config_error(at + "subsample must be >= 1");
    } else if (s.op == "dfb") {
        if (s.dfb.directions < 2) config_error(at + "directions must be >= 2");
        if (s.dfb.cutoff <= 0.0) config_error(at + "cutoff must be > 0");
        if (s.dfb.stopband_db <= 0.0) config_error(at + "stopband_db must be > 0");
    }
}

void validate_recipe(const std::vector<StageSpec>& stages) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const StageSpec& s = stages[i];
        if (!seen.insert(s.op).second) config_error("duplicate stage '" + s.op + "'");
        validate_stage_params(s);
        if (s.input == "original") continue;
        if (s.input == "previous") {
            if (i == 0) config_error("first stage cannot take input 'previous'");
            continue;
        }
        bool found = false;
        for (std::size_t k = 0; k < i; ++k) found = found || stages[k].op == s.input;
        if (!found) {
            config_error("stage '" + s.op + "' reads from unknown stage '" + s.input + "'");
        }
    }
}

// The post chain has a fixed order (filtering strictly before validation);
// a config may restate it, with "erode" optionally present, but not reorder it.
void validate_post_order(const json& order) {
    std::vector<std::string> given = order.get<std::vector<std::string>>();
    std::vector<std::string> expected = {"merge", "area", "class", "validate", "confusables"};
    std::vector<std::string> with_erode = {"merge", "area", "class", "erode", "validate", "confusables"};
    if (given != expected && given != with_erode) {
        config_error("post.stage_order must keep the documented chain "
                     "(merge, area, class, [erode], validate, confusables)");
    }
}

}  // namespace

std::vector<StageSpec> PipelineConfig::default_recipe() {
    StageSpec homomorphic;
    homomorphic.op = "homomorphic";
    homomorphic.input = "original";
    StageSpec normalize;
    normalize.op = "normalize";
    StageSpec tophat;
    tophat.op = "tophat";
    StageSpec equalize;
    equalize.op = "equalize";
    equalize.input = "original";
    StageSpec smooth;
    smooth.op = "smooth";
    StageSpec guided;
    guided.op = "guided";
    guided.input = "original";
    StageSpec dfb;
    dfb.op = "dfb";
    dfb.input = "original";
    return {homomorphic, normalize, tophat, equalize, smooth, guided, dfb};
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) config_error("cannot open " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        config_error(file.string() + ": " + e.what());
    }

    PipelineConfig config;
    if (doc.contains("prep") && doc["prep"].contains("stages")) {
        config.stages.clear();
        for (const json& j : doc["prep"]["stages"]) config.stages.push_back(stage_from_json(j));
    }
    validate_recipe(config.stages);

    if (doc.contains("post")) {
        const json& p = doc["post"];
        if (p.contains("iou_threshold")) config.post.iou_threshold = p["iou_threshold"].get<double>();
        if (p.contains("min_area")) config.post.min_area = p["min_area"].get<long long>();
        if (p.contains("erosion_iterations")) {
            config.post.erosion_iterations = p["erosion_iterations"].get<int>();
        }
        if (p.contains("excluded_classes")) {
            config.post.excluded_classes.clear();
            for (const json& c : p["excluded_classes"]) {
                const std::string name = c.get<std::string>();
                const auto cls = segment_class_from_string(name);
                if (!cls) config_error("post.excluded_classes: unknown class '" + name + "'");
                config.post.excluded_classes.push_back(*cls);
            }
        }
        if (p.contains("ancestry")) {
            const std::string mode = p["ancestry"].get<std::string>();
            if (mode == "strict") {
                config.post.validation.mode = AncestryMode::strict;
            } else if (mode == "bridging") {
                config.post.validation.mode = AncestryMode::bridging;
            } else {
                config_error("post.ancestry must be strict or bridging");
            }
        }
        if (p.contains("bridge_distance")) {
            config.post.validation.bridge_distance = p["bridge_distance"].get<double>();
        }
        if (p.contains("anatomy_graph")) {
            config.post.anatomy_graph_path = p["anatomy_graph"].get<std::string>();
        }
        if (p.contains("stage_order")) validate_post_order(p["stage_order"]);
        if (config.post.iou_threshold < 0.0 || config.post.iou_threshold > 1.0) {
            config_error("post.iou_threshold must be in [0,1]");
        }
        if (config.post.min_area < 0) config_error("post.min_area must be >= 0");
        if (config.post.erosion_iterations < 0) {
            config_error("post.erosion_iterations must be >= 0");
        }
        if (config.post.validation.bridge_distance < 0.0) {
            config_error("post.bridge_distance must be >= 0");
        }
    }
    return config;
}

GrayImage apply_stage(const StageSpec& stage, const GrayImage& input) {
    if (stage.op == "homomorphic") {
        return homomorphic_enhance(input, stage.d0, stage.order, stage.kind);
    }
    if (stage.op == "normalize") return normalize(input, stage.m0, stage.var0);
    if (stage.op == "tophat") return multiscale_tophat_enhance(input, stage.radii);
    if (stage.op == "equalize") return adaptive_equalize(input, stage.tile, stage.clip_limit);
    if (stage.op == "smooth") return gaussian_smooth(input, stage.sigma);
    if (stage.op == "guided") return fast_guided_filter(input, stage.guided);
    if (stage.op == "dfb") return directional_filter_bank(input, stage.dfb);
    throw std::runtime_error("apply_stage: unknown op '" + stage.op + "'");
}

namespace {

// Indices of the stages that must run so that `targets` can be computed.
std::vector<std::size_t> stage_closure(const std::vector<StageSpec>& stages,
                                       const std::vector<std::size_t>& targets) {
    std::set<std::size_t> needed;
    std::vector<std::size_t> work = targets;
    while (!work.empty()) {
        const std::size_t i = work.back();
        work.pop_back();
        if (!needed.insert(i).second) continue;
        const StageSpec& s = stages[i];
        if (s.input == "original") continue;
        if (s.input == "previous") {
            work.push_back(i - 1);
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                if (stages[k].op == s.input) work.push_back(k);
            }
        }
    }
    return {needed.begin(), needed.end()};
}

}  // namespace

PrepResult run_prep(const PipelineConfig& config, const std::filesystem::path& input_dir,
                    const std::filesystem::path& output_dir, int jobs,
                    const std::string& only_stage) {
    validate_recipe(config.stages);
    if (jobs < 1) throw std::invalid_argument("run_prep: jobs must be >= 1");

    std::vector<std::size_t> write_indices;
    for (std::size_t i = 0; i < config.stages.size(); ++i) {
        if (only_stage.empty() || config.stages[i].op == only_stage) write_indices.push_back(i);
    }
    if (write_indices.empty()) {
        throw std::runtime_error("config: stage '" + only_stage + "' is not in the recipe");
    }
    const std::vector<std::size_t> run_indices = stage_closure(config.stages, write_indices);

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(input_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png" || ext == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "warning: no input images found in " << input_dir << "\n";
        return {};
    }

    for (std::size_t i : write_indices) {
        std::filesystem::create_directories(output_dir / config.stages[i].op);
    }

    std::atomic<int> processed{0}, skipped{0}, written{0};
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= files.size()) break;
            const std::filesystem::path& file = files[idx];
            GrayImage original;
            try {
                original = read_image(file);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "warning: skipping " << file << ": " << e.what() << "\n";
                ++skipped;
                continue;
            }
            std::map<std::size_t, GrayImage> outputs;
            for (std::size_t i : run_indices) {
                const StageSpec& s = config.stages[i];
                const GrayImage* in = &original;
                if (s.input == "previous") {
                    in = &outputs.at(i - 1);
                } else if (s.input != "original") {
                    for (std::size_t k = 0; k < i; ++k) {
                        if (config.stages[k].op == s.input) in = &outputs.at(k);
                    }
                }
                outputs[i] = apply_stage(s, *in);
            }
            const std::string stem = file.stem().string();
            for (std::size_t i : write_indices) {
                const std::string& op = config.stages[i].op;
                write_image(output_dir / op / (stem + "." + op + ".png"), outputs.at(i));
                ++written;
            }
            ++processed;
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }
    return {processed.load(), skipped.load(), written.load()};
}

namespace {

json removal_entry(const CandidateSegment& cand, std::string_view reason) {
    return {{"class", std::string(to_string(cand.cls))},
            {"reason", std::string(reason)},
            {"source", cand.source},
            {"confidence", cand.confidence},
            {"area", cand.mask.area()}};
}

}  // namespace

PostResult run_postprocess(const PipelineConfig& config,
                           const std::vector<std::filesystem::path>& prediction_files,
                           const std::filesystem::path& output_file) {
    if (prediction_files.empty()) {
        throw std::runtime_error("config: no prediction files given");
    }
    const AnatomyGraph graph = config.post.anatomy_graph_path.empty()
                                   ? AnatomyGraph::defaults()
                                   : AnatomyGraph::load(config.post.anatomy_graph_path);

    std::map<long long, std::vector<CandidateSet>> by_image;
    for (const auto& file : prediction_files) {
        for (CandidateSet& set : parse_candidates(file, file.stem().string())) {
            by_image[set.image_id].push_back(std::move(set));
        }
    }

    PostResult result;
    std::vector<CandidateSet> finals;
    json log;
    log["images"] = json::object();
    for (auto& [image_id, sets] : by_image) {
        json entry;
        entry["removed"] = json::array();
        entry["relabels"] = json::array();

        CandidateSet merged = merge_ensemble(sets, config.post.iou_threshold);
        entry["input_candidates"] = merged.segments.size();

        CandidateSet filtered = merged;
        filtered.segments.clear();
        for (const CandidateSegment& cand : merged.segments) {
            if (cand.mask.area() < config.post.min_area) {
                entry["removed"].push_back(removal_entry(cand, "area_filter"));
            } else if (std::find(config.post.excluded_classes.begin(),
                                 config.post.excluded_classes.end(),
                                 cand.cls) != config.post.excluded_classes.end()) {
                entry["removed"].push_back(removal_entry(cand, "class_filter"));
            } else {
                filtered.segments.push_back(cand);
            }
        }

        if (config.post.erosion_iterations > 0) {
            for (CandidateSegment& cand : filtered.segments) {
                cand = erode_mask(cand, config.post.erosion_iterations);
            }
        }

        ValidationReport report = validate_tree(filtered, graph, config.post.validation);
        report = resolve_confusables(std::move(report), graph);
        if (!filtered.segments.empty()) {
            entry["laterality"] = std::string(to_string(report.laterality));
        }
        for (const auto& [cand, reason] : report.removed) {
            entry["removed"].push_back(removal_entry(cand, to_string(reason)));
        }
        for (const auto& [from, to] : report.relabels) {
            entry["relabels"].push_back(
                {{"from", std::string(to_string(from))}, {"to", std::string(to_string(to))}});
        }
        json kept_names = json::array();
        for (const CandidateSegment& cand : report.kept) {
            kept_names.push_back(std::string(to_string(cand.cls)));
        }
        entry["kept"] = std::move(kept_names);
        log["images"][std::to_string(image_id)] = std::move(entry);

        CandidateSet final_set = merged;
        final_set.segments = report.kept;
        result.images += 1;
        result.kept += static_cast<int>(report.kept.size());
        result.removed += static_cast<int>(merged.segments.size() - report.kept.size());
        finals.push_back(std::move(final_set));
    }

    write_candidates(output_file, finals);
    std::ofstream log_out(output_file.string() + ".log.json");
    if (!log_out) {
        throw std::runtime_error("run_postprocess: cannot open log file next to " +
                                 output_file.string());
    }
    log_out << log.dump(2) << "\n";
    return result;
}

EvalReport run_eval(const std::filesystem::path& predictions_file,
                    const std::filesystem::path& ground_truth_file) {
    const std::vector<CandidateSet> preds = parse_candidates(predictions_file, "pred");
    const std::vector<CandidateSet> gts = parse_candidates(ground_truth_file, "gt");

    std::map<long long, const CandidateSet*> gt_by_id;
    for (const CandidateSet& gt : gts) gt_by_id[gt.image_id] = &gt;

    std::vector<long long> offenders;
    for (const CandidateSet& pred : preds) {
        if (!gt_by_id.count(pred.image_id)) offenders.push_back(pred.image_id);
    }
    if (!offenders.empty()) {
        std::ostringstream oss;
        oss << "run_eval: prediction image ids missing from ground truth:";
        for (long long id : offenders) oss << " " << id;
        throw std::runtime_error(oss.str());
    }

    std::map<long long, const CandidateSet*> pred_by_id;
    for (const CandidateSet& pred : preds) pred_by_id[pred.image_id] = &pred;

    std::map<long long, ImageScores> per_image;
    for (const CandidateSet& gt : gts) {
        const auto it = pred_by_id.find(gt.image_id);
        if (it != pred_by_id.end()) {
            per_image[gt.image_id] = f1_image(*it->second, gt);
        } else {
            CandidateSet empty;
            empty.image_id = gt.image_id;
            empty.width = gt.width;
            empty.height = gt.height;
            per_image[gt.image_id] = f1_image(empty, gt);
        }
    }
    return aggregate(per_image);
}

}  // namespace angio
