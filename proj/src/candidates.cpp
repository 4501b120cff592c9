#include "angio/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace angio {

namespace {

constexpr std::array<std::string_view, kSegmentClassCount> kClassNames = {
    "1",  "2",  "3",   "4",   "5",   "6",   "7",   "8",   "9",
    "9a", "10", "10a", "11",  "12",  "12a", "12b", "13",  "14",
    "14a", "14b", "15", "16", "16a", "16b", "16c",
};

}  // namespace

std::string_view to_string(SegmentClass cls) { return kClassNames[static_cast<int>(cls)]; }

std::optional<SegmentClass> segment_class_from_string(std::string_view name) {
    for (int i = 0; i < kSegmentClassCount; ++i) {
        if (kClassNames[i] == name) return static_cast<SegmentClass>(i);
    }
    return std::nullopt;
}

const std::array<SegmentClass, kSegmentClassCount>& all_segment_classes() {
    static const auto classes = [] {
        std::array<SegmentClass, kSegmentClassCount> a{};
        for (int i = 0; i < kSegmentClassCount; ++i) a[i] = static_cast<SegmentClass>(i);
        return a;
    }();
    return classes;
}

Mask rasterize_polygons(const std::vector<std::vector<double>>& rings, int width, int height) {
    Mask mask(width, height);
    std::vector<double> crossings;
    for (int y = 0; y < height; ++y) {
        const double yc = y + 0.5;
        crossings.clear();
        for (const auto& ring : rings) {
            const std::size_t n = ring.size() / 2;
            for (std::size_t i = 0; i < n; ++i) {
                const double x1 = ring[2 * i];
                const double y1 = ring[2 * i + 1];
                const double x2 = ring[2 * ((i + 1) % n)];
                const double y2 = ring[2 * ((i + 1) % n) + 1];
                // half-open vertical span so shared vertices count once
                if ((y1 <= yc && y2 > yc) || (y2 <= yc && y1 > yc)) {
                    crossings.push_back(x1 + (yc - y1) * (x2 - x1) / (y2 - y1));
                }
            }
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
            // pixel centers x+0.5 in [xa, xb)
            int x0 = static_cast<int>(std::ceil(crossings[i] - 0.5));
            int x1 = static_cast<int>(std::ceil(crossings[i + 1] - 0.5)) - 1;
            x0 = std::max(x0, 0);
            x1 = std::min(x1, width - 1);
            for (int x = x0; x <= x1; ++x) mask.set(x, y);
        }
    }
    return mask;
}

namespace {

using nlohmann::json;

[[noreturn]] void record_error(const char* section, std::size_t index, const std::string& what) {
    std::ostringstream oss;
    oss << section << "[" << index << "]: " << what;
    throw std::runtime_error(oss.str());
}

}  // namespace

namespace {

std::vector<CandidateSet> parse_candidates_doc(const json& doc, const std::string& source_tag);

}  // namespace

std::vector<CandidateSet> parse_candidates(const std::filesystem::path& file,
                                           const std::string& source_tag) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("parse_candidates: cannot open " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("parse_candidates: " + file.string() + ": " + e.what());
    }
    try {
        return parse_candidates_doc(doc, source_tag);
    } catch (const std::runtime_error& e) {
        // record-level errors carry their index; prepend the file they came from
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

namespace {

std::vector<CandidateSet> parse_candidates_doc(const json& doc, const std::string& source_tag) {
    if (!doc.is_object() || !doc.contains("images") || !doc.contains("annotations")) {
        throw std::runtime_error("expected an images/annotations/categories document");
    }

    // category id -> segment class, via the category name
    std::map<long long, SegmentClass> class_of_category;
    if (doc.contains("categories")) {
        const json& cats = doc["categories"];
        for (std::size_t i = 0; i < cats.size(); ++i) {
            const json& c = cats[i];
            if (!c.contains("id") || !c.contains("name")) {
                record_error("categories", i, "missing id or name");
            }
            const std::string name = c["name"].get<std::string>();
            if (name == "background") continue;  // legal in the table, never on a candidate
            const auto cls = segment_class_from_string(name);
            if (!cls) record_error("categories", i, "unknown class code '" + name + "'");
            class_of_category[c["id"].get<long long>()] = *cls;
        }
    }

    std::map<long long, CandidateSet> sets;
    const json& images = doc["images"];
    for (std::size_t i = 0; i < images.size(); ++i) {
        const json& im = images[i];
        if (!im.contains("id") || !im.contains("width") || !im.contains("height")) {
            record_error("images", i, "missing id/width/height");
        }
        CandidateSet set;
        set.image_id = im["id"].get<long long>();
        set.width = im["width"].get<int>();
        set.height = im["height"].get<int>();
        if (set.width <= 0 || set.height <= 0) record_error("images", i, "bad dimensions");
        if (im.contains("file_name")) set.file_name = im["file_name"].get<std::string>();
        sets[set.image_id] = std::move(set);
    }

    const json& anns = doc["annotations"];
    for (std::size_t i = 0; i < anns.size(); ++i) {
        const json& a = anns[i];
        if (!a.contains("image_id") || !a.contains("category_id") || !a.contains("segmentation")) {
            record_error("annotations", i, "missing image_id/category_id/segmentation");
        }
        const long long image_id = a["image_id"].get<long long>();
        const auto set_it = sets.find(image_id);
        if (set_it == sets.end()) {
            record_error("annotations", i, "image_id " + std::to_string(image_id) + " not in images");
        }
        const long long cat = a["category_id"].get<long long>();
        const auto cls_it = class_of_category.find(cat);
        if (cls_it == class_of_category.end()) {
            record_error("annotations", i, "unknown class code (category_id " + std::to_string(cat) + ")");
        }
        const json& seg = a["segmentation"];
        if (!seg.is_array() || seg.empty()) record_error("annotations", i, "empty segmentation");
        std::vector<std::vector<double>> rings;
        for (const json& ring : seg) {
            if (!ring.is_array() || ring.size() < 6 || ring.size() % 2 != 0) {
                record_error("annotations", i, "malformed polygon ring");
            }
            rings.push_back(ring.get<std::vector<double>>());
        }
        double score = 1.0;
        if (a.contains("score")) {
            score = a["score"].get<double>();
            if (!(score >= 0.0 && score <= 1.0)) {
                record_error("annotations", i, "score outside [0,1]");
            }
        }

        CandidateSegment cand;
        cand.cls = cls_it->second;
        cand.mask = rasterize_polygons(rings, set_it->second.width, set_it->second.height);
        cand.confidence = score;
        cand.source = source_tag;
        if (cand.mask.empty_mask()) continue;  // degenerate polygon: nothing to keep
        set_it->second.segments.push_back(std::move(cand));
    }

    std::vector<CandidateSet> out;
    out.reserve(sets.size());
    for (auto& [id, set] : sets) out.push_back(std::move(set));
    return out;
}

}  // namespace

namespace {

// Exact polygon encoding of a mask: maximal vertical stacks of identical
// row runs, each emitted as one rectangle ring.
std::vector<std::vector<double>> mask_to_rectangles(const Mask& mask) {
    struct Run {
        int x0, x1;  // [x0, x1)
        bool operator==(const Run&) const = default;
    };
    std::vector<std::vector<Run>> rows(static_cast<std::size_t>(mask.height));
    for (int y = 0; y < mask.height; ++y) {
        int x = 0;
        while (x < mask.width) {
            if (!mask.get(x, y)) {
                ++x;
                continue;
            }
            int x1 = x;
            while (x1 < mask.width && mask.get(x1, y)) ++x1;
            rows[y].push_back({x, x1});
            x = x1;
        }
    }

    std::vector<std::vector<double>> rings;
    // open rectangles carried down from the previous row, keyed by run
    std::map<std::pair<int, int>, int> open;  // (x0,x1) -> y_start
    for (int y = 0; y <= mask.height; ++y) {
        std::map<std::pair<int, int>, int> next;
        if (y < mask.height) {
            for (const Run& run : rows[y]) {
                const auto key = std::make_pair(run.x0, run.x1);
                const auto it = open.find(key);
                next[key] = it != open.end() ? it->second : y;
                if (it != open.end()) open.erase(it);
            }
        }
        for (const auto& [key, y0] : open) {
            const double x0 = key.first, x1 = key.second;
            rings.push_back({x0, static_cast<double>(y0), x1, static_cast<double>(y0),
                             x1, static_cast<double>(y), x0, static_cast<double>(y)});
        }
        open = std::move(next);
    }
    return rings;
}

}  // namespace

void write_candidates(const std::filesystem::path& file, const std::vector<CandidateSet>& sets) {
    json doc;
    doc["images"] = json::array();
    doc["annotations"] = json::array();
    doc["categories"] = json::array();
    for (SegmentClass cls : all_segment_classes()) {
        doc["categories"].push_back(
            {{"id", static_cast<int>(cls) + 1}, {"name", std::string(to_string(cls))}});
    }

    std::vector<const CandidateSet*> ordered;
    for (const auto& set : sets) ordered.push_back(&set);
    std::sort(ordered.begin(), ordered.end(),
              [](const CandidateSet* a, const CandidateSet* b) { return a->image_id < b->image_id; });

    long long ann_id = 1;
    for (const CandidateSet* set : ordered) {
        doc["images"].push_back({{"id", set->image_id},
                                 {"width", set->width},
                                 {"height", set->height},
                                 {"file_name", set->file_name}});
        for (const CandidateSegment& cand : set->segments) {
            json seg = json::array();
            for (const auto& ring : mask_to_rectangles(cand.mask)) seg.push_back(ring);
            doc["annotations"].push_back({{"id", ann_id++},
                                          {"image_id", set->image_id},
                                          {"category_id", static_cast<int>(cand.cls) + 1},
                                          {"segmentation", seg},
                                          {"score", cand.confidence},
                                          {"source", cand.source}});
        }
    }

    std::ofstream out(file);
    if (!out) throw std::runtime_error("write_candidates: cannot open " + file.string());
    out << doc.dump(2) << "\n";
}

CandidateSet area_filter(const CandidateSet& set, long long min_area) {
    CandidateSet out = set;
    out.segments.clear();
    for (const CandidateSegment& cand : set.segments) {
        if (cand.mask.area() >= min_area) out.segments.push_back(cand);
    }
    return out;
}

CandidateSet class_filter(const CandidateSet& set, const std::vector<SegmentClass>& excluded) {
    CandidateSet out = set;
    out.segments.clear();
    for (const CandidateSegment& cand : set.segments) {
        if (std::find(excluded.begin(), excluded.end(), cand.cls) == excluded.end()) {
            out.segments.push_back(cand);
        }
    }
    return out;
}

const std::vector<SegmentClass>& default_excluded_classes() {
    static const std::vector<SegmentClass> excluded = [] {
        std::vector<SegmentClass> v;
        for (const char* name : {"10", "10a", "14a", "15", "16", "16a", "16b", "16c", "12b"}) {
            v.push_back(*segment_class_from_string(name));
        }
        return v;
    }();
    return excluded;
}

namespace {

std::string join_sources(const std::string& a, const std::string& b) {
    // keep a sorted, de-duplicated "+"-joined tag list
    std::set<std::string> parts;
    auto split_into = [&parts](const std::string& s) {
        std::size_t start = 0;
        while (start <= s.size()) {
            const std::size_t pos = s.find('+', start);
            const std::string part = s.substr(start, pos == std::string::npos ? pos : pos - start);
            if (!part.empty()) parts.insert(part);
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
    };
    split_into(a);
    split_into(b);
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += '+';
        out += p;
    }
    return out;
}

}  // namespace

CandidateSet merge_ensemble(const std::vector<CandidateSet>& sets, double iou_threshold) {
    if (sets.empty()) throw std::invalid_argument("merge_ensemble: no candidate sets");
    for (const CandidateSet& set : sets) {
        if (set.image_id != sets.front().image_id || set.width != sets.front().width ||
            set.height != sets.front().height) {
            throw std::invalid_argument("merge_ensemble: sets disagree on image id or dimensions");
        }
    }

    CandidateSet out = sets.front();
    out.segments.clear();
    for (const CandidateSet& set : sets) {
        for (const CandidateSegment& cand : set.segments) out.segments.push_back(cand);
    }

    // Fuse until stable: unions can create new overlaps, and the fixpoint is
    // what makes merging idempotent.
    bool changed = true;
    while (changed) {
        changed = false;
        std::stable_sort(out.segments.begin(), out.segments.end(),
                         [](const CandidateSegment& a, const CandidateSegment& b) {
                             if (a.cls != b.cls) return a.cls < b.cls;
                             if (a.confidence != b.confidence) return a.confidence > b.confidence;
                             return a.source < b.source;
                         });
        std::vector<CandidateSegment> fused;
        for (CandidateSegment& cand : out.segments) {
            bool merged = false;
            for (CandidateSegment& existing : fused) {
                if (existing.cls != cand.cls) continue;
                if (mask_iou(existing.mask, cand.mask) >= iou_threshold) {
                    existing.mask = mask_union(existing.mask, cand.mask);
                    existing.confidence = std::max(existing.confidence, cand.confidence);
                    existing.source = join_sources(existing.source, cand.source);
                    merged = true;
                    changed = true;
                    break;
                }
            }
            if (!merged) fused.push_back(std::move(cand));
        }
        out.segments = std::move(fused);
    }
    return out;
}

CandidateSegment erode_mask(const CandidateSegment& candidate, int iterations) {
    if (iterations < 0) throw std::invalid_argument("erode_mask: iterations must be >= 0");
    CandidateSegment out = candidate;
    for (int i = 0; i < iterations; ++i) {
        Mask eroded = out.mask.erode_cross();
        if (eroded.empty_mask()) break;  // keep the last non-empty stage
        out.mask = std::move(eroded);
    }
    return out;
}

}  // namespace angio
