#include "angio/tree_logic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace angio {

std::string_view to_string(Laterality side) {
    return side == Laterality::Left ? "Left" : "Right";
}

std::string_view to_string(RemovalReason reason) {
    switch (reason) {
        case RemovalReason::laterality_conflict: return "laterality_conflict";
        case RemovalReason::orphan_path: return "orphan_path";
        case RemovalReason::duplicate_class: return "duplicate_class";
        case RemovalReason::relabeled: return "relabeled";
    }
    return "unknown";
}

namespace {

SegmentClass cls_or_throw(std::string_view name, const std::string& context) {
    const auto cls = segment_class_from_string(name);
    if (!cls) throw std::runtime_error(context + ": unknown class '" + std::string(name) + "'");
    return *cls;
}

}  // namespace

AnatomyGraph AnatomyGraph::defaults() {
    AnatomyGraph g;
    const std::vector<std::pair<const char*, const char*>> edges = {
        // right circulation
        {"1", "2"}, {"2", "3"}, {"3", "4"},
        {"4", "16"}, {"16", "16a"}, {"16", "16b"}, {"16", "16c"},
        // left circulation
        {"5", "6"}, {"5", "11"}, {"5", "12"},
        {"6", "7"}, {"7", "8"}, {"6", "9"}, {"9", "9a"},
        {"7", "10"}, {"10", "10a"},
        {"12", "12a"}, {"12", "12b"},
        {"11", "13"}, {"13", "14"}, {"13", "15"},
        {"14", "14a"}, {"14", "14b"},
    };
    for (const auto& [p, c] : edges) {
        const SegmentClass parent = *segment_class_from_string(p);
        const SegmentClass child = *segment_class_from_string(c);
        g.parent_[child] = parent;
        g.children_[parent].push_back(child);
    }
    g.roots_ = {*segment_class_from_string("1"), *segment_class_from_string("5")};
    const std::set<std::string_view> right = {"1", "2", "3", "4", "16", "16a", "16b", "16c"};
    for (SegmentClass cls : all_segment_classes()) {
        g.laterality_[cls] =
            right.count(to_string(cls)) ? Laterality::Right : Laterality::Left;
    }
    g.validate();
    return g;
}

AnatomyGraph AnatomyGraph::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("AnatomyGraph::load: cannot open " + file.string());
    AnatomyGraph g;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream iss(line);
        std::string keyword;
        if (!(iss >> keyword)) continue;
        const std::string context = file.string() + ":" + std::to_string(lineno);
        if (keyword == "roots") {
            std::string name;
            while (iss >> name) g.roots_.push_back(cls_or_throw(name, context));
        } else if (keyword == "edge") {
            std::string p, c;
            if (!(iss >> p >> c)) throw std::runtime_error(context + ": edge needs parent and child");
            const SegmentClass parent = cls_or_throw(p, context);
            const SegmentClass child = cls_or_throw(c, context);
            if (g.parent_.count(child)) {
                throw std::runtime_error(context + ": class " + c + " already has a parent");
            }
            g.parent_[child] = parent;
            g.children_[parent].push_back(child);
        } else if (keyword == "laterality") {
            std::string side, name;
            if (!(iss >> side) || (side != "Left" && side != "Right")) {
                throw std::runtime_error(context + ": laterality needs Left or Right");
            }
            const Laterality lat = side == "Left" ? Laterality::Left : Laterality::Right;
            while (iss >> name) {
                const SegmentClass cls = cls_or_throw(name, context);
                if (g.laterality_.count(cls) && g.laterality_.at(cls) != lat) {
                    throw std::runtime_error(context + ": class " + name + " assigned to both sides");
                }
                g.laterality_[cls] = lat;
            }
        } else {
            throw std::runtime_error(context + ": unknown keyword '" + keyword + "'");
        }
    }
    g.validate();
    return g;
}

void AnatomyGraph::validate() const {
    if (roots_.size() != 2) {
        throw std::runtime_error("AnatomyGraph: expected exactly two roots (one per side)");
    }
    for (SegmentClass root : roots_) {
        if (parent_.count(root)) throw std::runtime_error("AnatomyGraph: a root has a parent");
    }
    if (laterality_.count(roots_[0]) == 0 || laterality_.count(roots_[1]) == 0 ||
        laterality_.at(roots_[0]) == laterality_.at(roots_[1])) {
        throw std::runtime_error("AnatomyGraph: roots must cover both sides");
    }
    for (SegmentClass cls : all_segment_classes()) {
        if (!laterality_.count(cls)) {
            throw std::runtime_error("AnatomyGraph: class " + std::string(to_string(cls)) +
                                     " has no laterality");
        }
    }
    // every class reachable from exactly one root, on its own side
    std::set<SegmentClass> seen;
    for (SegmentClass root : roots_) {
        const Laterality side = laterality_.at(root);
        std::deque<SegmentClass> queue = {root};
        while (!queue.empty()) {
            const SegmentClass cls = queue.front();
            queue.pop_front();
            if (!seen.insert(cls).second) {
                throw std::runtime_error("AnatomyGraph: class " + std::string(to_string(cls)) +
                                         " reachable twice (cycle or shared subtree)");
            }
            if (laterality_.at(cls) != side) {
                throw std::runtime_error("AnatomyGraph: class " + std::string(to_string(cls)) +
                                         " reachable from the wrong side's root");
            }
            const auto it = children_.find(cls);
            if (it != children_.end()) {
                for (SegmentClass child : it->second) queue.push_back(child);
            }
        }
    }
    if (seen.size() != static_cast<std::size_t>(kSegmentClassCount)) {
        throw std::runtime_error("AnatomyGraph: not all classes reachable from the roots");
    }
}

std::optional<SegmentClass> AnatomyGraph::parent(SegmentClass cls) const {
    const auto it = parent_.find(cls);
    if (it == parent_.end()) return std::nullopt;
    return it->second;
}

const std::vector<SegmentClass>& AnatomyGraph::children(SegmentClass cls) const {
    static const std::vector<SegmentClass> none;
    const auto it = children_.find(cls);
    return it == children_.end() ? none : it->second;
}

Laterality AnatomyGraph::laterality(SegmentClass cls) const { return laterality_.at(cls); }

SegmentClass AnatomyGraph::root_of(Laterality side) const {
    for (SegmentClass root : roots_) {
        if (laterality_.at(root) == side) return root;
    }
    throw std::logic_error("AnatomyGraph: no root for side");
}

std::vector<SegmentClass> AnatomyGraph::root_path(SegmentClass cls) const {
    std::vector<SegmentClass> path = {cls};
    auto p = parent(cls);
    while (p) {
        path.push_back(*p);
        p = parent(*p);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

int AnatomyGraph::depth(SegmentClass cls) const {
    return static_cast<int>(root_path(cls).size()) - 1;
}

std::vector<SegmentClass> AnatomyGraph::bfs_order(Laterality side) const {
    std::vector<SegmentClass> order;
    std::deque<SegmentClass> queue = {root_of(side)};
    while (!queue.empty()) {
        const SegmentClass cls = queue.front();
        queue.pop_front();
        order.push_back(cls);
        for (SegmentClass child : children(cls)) queue.push_back(child);
    }
    return order;
}

Laterality classify_laterality(const CandidateSet& set, const AnatomyGraph& graph) {
    if (set.segments.empty()) {
        throw std::invalid_argument("classify_laterality: empty candidate set");
    }
    double weight_left = 0.0, weight_right = 0.0;
    for (const CandidateSegment& cand : set.segments) {
        const double w = cand.confidence * static_cast<double>(cand.mask.area());
        (graph.laterality(cand.cls) == Laterality::Left ? weight_left : weight_right) += w;
    }
    if (weight_left != weight_right) {
        return weight_left > weight_right ? Laterality::Left : Laterality::Right;
    }
    // tie: side of the single strongest candidate (then larger area, then Left)
    const CandidateSegment* best = &set.segments.front();
    for (const CandidateSegment& cand : set.segments) {
        if (cand.confidence > best->confidence ||
            (cand.confidence == best->confidence && cand.mask.area() > best->mask.area())) {
            best = &cand;
        }
    }
    return graph.laterality(best->cls);
}

ValidationReport validate_tree(const CandidateSet& set, const AnatomyGraph& graph,
                               const ValidationParams& params) {
    ValidationReport report;
    if (set.segments.empty()) return report;

    report.laterality = classify_laterality(set, graph);

    // (a) laterality: everything on the other side goes
    std::vector<CandidateSegment> on_side;
    for (const CandidateSegment& cand : set.segments) {
        if (graph.laterality(cand.cls) == report.laterality) {
            on_side.push_back(cand);
        } else {
            report.removed.emplace_back(cand, RemovalReason::laterality_conflict);
        }
    }

    // (b) ancestry, aorta outward: classes in BFS order so parents are
    // decided before children.
    std::map<SegmentClass, std::vector<CandidateSegment>> kept_by_class;
    const SegmentClass root = graph.root_of(report.laterality);
    for (SegmentClass cls : graph.bfs_order(report.laterality)) {
        for (const CandidateSegment& cand : on_side) {
            if (cand.cls != cls) continue;
            bool keep = false;
            if (cls == root) {
                keep = true;
            } else {
                const auto parent = graph.parent(cls);
                if (parent && kept_by_class.count(*parent)) {
                    keep = true;
                } else if (params.mode == AncestryMode::bridging) {
                    // walk up to the nearest ancestor class with a kept
                    // candidate; bridge if this mask is close enough to it
                    auto up = parent;
                    while (up && !kept_by_class.count(*up)) up = graph.parent(*up);
                    if (up) {
                        double dist = std::numeric_limits<double>::infinity();
                        for (const CandidateSegment& anc : kept_by_class.at(*up)) {
                            dist = std::min(dist, mask_distance(cand.mask, anc.mask));
                        }
                        keep = dist <= params.bridge_distance;
                    }
                }
            }
            if (keep) {
                kept_by_class[cls].push_back(cand);
            } else {
                report.removed.emplace_back(cand, RemovalReason::orphan_path);
            }
        }
    }

    // (c) duplicate classes collapse onto the strongest candidate
    for (SegmentClass cls : graph.bfs_order(report.laterality)) {
        const auto it = kept_by_class.find(cls);
        if (it == kept_by_class.end()) continue;
        std::vector<CandidateSegment>& cands = it->second;
        std::size_t best = 0;
        for (std::size_t i = 1; i < cands.size(); ++i) {
            const CandidateSegment& a = cands[i];
            const CandidateSegment& b = cands[best];
            if (a.confidence > b.confidence ||
                (a.confidence == b.confidence && a.mask.area() > b.mask.area()) ||
                (a.confidence == b.confidence && a.mask.area() == b.mask.area() &&
                 a.source < b.source)) {
                best = i;
            }
        }
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (i == best) {
                report.kept.push_back(cands[i]);
            } else {
                report.removed.emplace_back(cands[i], RemovalReason::duplicate_class);
            }
        }
    }
    return report;
}

namespace {

const std::vector<std::vector<const char*>>& confusable_families() {
    static const std::vector<std::vector<const char*>> families = {
        {"9", "9a", "10", "10a"},
        {"16", "16a", "16b", "16c"},
        {"12", "12a", "12b"},
        {"14", "14a", "14b"},
    };
    return families;
}

double centroid_distance(const Mask& a, const Mask& b) {
    const auto [ax, ay] = a.centroid();
    const auto [bx, by] = b.centroid();
    return std::hypot(ax - bx, ay - by);
}

}  // namespace

ValidationReport resolve_confusables(ValidationReport report, const AnatomyGraph& graph) {
    for (const auto& family_names : confusable_families()) {
        std::vector<SegmentClass> family;
        for (const char* name : family_names) family.push_back(*segment_class_from_string(name));

        // indices into report.kept of present family members (one per class
        // after duplicate resolution)
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < report.kept.size(); ++i) {
            if (std::find(family.begin(), family.end(), report.kept[i].cls) != family.end()) {
                members.push_back(i);
            }
        }
        if (members.size() < 2) continue;

        // the family's anchor is the parent of its head segment
        const auto anchor_cls = graph.parent(family.front());
        const CandidateSegment* anchor = nullptr;
        if (anchor_cls) {
            for (const CandidateSegment& cand : report.kept) {
                if (cand.cls == *anchor_cls) {
                    anchor = &cand;
                    break;
                }
            }
        }
        if (!anchor) continue;  // no anchor to sort against

        // labels present, proximal to distal in the canonical family order
        std::vector<SegmentClass> labels;
        for (SegmentClass cls : family) {
            for (std::size_t idx : members) {
                if (report.kept[idx].cls == cls) labels.push_back(cls);
            }
        }
        // member candidates by increasing centroid distance from the anchor
        std::vector<std::pair<double, std::size_t>> by_distance;
        for (std::size_t idx : members) {
            by_distance.emplace_back(centroid_distance(report.kept[idx].mask, anchor->mask), idx);
        }
        std::stable_sort(by_distance.begin(), by_distance.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        for (std::size_t i = 0; i < by_distance.size(); ++i) {
            CandidateSegment& cand = report.kept[by_distance[i].second];
            if (cand.cls != labels[i]) {
                report.relabels.emplace_back(cand.cls, labels[i]);
                cand.cls = labels[i];
            }
        }
    }
    return report;
}

}  // namespace angio
