#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "angio/candidates.hpp"

namespace angio {

enum class Laterality { Left, Right };

std::string_view to_string(Laterality side);

/// Rooted forest over the SYNTAX segment classes: segment 1 roots the right
/// circulation, segment 5 the left. Immutable after construction and safe to
/// share across threads.
class AnatomyGraph {
public:
    /// The built-in SYNTAX hierarchy.
    static AnatomyGraph defaults();

    /// Load from a plain-text config (lines: `roots`, `edge parent child`,
    /// `laterality Left|Right class...`). Throws on structural violations:
    /// multiple parents, cycles, classes missing laterality, sides not
    /// disjoint, or vertices unreachable from their side's root.
    static AnatomyGraph load(const std::filesystem::path& file);

    std::optional<SegmentClass> parent(SegmentClass cls) const;
    const std::vector<SegmentClass>& children(SegmentClass cls) const;
    Laterality laterality(SegmentClass cls) const;
    const std::vector<SegmentClass>& roots() const { return roots_; }
    SegmentClass root_of(Laterality side) const;

    /// Path from the side's root down to cls, inclusive.
    std::vector<SegmentClass> root_path(SegmentClass cls) const;
    int depth(SegmentClass cls) const;

    /// Classes of one side in breadth-first order from its root.
    std::vector<SegmentClass> bfs_order(Laterality side) const;

private:
    void validate() const;

    std::map<SegmentClass, SegmentClass> parent_;
    std::map<SegmentClass, std::vector<SegmentClass>> children_;
    std::map<SegmentClass, Laterality> laterality_;
    std::vector<SegmentClass> roots_;
};

enum class RemovalReason { laterality_conflict, orphan_path, duplicate_class, relabeled };

std::string_view to_string(RemovalReason reason);

struct ValidationReport {
    std::vector<CandidateSegment> kept;
    std::vector<std::pair<CandidateSegment, RemovalReason>> removed;
    Laterality laterality = Laterality::Left;
    std::vector<std::pair<SegmentClass, SegmentClass>> relabels;  // old -> new
};

enum class AncestryMode {
    strict,    // every class on the root path must be detected
    bridging,  // a missing intermediate ancestor is tolerated when the
               // candidate lies close enough to its nearest kept ancestor
};

struct ValidationParams {
    AncestryMode mode = AncestryMode::bridging;
    double bridge_distance = 50.0;  // pixels
};

/// Side whose candidates carry the larger total confidence x area weight;
/// ties go to the side holding the single most confident candidate.
/// Throws on an empty set.
Laterality classify_laterality(const CandidateSet& set, const AnatomyGraph& graph);

/// The logic engine: fix the laterality and drop the opposite side, walk the
/// chosen tree from the aorta outward dropping candidates whose ancestor
/// path is broken (subject to the ancestry mode), then collapse duplicate
/// classes onto the most confident candidate.
ValidationReport validate_tree(const CandidateSet& set, const AnatomyGraph& graph,
                               const ValidationParams& params = {});

/// Reorder commonly confused sibling labels ({9,9a,10,10a}, {16,16a,16b,16c},
/// {12,12a,12b}, {14,14a,14b}): present members are relabeled in
/// proximal-to-distal order of centroid distance from the family's parent
/// segment. Families without their parent segment present are left alone.
ValidationReport resolve_confusables(ValidationReport report, const AnatomyGraph& graph);

}  // namespace angio
