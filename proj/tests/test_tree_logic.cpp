#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "angio/tree_logic.hpp"
#include "oracles.hpp"

using angio::AnatomyGraph;
using angio::AncestryMode;
using angio::CandidateSegment;
using angio::CandidateSet;
using angio::Laterality;
using angio::Mask;
using angio::RemovalReason;
using angio::SegmentClass;
using angio::ValidationParams;
using angio::ValidationReport;

namespace {

SegmentClass cls(const char* name) { return *angio::segment_class_from_string(name); }

Mask square_mask(int w, int h, int x0, int y0, int side) {
    Mask m(w, h);
    for (int y = y0; y < y0 + side; ++y) {
        for (int x = x0; x < x0 + side; ++x) m.set(x, y);
    }
    return m;
}

CandidateSegment candidate(SegmentClass c, Mask mask, double conf, std::string source = "m") {
    CandidateSegment cand;
    cand.cls = c;
    cand.mask = std::move(mask);
    cand.confidence = conf;
    cand.source = std::move(source);
    return cand;
}

CandidateSet make_set(std::vector<CandidateSegment> segments, int size = 128) {
    CandidateSet set;
    set.image_id = 1;
    set.width = size;
    set.height = size;
    set.segments = std::move(segments);
    return set;
}

bool contains_class(const std::vector<CandidateSegment>& cands, SegmentClass c) {
    for (const auto& cand : cands) {
        if (cand.cls == c) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("default graph: parents, roots, reachability") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    CHECK(g.parent(cls("6")) == cls("5"));
    CHECK(g.parent(cls("11")) == cls("5"));
    CHECK(g.parent(cls("12")) == cls("5"));
    CHECK(g.parent(cls("16")) == cls("4"));
    CHECK(!g.parent(cls("1")).has_value());
    CHECK(!g.parent(cls("5")).has_value());

    REQUIRE(g.roots().size() == 2);
    CHECK(g.roots()[0] == cls("1"));
    CHECK(g.roots()[1] == cls("5"));

    // every vertex reachable from exactly one root
    std::set<SegmentClass> right_side, left_side;
    for (SegmentClass c : g.bfs_order(Laterality::Right)) right_side.insert(c);
    for (SegmentClass c : g.bfs_order(Laterality::Left)) left_side.insert(c);
    CHECK(right_side.size() == 8);
    CHECK(left_side.size() == 17);
    for (SegmentClass c : right_side) CHECK(left_side.count(c) == 0);

    const auto path = g.root_path(cls("16c"));
    const std::vector<SegmentClass> expected = {cls("1"), cls("2"), cls("3"),
                                                cls("4"), cls("16"), cls("16c")};
    CHECK(path == expected);
    CHECK(g.depth(cls("5")) == 0);
    CHECK(g.depth(cls("8")) == 3);
}

TEST_CASE("classify_laterality by weight and the documented example") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    // comparable weights on 5 and 6 dominate the stray right-side 1
    const CandidateSet mixed = make_set({
        candidate(cls("5"), square_mask(128, 128, 10, 10, 20), 0.9),
        candidate(cls("6"), square_mask(128, 128, 40, 10, 20), 0.85),
        candidate(cls("1"), square_mask(128, 128, 90, 90, 20), 0.8),
    });
    CHECK(angio::classify_laterality(mixed, g) == Laterality::Left);

    const CandidateSet right = make_set({
        candidate(cls("1"), square_mask(128, 128, 10, 10, 20), 0.9),
        candidate(cls("2"), square_mask(128, 128, 40, 10, 20), 0.8),
        candidate(cls("3"), square_mask(128, 128, 70, 10, 20), 0.7),
    });
    CHECK(angio::classify_laterality(right, g) == Laterality::Right);

    // 0.9 * 2000 = 1800 beats 0.95 * 500 = 475
    Mask big(128, 128);
    int placed = 0;
    for (int y = 0; y < 128 && placed < 2000; ++y) {
        for (int x = 0; x < 128 && placed < 2000; ++x) {
            big.set(x, y);
            ++placed;
        }
    }
    Mask small(128, 128);
    placed = 0;
    for (int y = 100; y < 128 && placed < 500; ++y) {
        for (int x = 0; x < 128 && placed < 500; ++x) {
            small.set(x, y);
            ++placed;
        }
    }
    const CandidateSet weighted =
        make_set({candidate(cls("5"), big, 0.9), candidate(cls("1"), small, 0.95)});
    CHECK(angio::classify_laterality(weighted, g) == Laterality::Left);

    CHECK_THROWS_AS(angio::classify_laterality(make_set({}), g), std::invalid_argument);
}

TEST_CASE("validate_tree removes the intruding right segment (the published scenario)") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    const CandidateSet set = make_set({
        candidate(cls("5"), square_mask(128, 128, 10, 10, 20), 0.9),
        candidate(cls("6"), square_mask(128, 128, 35, 10, 20), 0.85),
        candidate(cls("1"), square_mask(128, 128, 90, 90, 20), 0.8),
    });
    const ValidationReport report = angio::validate_tree(set, g);
    CHECK(report.laterality == Laterality::Left);
    REQUIRE(report.kept.size() == 2);
    CHECK(contains_class(report.kept, cls("5")));
    CHECK(contains_class(report.kept, cls("6")));
    REQUIRE(report.removed.size() == 1);
    CHECK(report.removed.front().first.cls == cls("1"));
    CHECK(report.removed.front().second == RemovalReason::laterality_conflict);
}

TEST_CASE("a consistent right chain passes untouched") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    const CandidateSet set = make_set({
        candidate(cls("1"), square_mask(128, 128, 10, 10, 20), 0.9),
        candidate(cls("2"), square_mask(128, 128, 35, 10, 20), 0.8),
        candidate(cls("3"), square_mask(128, 128, 60, 10, 20), 0.7),
    });
    const ValidationReport report = angio::validate_tree(set, g);
    CHECK(report.kept.size() == 3);
    CHECK(report.removed.empty());
}

TEST_CASE("strict ancestry drops candidates over a missing parent; bridging can keep them") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    // 5 at (10,10); 7 nearby but 6 missing entirely
    const CandidateSet set = make_set({
        candidate(cls("5"), square_mask(128, 128, 10, 10, 20), 0.9),
        candidate(cls("7"), square_mask(128, 128, 40, 10, 20), 0.8),
    });

    ValidationParams strict;
    strict.mode = AncestryMode::strict;
    const ValidationReport rs = angio::validate_tree(set, g, strict);
    REQUIRE(rs.kept.size() == 1);
    CHECK(rs.kept.front().cls == cls("5"));
    REQUIRE(rs.removed.size() == 1);
    CHECK(rs.removed.front().second == RemovalReason::orphan_path);

    ValidationParams bridging;  // default distance 50
    const ValidationReport rb = angio::validate_tree(set, g, bridging);
    CHECK(rb.kept.size() == 2);  // gap of 10 px bridges to segment 5

    // same masks pushed far apart: bridging refuses too
    const CandidateSet far = make_set({
        candidate(cls("5"), square_mask(128, 128, 0, 0, 10), 0.9),
        candidate(cls("7"), square_mask(128, 128, 100, 100, 10), 0.8),
    });
    const ValidationReport rf = angio::validate_tree(far, g, bridging);
    REQUIRE(rf.kept.size() == 1);
    CHECK(rf.removed.front().second == RemovalReason::orphan_path);
}

TEST_CASE("duplicate classes collapse onto the most confident candidate") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    const CandidateSet set = make_set({
        candidate(cls("5"), square_mask(128, 128, 10, 10, 20), 0.9, "a"),
        candidate(cls("6"), square_mask(128, 128, 35, 10, 20), 0.7, "a"),
        candidate(cls("6"), square_mask(128, 128, 36, 11, 20), 0.8, "b"),
    });
    const ValidationReport report = angio::validate_tree(set, g);
    REQUIRE(report.kept.size() == 2);
    for (const CandidateSegment& cand : report.kept) {
        if (cand.cls == cls("6")) CHECK(cand.confidence == 0.8);
    }
    REQUIRE(report.removed.size() == 1);
    CHECK(report.removed.front().second == RemovalReason::duplicate_class);
    CHECK(report.removed.front().first.confidence == 0.7);
}

TEST_CASE("validation invariants on randomized candidate soups") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> conf(0.1, 1.0);
    std::uniform_int_distribution<int> slot(0, 7);
    std::uniform_int_distribution<int> any_class(0, angio::kSegmentClassCount - 1);
    std::bernoulli_distribution child_included(0.65);

    for (int trial = 0; trial < 30; ++trial) {
        const Laterality side = trial % 2 == 0 ? Laterality::Left : Laterality::Right;
        std::vector<CandidateSegment> cands;
        // grow a prefix-closed tree from the root
        std::set<SegmentClass> included;
        for (SegmentClass c : g.bfs_order(side)) {
            const auto parent = g.parent(c);
            const bool parent_ok = !parent || included.count(*parent);
            if (parent_ok && (!parent || child_included(rng))) included.insert(c);
        }
        int used_slots = 0;
        for (SegmentClass c : included) {
            cands.push_back(candidate(c, square_mask(128, 128, (used_slots % 8) * 16,
                                                     (used_slots / 8) * 16, 12),
                                      conf(rng)));
            ++used_slots;
        }
        // noise: random classes anywhere, duplicates allowed
        const int noise = trial % 4;
        for (int i = 0; i < noise; ++i) {
            cands.push_back(candidate(static_cast<SegmentClass>(any_class(rng)),
                                      square_mask(128, 128, slot(rng) * 16, slot(rng) * 16, 12),
                                      conf(rng)));
        }

        ValidationParams strict;
        strict.mode = AncestryMode::strict;
        const ValidationReport report = angio::validate_tree(make_set(std::move(cands)), g, strict);

        // kept is laterality-pure
        for (const CandidateSegment& cand : report.kept) {
            CHECK(g.laterality(cand.cls) == report.laterality);
        }
        // kept is ancestrally closed at class level
        std::set<SegmentClass> kept_classes;
        for (const CandidateSegment& cand : report.kept) kept_classes.insert(cand.cls);
        for (SegmentClass c : kept_classes) {
            for (SegmentClass anc : g.root_path(c)) CHECK(kept_classes.count(anc) == 1);
        }
        // no duplicate classes survive
        CHECK(kept_classes.size() == report.kept.size());
        // idempotent: validating the kept set changes nothing
        CandidateSet again = make_set(report.kept);
        if (!again.segments.empty()) {
            const ValidationReport second = angio::validate_tree(again, g, strict);
            CHECK(second.removed.empty());
            CHECK(second.kept.size() == report.kept.size());
        }
        // input partition: kept + removed = input
        CHECK(report.kept.size() + report.removed.size() ==
              included.size() + static_cast<std::size_t>(noise));
    }
}

TEST_CASE("resolve_confusables reorders swapped sibling labels by distance") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    // 6 anchors the {9, 9a} family; the candidate labeled 9a sits closer to 6
    const CandidateSet set = make_set({
        candidate(cls("5"), square_mask(128, 128, 0, 0, 12), 0.95),
        candidate(cls("6"), square_mask(128, 128, 14, 0, 12), 0.9),
        candidate(cls("9a"), square_mask(128, 128, 30, 0, 12), 0.8),
        candidate(cls("9"), square_mask(128, 128, 60, 0, 12), 0.7),
    });
    ValidationReport report = angio::validate_tree(set, g);
    REQUIRE(report.kept.size() == 4);
    report = angio::resolve_confusables(std::move(report), g);

    REQUIRE(report.relabels.size() == 2);
    for (const CandidateSegment& cand : report.kept) {
        if (cand.mask.get(31, 1)) CHECK(cand.cls == cls("9"));   // the closer mask
        if (cand.mask.get(61, 1)) CHECK(cand.cls == cls("9a"));  // the farther mask
    }

    // masks are preserved, only labels permute
    std::multiset<long long> in_areas, out_areas;
    for (const CandidateSegment& cand : set.segments) in_areas.insert(cand.mask.area());
    for (const CandidateSegment& cand : report.kept) out_areas.insert(cand.mask.area());
    CHECK(in_areas == out_areas);

    // idempotent: already sorted input is unchanged
    const ValidationReport again = angio::resolve_confusables(report, g);
    CHECK(again.relabels.size() == report.relabels.size());
    for (std::size_t i = 0; i < report.kept.size(); ++i) {
        CHECK(again.kept[i].cls == report.kept[i].cls);
    }
}

TEST_CASE("resolve_confusables leaves singletons and anchorless families alone") {
    const AnatomyGraph g = AnatomyGraph::defaults();
    // single member: nothing to sort
    const CandidateSet single = make_set({
        candidate(cls("5"), square_mask(128, 128, 0, 0, 12), 0.95),
        candidate(cls("6"), square_mask(128, 128, 14, 0, 12), 0.9),
        candidate(cls("9"), square_mask(128, 128, 30, 0, 12), 0.8),
    });
    ValidationReport r1 = angio::resolve_confusables(angio::validate_tree(single, g), g);
    CHECK(r1.relabels.empty());

    // both 9 and 9a present but 6 (the anchor) missing: left unchanged.
    // bridging keeps them near 5 even without 6.
    const CandidateSet anchorless = make_set({
        candidate(cls("5"), square_mask(128, 128, 0, 0, 12), 0.95),
        candidate(cls("9a"), square_mask(128, 128, 14, 0, 12), 0.8),
        candidate(cls("9"), square_mask(128, 128, 28, 0, 12), 0.7),
    });
    ValidationReport r2 = angio::validate_tree(anchorless, g);
    REQUIRE(r2.kept.size() == 3);
    r2 = angio::resolve_confusables(std::move(r2), g);
    CHECK(r2.relabels.empty());
    CHECK(contains_class(r2.kept, cls("9a")));
}

TEST_CASE("graph config files load, validate, and reject structural errors") {
    namespace fs = std::filesystem;
    const fs::path good_path = fs::temp_directory_path() / "angio_graph_good.cfg";
    {
        std::ofstream out(good_path);
        out << "# test graph\n";
        out << "roots 1 5\n";
        const AnatomyGraph g = AnatomyGraph::defaults();
        for (SegmentClass c : angio::all_segment_classes()) {
            if (const auto p = g.parent(c)) {
                out << "edge " << angio::to_string(*p) << " " << angio::to_string(c) << "\n";
            }
        }
        out << "laterality Right 1 2 3 4 16 16a 16b 16c\n";
        out << "laterality Left 5 6 7 8 9 9a 10 10a 11 12 12a 12b 13 14 14a 14b 15\n";
    }
    const AnatomyGraph loaded = AnatomyGraph::load(good_path);
    CHECK(loaded.parent(cls("6")) == cls("5"));
    CHECK(loaded.laterality(cls("16c")) == Laterality::Right);
    CHECK(loaded.bfs_order(Laterality::Left).size() == 17);

    const fs::path bad_path = fs::temp_directory_path() / "angio_graph_bad.cfg";
    {
        std::ofstream out(bad_path);
        out << "roots 1 5\nedge 1 2\nedge 3 2\n";  // 2 has two parents
    }
    CHECK_THROWS_AS(AnatomyGraph::load(bad_path), std::runtime_error);

    {
        std::ofstream out(bad_path);
        out << "roots 1 5\nlaterality Right 1\nlaterality Left 1\n";  // both sides
    }
    CHECK_THROWS_AS(AnatomyGraph::load(bad_path), std::runtime_error);

    CHECK_THROWS_AS(AnatomyGraph::load(fs::temp_directory_path() / "missing_graph.cfg"),
                    std::runtime_error);
}
