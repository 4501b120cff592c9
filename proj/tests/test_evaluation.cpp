#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "angio/evaluation.hpp"
#include "angio/tree_logic.hpp"
#include "oracles.hpp"

using angio::CandidateSegment;
using angio::CandidateSet;
using angio::ClassTally;
using angio::EvalReport;
using angio::ImageScores;
using angio::Mask;
using angio::SegmentClass;

namespace {

SegmentClass cls(const char* name) { return *angio::segment_class_from_string(name); }

Mask square_mask(int w, int h, int x0, int y0, int side) {
    Mask m(w, h);
    for (int y = y0; y < y0 + side; ++y) {
        for (int x = x0; x < x0 + side; ++x) m.set(x, y);
    }
    return m;
}

CandidateSegment candidate(SegmentClass c, Mask mask, double conf = 1.0) {
    CandidateSegment cand;
    cand.cls = c;
    cand.mask = std::move(mask);
    cand.confidence = conf;
    cand.source = "t";
    return cand;
}

CandidateSet make_set(std::vector<CandidateSegment> segments, long long id = 1, int size = 64) {
    CandidateSet set;
    set.image_id = id;
    set.width = size;
    set.height = size;
    set.segments = std::move(segments);
    return set;
}

}  // namespace

TEST_CASE("perfect predictions score 1.0 per present class") {
    const CandidateSet gt = make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 10)),
                                      candidate(cls("6"), square_mask(64, 64, 25, 5, 10))});
    const ImageScores scores = angio::f1_image(gt, gt);
    REQUIRE(scores.size() == 2);
    for (const auto& [c, tally] : scores) {
        CHECK(tally.f1() == 1.0);
        CHECK(tally.fp == 0);
        CHECK(tally.fn == 0);
    }
}

TEST_CASE("empty predictions score 0 against non-empty ground truth") {
    const CandidateSet gt = make_set({candidate(cls("6"), square_mask(64, 64, 5, 5, 10))});
    const CandidateSet pred = make_set({});
    const ImageScores scores = angio::f1_image(pred, gt);
    REQUIRE(scores.count(cls("6")) == 1);
    CHECK(scores.at(cls("6")).f1() == 0.0);
    CHECK(scores.at(cls("6")).fn == 100);
}

TEST_CASE("a half-shifted square gives f1 = 0.5 (pixel-count oracle)") {
    const Mask gt_mask = square_mask(64, 64, 10, 10, 10);
    const Mask pred_mask = square_mask(64, 64, 15, 10, 10);
    long long inter = 0;
    for (std::size_t i = 0; i < gt_mask.bits.size(); ++i) {
        inter += gt_mask.bits[i] & pred_mask.bits[i];
    }
    CHECK(inter == 50);

    const ImageScores scores = angio::f1_image(make_set({candidate(cls("6"), pred_mask)}),
                                               make_set({candidate(cls("6"), gt_mask)}));
    const ClassTally& tally = scores.at(cls("6"));
    CHECK(tally.tp == 50);
    CHECK(tally.fp == 50);
    CHECK(tally.fn == 50);
    CHECK(tally.f1() == 0.5);
}

TEST_CASE("same-class masks are pooled before counting") {
    const CandidateSet pred = make_set({candidate(cls("6"), square_mask(64, 64, 0, 0, 4)),
                                        candidate(cls("6"), square_mask(64, 64, 0, 0, 4)),
                                        candidate(cls("6"), square_mask(64, 64, 10, 0, 4))});
    const CandidateSet gt = make_set({candidate(cls("6"), square_mask(64, 64, 0, 0, 4))});
    const ClassTally& tally = angio::f1_image(pred, gt).at(cls("6"));
    CHECK(tally.tp == 16);
    CHECK(tally.fp == 16);  // duplicate overlap counted once, the union once
    CHECK(tally.fn == 0);
}

TEST_CASE("f1 is symmetric under swapping prediction and ground truth") {
    const CandidateSet a = make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 12)),
                                     candidate(cls("7"), square_mask(64, 64, 30, 30, 8))});
    const CandidateSet b = make_set({candidate(cls("5"), square_mask(64, 64, 9, 5, 12)),
                                     candidate(cls("6"), square_mask(64, 64, 45, 45, 6))});
    const ImageScores ab = angio::f1_image(a, b);
    const ImageScores ba = angio::f1_image(b, a);
    REQUIRE(ab.size() == ba.size());
    for (const auto& [c, tally] : ab) {
        CHECK(tally.tp == ba.at(c).tp);
        CHECK(tally.fp == ba.at(c).fn);
        CHECK(tally.fn == ba.at(c).fp);
        CHECK(tally.f1() == doctest::Approx(ba.at(c).f1()));
    }
}

TEST_CASE("adding a pure false positive never raises any f1") {
    const CandidateSet gt = make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 12))});
    const CandidateSet pred = make_set({candidate(cls("5"), square_mask(64, 64, 6, 5, 12))});
    CandidateSet pred_plus = pred;
    pred_plus.segments.push_back(candidate(cls("2"), square_mask(64, 64, 40, 40, 10)));
    pred_plus.segments.push_back(candidate(cls("5"), square_mask(64, 64, 50, 50, 6)));

    const ImageScores before = angio::f1_image(pred, gt);
    const ImageScores after = angio::f1_image(pred_plus, gt);
    for (const auto& [c, tally] : before) {
        CHECK(after.at(c).f1() <= tally.f1());
    }
    // the fabricated class shows up with f1 = 0
    CHECK(after.at(cls("2")).f1() == 0.0);
}

TEST_CASE("classes absent from both sides stay out of the scores") {
    const CandidateSet gt = make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 10))});
    const ImageScores scores = angio::f1_image(gt, gt);
    CHECK(scores.size() == 1);
    CHECK(scores.count(cls("6")) == 0);
}

TEST_CASE("f1_image rejects mismatched grids") {
    const CandidateSet a = make_set({}, 1, 64);
    const CandidateSet b = make_set({}, 1, 32);
    CHECK_THROWS_AS(angio::f1_image(a, b), std::invalid_argument);
}

TEST_CASE("aggregate of a single image reproduces its scores") {
    const CandidateSet gt = make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 10)),
                                      candidate(cls("6"), square_mask(64, 64, 25, 5, 10))});
    const CandidateSet pred = make_set({candidate(cls("5"), square_mask(64, 64, 10, 5, 10)),
                                        candidate(cls("6"), square_mask(64, 64, 25, 5, 10))});
    std::map<long long, ImageScores> per_image;
    per_image[1] = angio::f1_image(pred, gt);
    const EvalReport report = angio::aggregate(per_image);
    for (const auto& [c, tally] : per_image.at(1)) {
        CHECK(report.per_class_f1.at(c) == doctest::Approx(tally.f1()));
    }
    const double macro = (per_image.at(1).at(cls("5")).f1() + per_image.at(1).at(cls("6")).f1()) / 2;
    CHECK(report.mean_f1 == doctest::Approx(macro));
}

TEST_CASE("two images with identical counts pool to the same per-class f1") {
    const CandidateSet gt = make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 10))});
    const CandidateSet pred = make_set({candidate(cls("5"), square_mask(64, 64, 10, 5, 10))});
    std::map<long long, ImageScores> per_image;
    per_image[1] = angio::f1_image(pred, gt);
    per_image[2] = per_image[1];
    const EvalReport report = angio::aggregate(per_image);
    CHECK(report.per_class_f1.at(cls("5")) == doctest::Approx(per_image.at(1).at(cls("5")).f1()));
}

TEST_CASE("aggregate over a mixed corpus matches a hand-pooled recount") {
    std::map<long long, ImageScores> per_image;
    per_image[1] = angio::f1_image(
        make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 10))}, 1),
        make_set({candidate(cls("5"), square_mask(64, 64, 8, 5, 10))}, 1));
    per_image[2] = angio::f1_image(
        make_set({candidate(cls("6"), square_mask(64, 64, 5, 5, 10)),
                  candidate(cls("5"), square_mask(64, 64, 30, 30, 10))}, 2),
        make_set({candidate(cls("6"), square_mask(64, 64, 5, 5, 10))}, 2));
    per_image[3] = angio::f1_image(make_set({}, 3),
                                   make_set({candidate(cls("7"), square_mask(64, 64, 1, 1, 8))}, 3));

    const EvalReport report = angio::aggregate(per_image);

    // recount pooled tallies independently
    std::map<SegmentClass, ClassTally> pooled;
    double macro_sum = 0.0;
    int macro_n = 0;
    for (const auto& [id, scores] : per_image) {
        for (const auto& [c, tally] : scores) {
            pooled[c].tp += tally.tp;
            pooled[c].fp += tally.fp;
            pooled[c].fn += tally.fn;
            macro_sum += tally.f1();
            ++macro_n;
        }
    }
    REQUIRE(report.per_class_f1.size() == pooled.size());
    for (const auto& [c, tally] : pooled) {
        CHECK(report.per_class_f1.at(c) == doctest::Approx(tally.f1()).epsilon(1e-12));
    }
    CHECK(report.mean_f1 == doctest::Approx(macro_sum / macro_n).epsilon(1e-12));
}

TEST_CASE("validation of the published scenario lifts the mean f1 to 1.0") {
    const angio::AnatomyGraph g = angio::AnatomyGraph::defaults();
    const CandidateSet gt = make_set({candidate(cls("5"), square_mask(128, 128, 10, 10, 20)),
                                      candidate(cls("6"), square_mask(128, 128, 35, 10, 20))},
                                     1, 128);
    CandidateSet pred = gt;
    pred.segments.push_back(candidate(cls("1"), square_mask(128, 128, 90, 90, 20), 0.8));

    std::map<long long, ImageScores> before;
    before[1] = angio::f1_image(pred, gt);
    const double mean_before = angio::aggregate(before).mean_f1;

    const angio::ValidationReport validated = angio::validate_tree(pred, g);
    CandidateSet cleaned = pred;
    cleaned.segments = validated.kept;
    std::map<long long, ImageScores> after;
    after[1] = angio::f1_image(cleaned, gt);
    const double mean_after = angio::aggregate(after).mean_f1;

    CHECK(mean_before == doctest::Approx(2.0 / 3.0));
    CHECK(mean_after == 1.0);
    CHECK(mean_after > mean_before);
}

TEST_CASE("report files are written with stable keys and parse back") {
    std::map<long long, ImageScores> per_image;
    per_image[7] = angio::f1_image(
        make_set({candidate(cls("5"), square_mask(64, 64, 5, 5, 10))}, 7),
        make_set({candidate(cls("5"), square_mask(64, 64, 8, 5, 10))}, 7));
    const EvalReport report = angio::aggregate(per_image);

    const auto path = std::filesystem::temp_directory_path() / "angio_eval_report.json";
    angio::write_report(path, report);
    std::ifstream in(path);
    const nlohmann::json doc = nlohmann::json::parse(in);
    CHECK(doc["mean_f1"].get<double>() == doctest::Approx(report.mean_f1));
    CHECK(doc["per_class_f1"].contains("5"));
    CHECK(doc["per_image"].contains("7"));

    std::ostringstream table;
    angio::print_report(table, report);
    CHECK(table.str().find("macro mean_f1") != std::string::npos);
    CHECK(table.str().find("micro mean_f1") != std::string::npos);
}
