#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "angio/mask.hpp"

namespace angio {

/// The 25 SYNTAX coronary segment labels, in canonical order. The extra
/// "background" class of the detector never appears in a candidate.
enum class SegmentClass : std::uint8_t {
    s1, s2, s3, s4, s5, s6, s7, s8, s9, s9a, s10, s10a, s11, s12, s12a, s12b,
    s13, s14, s14a, s14b, s15, s16, s16a, s16b, s16c,
};

inline constexpr int kSegmentClassCount = 25;

std::string_view to_string(SegmentClass cls);
std::optional<SegmentClass> segment_class_from_string(std::string_view name);
const std::array<SegmentClass, kSegmentClassCount>& all_segment_classes();

/// One detector proposal: label, pixel mask, confidence, producing source.
struct CandidateSegment {
    SegmentClass cls = SegmentClass::s1;
    Mask mask;
    double confidence = 1.0;
    std::string source;
};

/// All proposals for one image.
struct CandidateSet {
    long long image_id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;
    std::vector<CandidateSegment> segments;
};

/// Rasterize polygon rings (COCO vertex lists x0,y0,x1,y1,...) onto a w x h
/// grid with the even-odd rule; a pixel is covered when its center lies
/// inside. Self-intersecting rings are handled by the same rule.
Mask rasterize_polygons(const std::vector<std::vector<double>>& rings, int width, int height);

/// Parse a COCO-style annotation file (images / annotations / categories).
/// Categories must carry the SYNTAX label strings; annotations are polygon
/// lists with an optional `score` (default 1.0). Every candidate gets the
/// given source tag. Malformed records raise std::runtime_error naming the
/// record index. Annotations that rasterize to an empty mask are dropped.
std::vector<CandidateSet> parse_candidates(const std::filesystem::path& file,
                                           const std::string& source_tag = "");

/// Serialize candidate sets in the same schema. Masks are encoded as exact
/// rectangle-decomposition polygons, so parse(write(x)) reproduces the
/// classes and rasterized masks bit for bit.
void write_candidates(const std::filesystem::path& file,
                      const std::vector<CandidateSet>& sets);

/// Remove candidates whose mask area is strictly below min_area.
CandidateSet area_filter(const CandidateSet& set, long long min_area = 450);

/// Remove candidates whose class is in the exclusion list.
CandidateSet class_filter(const CandidateSet& set, const std::vector<SegmentClass>& excluded);

/// Training-frequency exclusion list: {10, 10a, 14a, 15, 16, 16a, 16b, 16c, 12b}.
const std::vector<SegmentClass>& default_excluded_classes();

/// Pool candidates from several per-model sets of the same image. Same-class
/// candidates with IoU >= threshold are fused (mask union, max confidence,
/// sources concatenated); fusion repeats until stable, so the result is
/// idempotent under re-merging. Overlapping candidates of different classes
/// are all retained for the anatomy validator to adjudicate.
CandidateSet merge_ensemble(const std::vector<CandidateSet>& sets, double iou_threshold = 0.5);

/// Serial binary erosion with the 3x3 cross. If a step would empty the mask,
/// the last non-empty stage is returned.
CandidateSegment erode_mask(const CandidateSegment& candidate, int iterations);

}  // namespace angio
