#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>

#include "angio/candidates.hpp"

namespace angio {

/// Pixel confusion counts for one class; f1 uses the 2tp/(2tp+fp+fn) form.
struct ClassTally {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;

    bool present() const { return tp + fp + fn > 0; }
    double f1() const;
};

using ImageScores = std::map<SegmentClass, ClassTally>;

/// Per-class pixel overlap of one prediction set against ground truth.
/// Masks of the same class are pooled (union) on each side first; classes
/// absent from both sides contribute nothing. Throws on grid mismatch.
ImageScores f1_image(const CandidateSet& pred, const CandidateSet& gt);

struct EvalReport {
    std::map<long long, ImageScores> per_image;
    /// Pooled tp/fp/fn across images, per class (micro).
    std::map<SegmentClass, double> per_class_f1;
    /// Mean of per-image, per-present-class f1 values (macro). A class with
    /// tp = fp = fn = 0 is excluded from the average, never scored as 1.
    double mean_f1 = 0.0;
    /// Mean of the pooled per-class f1 values, for the micro-style view.
    double micro_mean_f1 = 0.0;
};

EvalReport aggregate(const std::map<long long, ImageScores>& per_image);

/// JSON report, keys sorted for byte-stable output.
void write_report(const std::filesystem::path& file, const EvalReport& report);

/// Human-readable table with per-class rows and macro/micro aggregate rows.
void print_report(std::ostream& os, const EvalReport& report);

}  // namespace angio
