#include "angio/evaluation.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace angio {

double ClassTally::f1() const {
    const long long denom = 2 * tp + fp + fn;
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

ImageScores f1_image(const CandidateSet& pred, const CandidateSet& gt) {
    if (pred.width != gt.width || pred.height != gt.height) {
        throw std::invalid_argument("f1_image: prediction/ground-truth grid mismatch");
    }

    std::map<SegmentClass, Mask> pred_union, gt_union;
    for (const CandidateSegment& cand : pred.segments) {
        auto it = pred_union.find(cand.cls);
        if (it == pred_union.end()) {
            pred_union.emplace(cand.cls, cand.mask);
        } else {
            it->second = mask_union(it->second, cand.mask);
        }
    }
    for (const CandidateSegment& cand : gt.segments) {
        auto it = gt_union.find(cand.cls);
        if (it == gt_union.end()) {
            gt_union.emplace(cand.cls, cand.mask);
        } else {
            it->second = mask_union(it->second, cand.mask);
        }
    }

    ImageScores scores;
    for (SegmentClass cls : all_segment_classes()) {
        const auto p = pred_union.find(cls);
        const auto g = gt_union.find(cls);
        if (p == pred_union.end() && g == gt_union.end()) continue;
        ClassTally tally;
        if (p != pred_union.end() && g != gt_union.end()) {
            const long long inter = intersection_area(p->second, g->second);
            tally.tp = inter;
            tally.fp = p->second.area() - inter;
            tally.fn = g->second.area() - inter;
        } else if (p != pred_union.end()) {
            tally.fp = p->second.area();
        } else {
            tally.fn = g->second.area();
        }
        scores[cls] = tally;
    }
    return scores;
}

EvalReport aggregate(const std::map<long long, ImageScores>& per_image) {
    EvalReport report;
    report.per_image = per_image;

    std::map<SegmentClass, ClassTally> pooled;
    double macro_sum = 0.0;
    long long macro_count = 0;
    for (const auto& [image_id, scores] : per_image) {
        for (const auto& [cls, tally] : scores) {
            if (!tally.present()) continue;
            pooled[cls].tp += tally.tp;
            pooled[cls].fp += tally.fp;
            pooled[cls].fn += tally.fn;
            macro_sum += tally.f1();
            ++macro_count;
        }
    }
    double micro_sum = 0.0;
    for (const auto& [cls, tally] : pooled) {
        report.per_class_f1[cls] = tally.f1();
        micro_sum += tally.f1();
    }
    report.mean_f1 = macro_count > 0 ? macro_sum / static_cast<double>(macro_count) : 0.0;
    report.micro_mean_f1 =
        pooled.empty() ? 0.0 : micro_sum / static_cast<double>(pooled.size());
    return report;
}

void write_report(const std::filesystem::path& file, const EvalReport& report) {
    nlohmann::json doc;
    doc["mean_f1"] = report.mean_f1;
    doc["micro_mean_f1"] = report.micro_mean_f1;
    doc["per_class_f1"] = nlohmann::json::object();
    for (const auto& [cls, f1] : report.per_class_f1) {
        doc["per_class_f1"][std::string(to_string(cls))] = f1;
    }
    doc["per_image"] = nlohmann::json::object();
    for (const auto& [image_id, scores] : report.per_image) {
        nlohmann::json img = nlohmann::json::object();
        for (const auto& [cls, tally] : scores) {
            img[std::string(to_string(cls))] = {
                {"tp", tally.tp}, {"fp", tally.fp}, {"fn", tally.fn}, {"f1", tally.f1()}};
        }
        doc["per_image"][std::to_string(image_id)] = std::move(img);
    }
    std::ofstream out(file);
    if (!out) throw std::runtime_error("write_report: cannot open " + file.string());
    out << doc.dump(2) << "\n";
}

void print_report(std::ostream& os, const EvalReport& report) {
    os << "class      tp          fp          fn          f1\n";
    std::map<SegmentClass, ClassTally> pooled;
    for (const auto& [image_id, scores] : report.per_image) {
        for (const auto& [cls, tally] : scores) {
            pooled[cls].tp += tally.tp;
            pooled[cls].fp += tally.fp;
            pooled[cls].fn += tally.fn;
        }
    }
    for (const auto& [cls, tally] : pooled) {
        os << std::left << std::setw(10) << to_string(cls) << " " << std::setw(11) << tally.tp
           << " " << std::setw(11) << tally.fp << " " << std::setw(11) << tally.fn << " "
           << std::fixed << std::setprecision(4) << tally.f1() << "\n";
    }
    os << "macro mean_f1 " << std::fixed << std::setprecision(4) << report.mean_f1
       << "  (per-image, per-present-class average)\n";
    os << "micro mean_f1 " << std::fixed << std::setprecision(4) << report.micro_mean_f1
       << "  (average of pooled per-class f1)\n";
}

}  // namespace angio
