#include "angio/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace angio {

StructuringElement StructuringElement::disk(int radius) {
    if (radius < 0) throw std::invalid_argument("StructuringElement: radius must be >= 0");
    StructuringElement se;
    se.radius = radius;
    const int side = 2 * radius + 1;
    se.mask.assign(static_cast<std::size_t>(side) * side, 0);
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy <= radius * radius) {
                se.mask[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] = 1;
            }
        }
    }
    return se;
}

namespace {

enum class Extremum { min, max };

// Sliding min/max over centered windows of half-width w with edge
// replication, via the van Herk/Gil-Werman block prefix/suffix scheme
// (about three comparisons per pixel regardless of window size). Scratch
// buffers are caller-owned so row loops do not reallocate.
struct RowFilterScratch {
    std::vector<double> padded, prefix, suffix;
};

void sliding_extremum_row(const double* row, int n, int w, Extremum kind, double* out,
                          RowFilterScratch& scratch) {
    if (w <= 0) {
        std::copy(row, row + n, out);
        return;
    }
    const int k = 2 * w + 1;
    const int m = n + 2 * w;
    scratch.padded.resize(static_cast<std::size_t>(m));
    scratch.prefix.resize(static_cast<std::size_t>(m));
    scratch.suffix.resize(static_cast<std::size_t>(m));
    double* pad = scratch.padded.data();
    double* pre = scratch.prefix.data();
    double* suf = scratch.suffix.data();

    for (int i = 0; i < w; ++i) pad[i] = row[0];
    std::copy(row, row + n, pad + w);
    for (int i = w + n; i < m; ++i) pad[i] = row[n - 1];

    for (int start = 0; start < m; start += k) {
        const int end = std::min(start + k, m);
        pre[start] = pad[start];
        if (kind == Extremum::min) {
            for (int i = start + 1; i < end; ++i) pre[i] = std::min(pre[i - 1], pad[i]);
            suf[end - 1] = pad[end - 1];
            for (int i = end - 2; i >= start; --i) suf[i] = std::min(suf[i + 1], pad[i]);
        } else {
            for (int i = start + 1; i < end; ++i) pre[i] = std::max(pre[i - 1], pad[i]);
            suf[end - 1] = pad[end - 1];
            for (int i = end - 2; i >= start; --i) suf[i] = std::max(suf[i + 1], pad[i]);
        }
    }

    // window for output x covers padded [x, x + k - 1]
    if (kind == Extremum::min) {
        for (int x = 0; x < n; ++x) out[x] = std::min(suf[x], pre[x + k - 1]);
    } else {
        for (int x = 0; x < n; ++x) out[x] = std::max(suf[x], pre[x + k - 1]);
    }
}

// Per-row half-widths of the footprint. The disk's rows are contiguous
// intervals, so min/max over the footprint decomposes into 1D row filters.
std::vector<int> row_half_widths(const StructuringElement& se) {
    std::vector<int> widths(static_cast<std::size_t>(2 * se.radius + 1), -1);
    for (int dy = -se.radius; dy <= se.radius; ++dy) {
        int wmax = -1;
        for (int dx = 0; dx <= se.radius; ++dx) {
            if (se.contains(dx, dy)) wmax = dx;
        }
        widths[static_cast<std::size_t>(dy + se.radius)] = wmax;  // -1: empty row
    }
    return widths;
}

GrayImage morph(const GrayImage& img, const StructuringElement& se, Extremum kind) {
    if (img.empty()) throw std::invalid_argument("morphology: empty image");
    const int w = img.width;
    const int h = img.height;
    const auto widths = row_half_widths(se);

    // Row-filtered copies of the whole image, one per distinct half-width;
    // width 0 is the image itself.
    std::map<int, std::vector<double>> filtered;
    RowFilterScratch scratch;
    for (int hw : widths) {
        if (hw <= 0 || filtered.count(hw)) continue;
        std::vector<double> f(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y) {
            sliding_extremum_row(img.data.data() + static_cast<std::size_t>(y) * w, w, hw, kind,
                                 f.data() + static_cast<std::size_t>(y) * w, scratch);
        }
        filtered.emplace(hw, std::move(f));
    }

    std::vector<const double*> filtered_by_dy(widths.size(), nullptr);
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (widths[i] == 0) {
            filtered_by_dy[i] = img.data.data();
        } else if (widths[i] > 0) {
            filtered_by_dy[i] = filtered.at(widths[i]).data();
        }
    }

    // accumulate each output row once so the destination stays in cache
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        double* dst = out.data.data() + static_cast<std::size_t>(y) * w;
        bool first = true;
        for (int dy = -se.radius; dy <= se.radius; ++dy) {
            const double* base = filtered_by_dy[static_cast<std::size_t>(dy + se.radius)];
            if (!base) continue;  // empty footprint row
            const int sy = std::clamp(y + dy, 0, h - 1);  // replicated border
            const double* src = base + static_cast<std::size_t>(sy) * w;
            if (first) {
                std::copy(src, src + w, dst);
                first = false;
            } else if (kind == Extremum::min) {
                for (int x = 0; x < w; ++x) dst[x] = std::min(dst[x], src[x]);
            } else {
                for (int x = 0; x < w; ++x) dst[x] = std::max(dst[x], src[x]);
            }
        }
    }
    return out;
}

}  // namespace

GrayImage erode(const GrayImage& img, const StructuringElement& se) {
    return morph(img, se, Extremum::min);
}

GrayImage dilate(const GrayImage& img, const StructuringElement& se) {
    return morph(img, se, Extremum::max);
}

GrayImage open(const GrayImage& img, const StructuringElement& se) {
    return dilate(erode(img, se), se);
}

GrayImage close(const GrayImage& img, const StructuringElement& se) {
    return erode(dilate(img, se), se);
}

GrayImage top_hat(const GrayImage& img, const StructuringElement& se) {
    GrayImage opened = open(img, se);
    for (std::size_t i = 0; i < opened.data.size(); ++i) {
        opened.data[i] = img.data[i] - opened.data[i];
    }
    return opened;
}

GrayImage black_hat(const GrayImage& img, const StructuringElement& se) {
    GrayImage closed = close(img, se);
    for (std::size_t i = 0; i < closed.data.size(); ++i) {
        closed.data[i] -= img.data[i];
    }
    return closed;
}

std::vector<int> default_tophat_radii() { return {3, 5, 7, 9, 11, 13, 15, 17, 19}; }

MultiscaleParts multiscale_tophat_parts(const GrayImage& img, const std::vector<int>& radii) {
    if (radii.empty()) {
        throw std::invalid_argument("multiscale_tophat: radii must be non-empty");
    }
    for (std::size_t i = 1; i < radii.size(); ++i) {
        if (radii[i] <= radii[i - 1]) {
            throw std::invalid_argument("multiscale_tophat: radii must be strictly increasing");
        }
    }

    MultiscaleParts parts{GrayImage(img.width, img.height), GrayImage(img.width, img.height),
                          GrayImage(img.width, img.height), GrayImage(img.width, img.height)};
    GrayImage prev_top, prev_black;
    for (std::size_t s = 0; s < radii.size(); ++s) {
        const StructuringElement se = StructuringElement::disk(radii[s]);
        GrayImage th = top_hat(img, se);
        GrayImage bh = black_hat(img, se);
        for (std::size_t i = 0; i < th.data.size(); ++i) {
            if (s == 0) {
                parts.bright_max.data[i] = th.data[i];
                parts.dark_max.data[i] = bh.data[i];
            } else {
                parts.bright_max.data[i] = std::max(parts.bright_max.data[i], th.data[i]);
                parts.dark_max.data[i] = std::max(parts.dark_max.data[i], bh.data[i]);
                const double dt = th.data[i] - prev_top.data[i];
                const double db = bh.data[i] - prev_black.data[i];
                if (s == 1) {
                    parts.bright_diff.data[i] = dt;
                    parts.dark_diff.data[i] = db;
                } else {
                    parts.bright_diff.data[i] = std::max(parts.bright_diff.data[i], dt);
                    parts.dark_diff.data[i] = std::max(parts.dark_diff.data[i], db);
                }
            }
        }
        prev_top = std::move(th);
        prev_black = std::move(bh);
    }
    return parts;
}

GrayImage multiscale_tophat_enhance(const GrayImage& img, const std::vector<int>& radii) {
    const MultiscaleParts parts = multiscale_tophat_parts(img, radii);
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double bright = parts.bright_max.data[i] + parts.bright_diff.data[i];
        const double dark = parts.dark_max.data[i] + parts.dark_diff.data[i];
        out.data[i] = img.data[i] + bright - dark;
    }
    return rescale_to_byte_range(clamp_values(out, 0.0, 255.0));
}

}  // namespace angio
