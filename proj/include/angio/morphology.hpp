#pragma once

#include <cstdint>
#include <vector>

#include "angio/image_core.hpp"

namespace angio {

/// Binary disk footprint: true where dx^2 + dy^2 <= radius^2.
struct StructuringElement {
    int radius = 0;
    std::vector<std::uint8_t> mask;  // (2r+1)^2, row-major

    static StructuringElement disk(int radius);
    bool contains(int dx, int dy) const {
        return mask[static_cast<std::size_t>(dy + radius) * (2 * radius + 1) + (dx + radius)] != 0;
    }
};

/// Grayscale erosion/dilation: per-pixel min/max over the footprint,
/// borders handled by edge replication.
GrayImage erode(const GrayImage& img, const StructuringElement& se);
GrayImage dilate(const GrayImage& img, const StructuringElement& se);

GrayImage open(const GrayImage& img, const StructuringElement& se);
GrayImage close(const GrayImage& img, const StructuringElement& se);

/// img - open(img): bright details smaller than the footprint. Non-negative.
GrayImage top_hat(const GrayImage& img, const StructuringElement& se);
/// close(img) - img: dark details smaller than the footprint. Non-negative.
GrayImage black_hat(const GrayImage& img, const StructuringElement& se);

/// Intermediate max-projections of the multiscale enhancement, exposed for
/// inspection and tests. bright/dark "max" are the per-pixel maxima of the
/// top/black hats over all scales; "diff" are the maxima over
/// consecutive-scale differences (zero when only one scale is given).
struct MultiscaleParts {
    GrayImage bright_max;
    GrayImage bright_diff;
    GrayImage dark_max;
    GrayImage dark_diff;
};

MultiscaleParts multiscale_tophat_parts(const GrayImage& img, const std::vector<int>& radii);

std::vector<int> default_tophat_radii();  // {3,5,...,19}

/// Multiscale top-hat enhancement: I + (bright_max + bright_diff)
/// - (dark_max + dark_diff), clamped then min-max rescaled to [0,255].
/// Radii must be non-empty and strictly increasing.
GrayImage multiscale_tophat_enhance(const GrayImage& img, const std::vector<int>& radii);

inline GrayImage multiscale_tophat_enhance(const GrayImage& img) {
    return multiscale_tophat_enhance(img, default_tophat_radii());
}

}  // namespace angio
