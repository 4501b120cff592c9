#pragma once

#include "angio/image_core.hpp"

namespace angio {

struct GuidedFilterParams {
    int radius = 8;         // window half-width, full resolution
    double epsilon = 0.2;   // regularization on the [0,1] intensity scale
    int subsample = 1;      // coefficient resolution divisor (1 = exact filter)
};

/// Box mean over a (2*radius+1)^2 window via summed-area table; windows are
/// shrunk at the borders and normalized by the pixels actually covered.
GrayImage box_mean(const GrayImage& img, int radius);

/// Edge-preserving smoothing where the output is a local linear function of
/// the guide: q = a*I + b with a = cov(I,p)/(var(I)+eps), b = mean(p)
/// - a*mean(I), coefficients window-averaged. With subsample > 1 the
/// coefficients are computed at reduced resolution and upsampled bilinearly.
/// Intensities are pre-scaled to [0,1] internally (epsilon lives on that
/// scale) and scaled back afterwards; no clamping is applied.
GrayImage fast_guided_filter(const GrayImage& input, const GrayImage& guide,
                             const GuidedFilterParams& params);

/// Self-guided variant (guide = input), the default use.
GrayImage fast_guided_filter(const GrayImage& input, const GuidedFilterParams& params);

}  // namespace angio
