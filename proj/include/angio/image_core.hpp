#pragma once

#include <cstddef>
#include <vector>

namespace angio {

/// Single-channel image held as row-major doubles, nominal range [0,255].
/// Intensities stay floating point across the whole filter chain; quantization
/// to 8 bits happens only at file export (see image_io.hpp).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    std::size_t pixel_count() const { return data.size(); }
    bool empty() const { return data.empty(); }
};

struct ImageStats {
    double mean = 0.0;
    double variance = 0.0;  // population variance
};

/// Mean and population variance over all pixels. Throws on an empty image.
ImageStats image_stats(const GrayImage& img);

/// Ridge-style intensity normalization: each pixel maps to
/// m0 +/- sqrt(var0 * (p - M)^2 / VAR), sign chosen by p > M, with M/VAR the
/// image statistics. A zero-variance input yields a constant image of m0.
GrayImage normalize(const GrayImage& img, double m0 = 128.0, double var0 = 100.0);

/// Contrast-limited adaptive histogram equalization with bilinear blending
/// between tile mappings. Falls back to global equalization when the tile
/// does not fit inside the image. Output values lie in [0,255].
GrayImage adaptive_equalize(const GrayImage& img, int tile = 64, double clip_limit = 0.01);

/// Isotropic Gaussian smoothing, kernel truncated at radius ceil(3*sigma) and
/// renormalized to unit sum; borders handled by symmetric reflection.
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

double min_value(const GrayImage& img);
double max_value(const GrayImage& img);

/// Min-max rescale to [0,255]. A (numerically) constant image has no usable
/// range; it is returned unchanged apart from clamping into [0,255].
GrayImage rescale_to_byte_range(const GrayImage& img);

/// Clamp every pixel into [lo,hi].
GrayImage clamp_values(const GrayImage& img, double lo, double hi);

}  // namespace angio
