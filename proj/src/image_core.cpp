#include "angio/image_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace angio {

GrayImage::GrayImage(int w, int h, double fill) {
    if (w <= 0 || h <= 0) {
        throw std::invalid_argument("GrayImage: dimensions must be positive");
    }
    width = w;
    height = h;
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

ImageStats image_stats(const GrayImage& img) {
    if (img.empty()) {
        throw std::invalid_argument("image_stats: empty image");
    }
    double sum = 0.0;
    for (double v : img.data) sum += v;
    const double mean = sum / static_cast<double>(img.pixel_count());
    double sq = 0.0;
    for (double v : img.data) {
        const double d = v - mean;
        sq += d * d;
    }
    return {mean, sq / static_cast<double>(img.pixel_count())};
}

GrayImage normalize(const GrayImage& img, double m0, double var0) {
    if (var0 < 0.0) {
        throw std::invalid_argument("normalize: var0 must be non-negative");
    }
    const ImageStats stats = image_stats(img);
    GrayImage out(img.width, img.height);
    if (stats.variance <= 0.0) {
        // The mapping divides by VAR; a flat input maps to a flat m0 image.
        std::fill(out.data.begin(), out.data.end(), m0);
        return out;
    }
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double p = img.data[i];
        const double d = p - stats.mean;
        const double dev = std::sqrt(var0 * d * d / stats.variance);
        out.data[i] = p > stats.mean ? m0 + dev : m0 - dev;
    }
    return out;
}

namespace {

constexpr int kHistBins = 256;

int bin_of(double v) {
    int b = static_cast<int>(std::lround(v));
    return std::clamp(b, 0, kHistBins - 1);
}

// Clip histogram bins at clip_count and spread the excess evenly; the
// remainder goes one count each to the lowest bins so the result is exact.
void clip_histogram(std::vector<int>& hist, int clip_count) {
    long long excess = 0;
    for (int& h : hist) {
        if (h > clip_count) {
            excess += h - clip_count;
            h = clip_count;
        }
    }
    if (excess == 0) return;
    const int per_bin = static_cast<int>(excess / kHistBins);
    int remainder = static_cast<int>(excess % kHistBins);
    for (int i = 0; i < kHistBins; ++i) {
        hist[i] += per_bin;
        if (i < remainder) hist[i] += 1;
    }
}

std::vector<double> global_equalize_map(const std::vector<int>& hist, long long total) {
    // Classic equalization anchored at the lowest occupied level so the
    // extremes of the occupied range map to the extremes of [0,255].
    std::vector<double> map(kHistBins, 0.0);
    long long cdf_min = 0;
    for (int i = 0; i < kHistBins; ++i) {
        if (hist[i] > 0) {
            cdf_min = hist[i];
            break;
        }
    }
    if (total == cdf_min) {
        for (int i = 0; i < kHistBins; ++i) map[i] = static_cast<double>(i);
        return map;
    }
    long long cdf = 0;
    for (int i = 0; i < kHistBins; ++i) {
        cdf += hist[i];
        map[i] = 255.0 * static_cast<double>(cdf - cdf_min) /
                 static_cast<double>(total - cdf_min);
        map[i] = std::clamp(map[i], 0.0, 255.0);
    }
    return map;
}

}  // namespace

GrayImage adaptive_equalize(const GrayImage& img, int tile, double clip_limit) {
    if (img.empty()) {
        throw std::invalid_argument("adaptive_equalize: empty image");
    }
    if (tile < 1) {
        throw std::invalid_argument("adaptive_equalize: tile must be >= 1");
    }
    if (clip_limit <= 0.0) {
        throw std::invalid_argument("adaptive_equalize: clip_limit must be > 0");
    }

    const double lo = min_value(img);
    const double hi = max_value(img);
    if (lo == hi) return img;  // single level: keep it, also makes the op idempotent

    if (tile > img.width || tile > img.height) {
        std::vector<int> hist(kHistBins, 0);
        for (double v : img.data) hist[bin_of(v)]++;
        const auto map = global_equalize_map(hist, static_cast<long long>(img.pixel_count()));
        GrayImage out(img.width, img.height);
        for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = map[bin_of(img.data[i])];
        return out;
    }

    const int nx = (img.width + tile - 1) / tile;
    const int ny = (img.height + tile - 1) / tile;
    const long long tile_area = static_cast<long long>(tile) * tile;
    const int clip_count = std::max(1, static_cast<int>(std::lround(clip_limit * tile_area)));

    // Per-tile mappings over edge-replicated tiles so partial border tiles
    // see the same pixel count as interior ones.
    std::vector<std::vector<double>> maps(static_cast<std::size_t>(nx) * ny);
    std::vector<int> hist(kHistBins);
    for (int ty = 0; ty < ny; ++ty) {
        for (int tx = 0; tx < nx; ++tx) {
            std::fill(hist.begin(), hist.end(), 0);
            for (int dy = 0; dy < tile; ++dy) {
                const int y = std::min(ty * tile + dy, img.height - 1);
                for (int dx = 0; dx < tile; ++dx) {
                    const int x = std::min(tx * tile + dx, img.width - 1);
                    hist[bin_of(img.at(x, y))]++;
                }
            }
            clip_histogram(hist, clip_count);
            std::vector<double> map(kHistBins);
            long long cdf = 0;
            for (int i = 0; i < kHistBins; ++i) {
                cdf += hist[i];
                map[i] = 255.0 * static_cast<double>(cdf) / static_cast<double>(tile_area);
            }
            maps[static_cast<std::size_t>(ty) * nx + tx] = std::move(map);
        }
    }

    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const double fy = (y + 0.5) / tile - 0.5;
        int ty0 = static_cast<int>(std::floor(fy));
        double wy = fy - ty0;
        ty0 = std::clamp(ty0, 0, ny - 1);
        const int ty1 = std::min(ty0 + 1, ny - 1);
        if (fy < 0) wy = 0.0;
        if (fy > ny - 1) wy = 1.0;
        for (int x = 0; x < img.width; ++x) {
            const double fx = (x + 0.5) / tile - 0.5;
            int tx0 = static_cast<int>(std::floor(fx));
            double wx = fx - tx0;
            tx0 = std::clamp(tx0, 0, nx - 1);
            const int tx1 = std::min(tx0 + 1, nx - 1);
            if (fx < 0) wx = 0.0;
            if (fx > nx - 1) wx = 1.0;
            const int b = bin_of(img.at(x, y));
            const double v00 = maps[static_cast<std::size_t>(ty0) * nx + tx0][b];
            const double v01 = maps[static_cast<std::size_t>(ty0) * nx + tx1][b];
            const double v10 = maps[static_cast<std::size_t>(ty1) * nx + tx0][b];
            const double v11 = maps[static_cast<std::size_t>(ty1) * nx + tx1][b];
            out.at(x, y) = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11);
        }
    }
    return out;
}

namespace {

int reflect_index(int i, int n) {
    // symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1, ...
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

}  // namespace

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
    if (img.empty()) {
        throw std::invalid_argument("gaussian_smooth: empty image");
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian_smooth: sigma must be > 0");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    // Separable passes; the product of the two normalized 1D kernels equals
    // the normalized square-truncated 2D kernel.
    GrayImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * img.at(reflect_index(x + k, img.width), y);
            }
            tmp.at(x, y) = acc;
        }
    }
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * tmp.at(x, reflect_index(y + k, img.height));
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

double min_value(const GrayImage& img) {
    if (img.empty()) throw std::invalid_argument("min_value: empty image");
    return *std::min_element(img.data.begin(), img.data.end());
}

double max_value(const GrayImage& img) {
    if (img.empty()) throw std::invalid_argument("max_value: empty image");
    return *std::max_element(img.data.begin(), img.data.end());
}

GrayImage rescale_to_byte_range(const GrayImage& img) {
    const double lo = min_value(img);
    const double hi = max_value(img);
    if (hi - lo < 1e-12) {
        return clamp_values(img, 0.0, 255.0);
    }
    GrayImage out(img.width, img.height);
    const double scale = 255.0 / (hi - lo);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = (img.data[i] - lo) * scale;
    }
    return out;
}

GrayImage clamp_values(const GrayImage& img, double lo, double hi) {
    GrayImage out = img;
    for (double& v : out.data) v = std::clamp(v, lo, hi);
    return out;
}

}  // namespace angio
