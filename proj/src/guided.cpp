#include "angio/guided.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace angio {

namespace {

GrayImage multiply(const GrayImage& a, const GrayImage& b) {
    GrayImage out(a.width, a.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    return out;
}

GrayImage scale_by(const GrayImage& img, double k) {
    GrayImage out = img;
    for (double& v : out.data) v *= k;
    return out;
}

// Block average over s x s cells; partial cells at the right/bottom edges
// average over the pixels they actually cover.
GrayImage box_downsample(const GrayImage& img, int s) {
    const int dw = (img.width + s - 1) / s;
    const int dh = (img.height + s - 1) / s;
    GrayImage out(dw, dh);
    for (int by = 0; by < dh; ++by) {
        const int y0 = by * s;
        const int y1 = std::min(y0 + s, img.height);
        for (int bx = 0; bx < dw; ++bx) {
            const int x0 = bx * s;
            const int x1 = std::min(x0 + s, img.width);
            double acc = 0.0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) acc += img.at(x, y);
            }
            out.at(bx, by) = acc / ((y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

GrayImage bilinear_upsample(const GrayImage& img, int dst_w, int dst_h, int s) {
    GrayImage out(dst_w, dst_h);
    for (int y = 0; y < dst_h; ++y) {
        const double fy = std::clamp((y + 0.5) / s - 0.5, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < dst_w; ++x) {
            const double fx =
                std::clamp((x + 0.5) / s - 0.5, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            out.at(x, y) = (1 - wy) * ((1 - wx) * img.at(x0, y0) + wx * img.at(x1, y0)) +
                           wy * ((1 - wx) * img.at(x0, y1) + wx * img.at(x1, y1));
        }
    }
    return out;
}

}  // namespace

GrayImage box_mean(const GrayImage& img, int radius) {
    if (img.empty()) throw std::invalid_argument("box_mean: empty image");
    if (radius < 0) throw std::invalid_argument("box_mean: radius must be >= 0");
    const int w = img.width;
    const int h = img.height;

    // sat(x,y) = sum over [0,x) x [0,y)
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double rowsum = 0.0;
        for (int x = 0; x < w; ++x) {
            rowsum += img.at(x, y);
            sat[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
                sat[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + rowsum;
        }
    }

    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(w - 1, x + radius);
            const double sum = sat[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
                               sat[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
                               sat[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
                               sat[static_cast<std::size_t>(y0) * (w + 1) + x0];
            out.at(x, y) = sum / ((y1 - y0 + 1) * (x1 - x0 + 1));
        }
    }
    return out;
}

GrayImage fast_guided_filter(const GrayImage& input, const GrayImage& guide,
                             const GuidedFilterParams& params) {
    if (input.width != guide.width || input.height != guide.height) {
        throw std::invalid_argument("fast_guided_filter: input/guide dimension mismatch");
    }
    if (input.empty()) throw std::invalid_argument("fast_guided_filter: empty image");
    if (params.radius < 1) throw std::invalid_argument("fast_guided_filter: radius must be >= 1");
    if (params.epsilon < 0.0) {
        throw std::invalid_argument("fast_guided_filter: epsilon must be >= 0");
    }
    if (params.subsample < 1) {
        throw std::invalid_argument("fast_guided_filter: subsample must be >= 1");
    }

    const GrayImage p_full = scale_by(input, 1.0 / 255.0);
    const GrayImage i_full = scale_by(guide, 1.0 / 255.0);

    const int s = params.subsample;
    const GrayImage p = s > 1 ? box_downsample(p_full, s) : p_full;
    const GrayImage ig = s > 1 ? box_downsample(i_full, s) : i_full;
    const int r = std::max(1, static_cast<int>(std::lround(static_cast<double>(params.radius) / s)));

    const GrayImage mean_i = box_mean(ig, r);
    const GrayImage mean_p = box_mean(p, r);
    const GrayImage corr_ii = box_mean(multiply(ig, ig), r);
    const GrayImage corr_ip = box_mean(multiply(ig, p), r);

    GrayImage a(ig.width, ig.height);
    GrayImage b(ig.width, ig.height);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double var = corr_ii.data[i] - mean_i.data[i] * mean_i.data[i];
        const double cov = corr_ip.data[i] - mean_i.data[i] * mean_p.data[i];
        const double denom = var + params.epsilon;
        // A flat window with eps = 0 has no usable slope; fall back to the
        // window mean there.
        a.data[i] = denom > 0.0 ? cov / denom : 0.0;
        b.data[i] = mean_p.data[i] - a.data[i] * mean_i.data[i];
    }

    const GrayImage mean_a = box_mean(a, r);
    const GrayImage mean_b = box_mean(b, r);
    const GrayImage a_up =
        s > 1 ? bilinear_upsample(mean_a, input.width, input.height, s) : mean_a;
    const GrayImage b_up =
        s > 1 ? bilinear_upsample(mean_b, input.width, input.height, s) : mean_b;

    GrayImage out(input.width, input.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = (a_up.data[i] * i_full.data[i] + b_up.data[i]) * 255.0;
    }
    return out;
}

GrayImage fast_guided_filter(const GrayImage& input, const GuidedFilterParams& params) {
    return fast_guided_filter(input, input, params);
}

}  // namespace angio
