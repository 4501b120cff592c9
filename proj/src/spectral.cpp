#include "angio/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace angio {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

void run_dft(const std::complex<double>* in, std::complex<double>* out, int width, int height,
             int sign) {
    // FFTW_ESTIMATE leaves the input untouched during planning.
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_dft_2d(
            height, width,
            reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
            reinterpret_cast<fftw_complex*>(out), sign, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("dft2: FFTW plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
}

// Signed frequency index measured from DC with wraparound.
inline int centered(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace

Spectrum::Spectrum(int w, int h) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Spectrum: dimensions must be positive");
    width = w;
    height = h;
    data.assign(static_cast<std::size_t>(w) * h, {0.0, 0.0});
}

Spectrum dft2(const GrayImage& img) {
    if (img.empty()) throw std::invalid_argument("dft2: empty image");
    std::vector<std::complex<double>> in(img.pixel_count());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = {img.data[i], 0.0};
    Spectrum spec(img.width, img.height);
    run_dft(in.data(), spec.data.data(), img.width, img.height, FFTW_FORWARD);
    return spec;
}

GrayImage idft2(const Spectrum& spec) {
    if (spec.data.empty()) throw std::invalid_argument("idft2: empty spectrum");
    std::vector<std::complex<double>> out(spec.data.size());
    run_dft(spec.data.data(), out.data(), spec.width, spec.height, FFTW_BACKWARD);
    GrayImage img(spec.width, spec.height);
    const double scale = 1.0 / static_cast<double>(spec.data.size());
    for (std::size_t i = 0; i < out.size(); ++i) img.data[i] = out[i].real() * scale;
    return img;
}

FilterMask butterworth_mask(int width, int height, double d0, int order, FilterKind kind) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("butterworth_mask: dimensions must be positive");
    }
    if (d0 <= 0.0) throw std::invalid_argument("butterworth_mask: d0 must be > 0");
    if (order < 1) throw std::invalid_argument("butterworth_mask: order must be >= 1");

    FilterMask mask;
    mask.width = width;
    mask.height = height;
    mask.gains.resize(static_cast<std::size_t>(width) * height);
    for (int v = 0; v < height; ++v) {
        const double fv = centered(v, height);
        for (int u = 0; u < width; ++u) {
            const double fu = centered(u, width);
            const double d = std::sqrt(fu * fu + fv * fv);
            const double g = 1.0 / (1.0 + std::pow(d / d0, 2.0 * order));
            mask.gains[static_cast<std::size_t>(v) * width + u] =
                kind == FilterKind::lowpass ? g : 1.0 - g;
        }
    }
    return mask;
}

Spectrum apply_mask(const Spectrum& spec, const FilterMask& mask) {
    if (spec.width != mask.width || spec.height != mask.height) {
        throw std::invalid_argument("apply_mask: dimension mismatch");
    }
    Spectrum out = spec;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.gains[i];
    return out;
}

GrayImage homomorphic_enhance(const GrayImage& img, double d0, int order, FilterKind kind) {
    if (img.empty()) throw std::invalid_argument("homomorphic_enhance: empty image");
    GrayImage logimg(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        logimg.data[i] = std::log1p(std::max(img.data[i], 0.0));
    }
    const FilterMask mask = butterworth_mask(img.width, img.height, d0, order, kind);
    GrayImage filtered = idft2(apply_mask(dft2(logimg), mask));
    for (double& v : filtered.data) v = std::expm1(v);
    return rescale_to_byte_range(filtered);
}

namespace {

// Orientation wedge of a centered frequency bin, folded into [0, pi).
// Boundary bins belong to the lower-index wedge; theta = 0 (shared between
// wedge 0's lower edge and the wrapped upper edge of the last wedge) goes
// to wedge 0.
int wedge_of(double fu, double fv, int directions) {
    double theta = std::atan2(fv, fu);
    if (theta < 0.0) theta += std::numbers::pi;
    if (theta >= std::numbers::pi) theta -= std::numbers::pi;
    const double step = std::numbers::pi / directions;
    const double t = theta / step;
    const double nearest = std::round(t);
    if (std::abs(t - nearest) < 1e-9) {
        const int k = static_cast<int>(nearest);
        if (k <= 0 || k >= directions) return 0;
        return k - 1;
    }
    int k = static_cast<int>(std::floor(t));
    if (k >= directions) k = directions - 1;
    return k;
}

// 1D raised-cosine lowpass profile on |omega| used to build the separable
// high-pass: unity inside the cutoff, cosine taper across the transition.
double lowpass_profile(double w, double cutoff, double transition) {
    const double aw = std::abs(w);
    if (aw <= cutoff) return 1.0;
    if (aw >= cutoff + transition) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (aw - cutoff) / transition));
}

}  // namespace

std::vector<GrayImage> directional_decompose(const GrayImage& img, const DfbParams& params) {
    if (img.empty()) throw std::invalid_argument("directional_decompose: empty image");
    if (params.directions < 2) {
        throw std::invalid_argument("directional_decompose: directions must be >= 2");
    }
    if (params.cutoff <= 0.0 || params.transition <= 0.0) {
        throw std::invalid_argument("directional_decompose: cutoff/transition must be > 0");
    }

    const int w = img.width;
    const int h = img.height;
    const double stop_gain = std::pow(10.0, -params.stopband_db / 20.0);

    const Spectrum spec = dft2(img);

    // Separable high-pass: the stop rectangle |wu|,|wv| <= cutoff keeps only
    // the stopband gain; far from DC the gain reaches 1.
    std::vector<double> highpass(spec.data.size());
    std::vector<int> wedge(spec.data.size());
    for (int v = 0; v < h; ++v) {
        const double fv = centered(v, h);
        const double wv = 2.0 * std::numbers::pi * fv / h;
        for (int u = 0; u < w; ++u) {
            const double fu = centered(u, w);
            const double wu = 2.0 * std::numbers::pi * fu / w;
            const std::size_t i = static_cast<std::size_t>(v) * w + u;
            const double lp = lowpass_profile(wu, params.cutoff, params.transition) *
                              lowpass_profile(wv, params.cutoff, params.transition);
            highpass[i] = stop_gain + (1.0 - stop_gain) * (1.0 - lp);
            wedge[i] = (fu == 0.0 && fv == 0.0) ? -1 : wedge_of(fu, fv, params.directions);
        }
    }

    std::vector<GrayImage> bands;
    bands.reserve(static_cast<std::size_t>(params.directions));
    Spectrum masked(w, h);
    for (int d = 0; d < params.directions; ++d) {
        for (std::size_t i = 0; i < spec.data.size(); ++i) {
            masked.data[i] = wedge[i] == d ? spec.data[i] * highpass[i] : 0.0;
        }
        bands.push_back(idft2(masked));
    }
    return bands;
}

GrayImage directional_filter_bank(const GrayImage& img, const DfbParams& params) {
    const std::vector<GrayImage> bands = directional_decompose(img, params);
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        double best = bands[0].data[i];
        for (std::size_t d = 1; d < bands.size(); ++d) best = std::max(best, bands[d].data[i]);
        out.data[i] = img.data[i] + best;
    }
    return rescale_to_byte_range(out);
}

}  // namespace angio
