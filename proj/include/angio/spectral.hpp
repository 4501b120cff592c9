#pragma once

#include <complex>
#include <vector>

#include "angio/image_core.hpp"

namespace angio {

/// Complex frequency-domain image, row-major, DC coefficient at (0,0).
/// Convention: unnormalized forward transform, 1/N on the inverse.
struct Spectrum {
    int width = 0;
    int height = 0;
    std::vector<std::complex<double>> data;

    Spectrum() = default;
    Spectrum(int w, int h);

    std::complex<double>& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
    std::complex<double> at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
};

enum class FilterKind { lowpass, highpass };

/// Real per-bin gains in [0,1], same layout as Spectrum.
struct FilterMask {
    int width = 0;
    int height = 0;
    std::vector<double> gains;

    double at(int u, int v) const { return gains[static_cast<std::size_t>(v) * width + u]; }
};

Spectrum dft2(const GrayImage& img);

/// Real part of the inverse transform; the imaginary residue of spectra
/// produced by dft2 plus real symmetric masks is at rounding level.
GrayImage idft2(const Spectrum& spec);

/// Butterworth transfer mask: gain = 1 / (1 + (D/d0)^(2n)) with D the
/// centered distance from DC; highpass is 1 - lowpass. Throws for d0 <= 0
/// or order < 1.
FilterMask butterworth_mask(int width, int height, double d0, int order,
                            FilterKind kind = FilterKind::lowpass);

Spectrum apply_mask(const Spectrum& spec, const FilterMask& mask);

/// Log-domain frequency enhancement: ln(1+I) -> DFT -> Butterworth mask ->
/// inverse -> exp(.)-1 -> min-max rescale to [0,255]. The default highpass
/// kind suppresses smooth illumination and glare.
GrayImage homomorphic_enhance(const GrayImage& img, double d0, int order,
                              FilterKind kind = FilterKind::highpass);

struct DfbParams {
    int directions = 8;
    double cutoff = 0.19634954084936207;  // pi/16, normalized radian frequency
    double stopband_db = 40.0;
    double transition = 0.19634954084936207;  // raised-cosine transition width
};

/// Full-resolution angular wedge decomposition: directional image i carries
/// the spectrum restricted to orientations [i*pi/D, (i+1)*pi/D) plus the
/// antipodal wedge, after a separable high-pass that suppresses the
/// near-DC background. Bins exactly on a wedge boundary go to the
/// lower-index wedge; the DC bin belongs to no wedge.
std::vector<GrayImage> directional_decompose(const GrayImage& img, const DfbParams& params = {});

/// Per-pixel maximum over the directional images, added back onto the input
/// and min-max rescaled to [0,255].
GrayImage directional_filter_bank(const GrayImage& img, const DfbParams& params = {});

}  // namespace angio
