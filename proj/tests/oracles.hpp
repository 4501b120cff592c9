// Independent reference implementations used to check the library: direct
// double-sum DFTs, footprint-scan morphology, windowed-statistics guided
// filtering, per-pixel polygon tests. Deliberately written the slow, obvious
// way and kept free of the production code paths they verify.
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "angio/image_core.hpp"
#include "angio/mask.hpp"
#include "angio/morphology.hpp"

namespace oracles {

// ---- spectral ----

std::vector<std::complex<double>> naive_dft2(const angio::GrayImage& img);
std::vector<std::complex<double>> naive_idft2(const std::vector<std::complex<double>>& spec,
                                              int width, int height);

// Orientation wedge of a centered frequency bin, folded into [0, pi);
// boundary bins go to the lower-index wedge, theta == 0 to wedge 0.
int wedge_of_bin(int u, int v, int width, int height, int directions);

// Spectral energy |F|^2 per wedge from the naive DFT (DC excluded).
std::vector<double> wedge_energies(const angio::GrayImage& img, int directions);

// ---- image_core ----

angio::GrayImage naive_gaussian(const angio::GrayImage& img, double sigma);

// ---- morphology ----

angio::GrayImage naive_erode(const angio::GrayImage& img, const angio::StructuringElement& se);
angio::GrayImage naive_dilate(const angio::GrayImage& img, const angio::StructuringElement& se);
angio::GrayImage naive_top_hat(const angio::GrayImage& img, const angio::StructuringElement& se);
angio::GrayImage naive_black_hat(const angio::GrayImage& img, const angio::StructuringElement& se);

// ---- guided ----

angio::GrayImage naive_box_mean(const angio::GrayImage& img, int radius);
// Exact (full-resolution) guided filter via explicit window statistics,
// including the /255 pre-scaling of the production filter.
angio::GrayImage naive_guided_filter(const angio::GrayImage& input, const angio::GrayImage& guide,
                                     int radius, double epsilon);

// ---- polygons ----

// Even-odd point-in-polygon test of the pixel-center grid.
angio::Mask pointwise_polygon_fill(const std::vector<std::vector<double>>& rings, int width,
                                   int height);

// ---- fixtures ----

angio::GrayImage random_image(int width, int height, std::uint32_t seed, double lo = 0.0,
                              double hi = 255.0);

// cos(2*pi*(u0*x/W + v0*y/H)) stripes around a mid-gray level.
angio::GrayImage stripe_image(int width, int height, int u0, int v0, double amplitude = 100.0,
                              double offset = 128.0);

// Dark curvilinear ridge on a bright, lightly textured background.
angio::GrayImage vessel_phantom(int width, int height, std::uint32_t seed = 7);

double max_abs_diff(const angio::GrayImage& a, const angio::GrayImage& b);
double rms_diff(const angio::GrayImage& a, const angio::GrayImage& b);

}  // namespace oracles
