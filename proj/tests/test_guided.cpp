#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "angio/guided.hpp"
#include "oracles.hpp"

using angio::GrayImage;
using angio::GuidedFilterParams;

namespace {

// smooth content plus fine texture so every window has variance
GrayImage textured_fixture(int n, std::uint32_t seed) {
    GrayImage img = oracles::random_image(n, n, seed, -10.0, 10.0);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            img.at(x, y) += 120.0 + 60.0 * std::sin(2.0 * std::numbers::pi * x / n) *
                                         std::cos(2.0 * std::numbers::pi * y / n) +
                            40.0 * x / n;
        }
    }
    return img;
}

}  // namespace

TEST_CASE("box_mean matches the naive window scan") {
    const GrayImage img = oracles::random_image(16, 16, 3);
    for (int r : {1, 3, 8}) {
        CHECK(oracles::max_abs_diff(angio::box_mean(img, r), oracles::naive_box_mean(img, r)) <
              1e-10);
    }
}

TEST_CASE("self-guided filter with eps=0 and no subsampling is the identity") {
    const GrayImage img = textured_fixture(32, 17);
    const GrayImage out = angio::fast_guided_filter(img, {4, 0.0, 1});
    CHECK(oracles::max_abs_diff(out, img) < 1e-9);
}

TEST_CASE("a constant guide reduces to window-averaged means of the input") {
    const GrayImage p = oracles::random_image(24, 24, 29);
    const GrayImage guide(24, 24, 50.0);
    const int r = 4;
    const GrayImage out = angio::fast_guided_filter(p, guide, {r, 0.2, 1});
    // a == 0 everywhere, so q is the window average of the window means
    const GrayImage expected = oracles::naive_box_mean(oracles::naive_box_mean(p, r), r);
    CHECK(oracles::max_abs_diff(out, expected) < 1e-9);
}

TEST_CASE("subsampled filter stays within 2% RMS of the exact filter") {
    const GrayImage img = textured_fixture(32, 43);
    const GrayImage exact = oracles::naive_guided_filter(img, img, 8, 0.2);
    const GrayImage fast = angio::fast_guided_filter(img, {8, 0.2, 2});
    CHECK(oracles::rms_diff(fast, exact) < 0.02 * 255.0);

    // and the unsubsampled path agrees with the oracle almost exactly
    const GrayImage full = angio::fast_guided_filter(img, {8, 0.2, 1});
    CHECK(oracles::max_abs_diff(full, exact) < 1e-9);
}

TEST_CASE("filter is linear in the input for a fixed guide") {
    const GrayImage guide = textured_fixture(24, 51);
    const GrayImage p = oracles::random_image(24, 24, 52, 20.0, 230.0);
    GrayImage remapped = p;
    for (double& v : remapped.data) v = 1.7 * v + 22.0;

    const GuidedFilterParams params{4, 0.1, 1};
    const GrayImage q = angio::fast_guided_filter(p, guide, params);
    const GrayImage q_remapped = angio::fast_guided_filter(remapped, guide, params);
    GrayImage expected = q;
    for (double& v : expected.data) v = 1.7 * v + 22.0;
    CHECK(oracles::max_abs_diff(q_remapped, expected) < 1e-9);
}

TEST_CASE("increasing eps moves the output toward the flat-guide limit") {
    const GrayImage img = textured_fixture(32, 61);
    // the eps -> infinity limit: a -> 0, b -> window mean, q -> averaged means
    const GrayImage limit = oracles::naive_box_mean(oracles::naive_box_mean(img, 4), 4);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
        const GrayImage out = angio::fast_guided_filter(img, {4, eps, 1});
        const double distance = oracles::rms_diff(out, limit);
        CHECK(distance <= previous + 1e-12);
        previous = distance;
    }
}

TEST_CASE("guided filter parameter and dimension checks") {
    const GrayImage img(8, 8, 1.0);
    const GrayImage other(9, 8, 1.0);
    CHECK_THROWS_AS(angio::fast_guided_filter(img, other, {4, 0.2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(angio::fast_guided_filter(img, {0, 0.2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(angio::fast_guided_filter(img, {4, -0.1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(angio::fast_guided_filter(img, {4, 0.2, 0}), std::invalid_argument);
}
