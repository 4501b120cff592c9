#include "angio/mask.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace angio {

Mask::Mask(int w, int h) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Mask: dimensions must be positive");
    width = w;
    height = h;
    bits.assign(static_cast<std::size_t>(w) * h, 0);
}

long long Mask::area() const {
    long long n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

std::pair<double, double> Mask::centroid() const {
    double sx = 0.0, sy = 0.0;
    long long n = 0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (get(x, y)) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++n;
            }
        }
    }
    if (n == 0) throw std::logic_error("Mask::centroid: empty mask");
    return {sx / n, sy / n};
}

bool Mask::intersects(const Mask& other) const {
    if (!same_grid(other)) return false;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] && other.bits[i]) return true;
    }
    return false;
}

Mask Mask::erode_cross() const {
    Mask out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const bool keep = get(x, y) && x > 0 && get(x - 1, y) && x < width - 1 &&
                              get(x + 1, y) && y > 0 && get(x, y - 1) && y < height - 1 &&
                              get(x, y + 1);
            out.set(x, y, keep);
        }
    }
    return out;
}

long long intersection_area(const Mask& a, const Mask& b) {
    if (!a.same_grid(b)) throw std::invalid_argument("intersection_area: grid mismatch");
    long long n = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) n += (a.bits[i] & b.bits[i]);
    return n;
}

Mask mask_union(const Mask& a, const Mask& b) {
    if (!a.same_grid(b)) throw std::invalid_argument("mask_union: grid mismatch");
    Mask out = a;
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= b.bits[i];
    return out;
}

double mask_iou(const Mask& a, const Mask& b) {
    const long long inter = intersection_area(a, b);
    const long long uni = a.area() + b.area() - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

std::vector<std::pair<int, int>> boundary_pixels(const Mask& m) {
    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.get(x, y)) continue;
            const bool interior = x > 0 && m.get(x - 1, y) && x < m.width - 1 && m.get(x + 1, y) &&
                                  y > 0 && m.get(x, y - 1) && y < m.height - 1 && m.get(x, y + 1);
            if (!interior) pts.emplace_back(x, y);
        }
    }
    return pts;
}

}  // namespace

double mask_distance(const Mask& a, const Mask& b) {
    if (a.empty_mask() || b.empty_mask()) return std::numeric_limits<double>::infinity();
    if (a.same_grid(b) && a.intersects(b)) return 0.0;
    const auto pa = boundary_pixels(a);
    const auto pb = boundary_pixels(b);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [ax, ay] : pa) {
        for (const auto& [bx, by] : pb) {
            const double dx = ax - bx;
            const double dy = ay - by;
            best = std::min(best, dx * dx + dy * dy);
        }
    }
    return std::sqrt(best);
}

}  // namespace angio
