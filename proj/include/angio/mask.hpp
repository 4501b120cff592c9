#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace angio {

/// Binary pixel set over an image grid.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // row-major, 0/1

    Mask() = default;
    Mask(int w, int h);

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v = true) {
        bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }

    long long area() const;
    bool empty_mask() const { return area() == 0; }
    bool same_grid(const Mask& other) const {
        return width == other.width && height == other.height;
    }

    /// Centroid of the set pixels, in pixel-center coordinates.
    std::pair<double, double> centroid() const;

    bool intersects(const Mask& other) const;

    /// One step of binary erosion with the 3x3 cross element; pixels outside
    /// the grid count as background.
    Mask erode_cross() const;
};

long long intersection_area(const Mask& a, const Mask& b);
Mask mask_union(const Mask& a, const Mask& b);

/// Intersection-over-union of the set pixels; 0 when both are empty.
double mask_iou(const Mask& a, const Mask& b);

/// Minimum Euclidean distance between the two pixel sets (0 if they touch
/// or overlap); computed over boundary pixels. Infinity if either is empty.
double mask_distance(const Mask& a, const Mask& b);

}  // namespace angio
