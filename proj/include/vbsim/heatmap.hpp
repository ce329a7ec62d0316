#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "vbsim/geometry.hpp"

namespace vbsim {

/// Piecewise-linear interpolant over a Delaunay triangulation of scattered
/// points. Throws GeometryError("degenerate interpolation input") when fewer
/// than three distinct points are given or all of them are collinear.
class LinearInterpolant {
public:
    LinearInterpolant(std::span<const Point> points, std::span<const double> values);

    /// Value at `p` if it lies in the convex hull of the data.
    std::optional<double> at(Point p) const;
    /// Vertex indices of the triangle containing `p`, if any.
    std::optional<std::array<int, 3>> containing_triangle(Point p) const;
    /// Data point closest to `p`.
    int nearest(Point p) const;

    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<Point>& points() const { return points_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<Point> points_;
    std::vector<double> values_;
    std::vector<std::array<int, 3>> triangles_;  // counter-clockwise
};

/// Regular grid of node values over the domain's bounding box. Nodes sit at
/// the centers of an nx-by-ny partition of the box, row-major from the south.
/// Nodes outside the domain are missing (NaN). Nodes inside the domain but
/// outside the convex hull of the data take the nearest data value.
struct HeatmapGrid {
    int nx = 0;
    int ny = 0;
    std::vector<double> x;       // nx node abscissae
    std::vector<double> y;       // ny node ordinates
    std::vector<double> values;  // ny * nx, NaN when missing

    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
};

HeatmapGrid interpolate_heatmap(const SpatialDomain& domain, std::span<const Point> points,
                                std::span<const double> values, int nx, int ny);

} // namespace vbsim
