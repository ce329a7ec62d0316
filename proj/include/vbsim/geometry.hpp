#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vbsim {

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

/// Closed polygon ring; the closing vertex may be repeated or omitted.
using Ring = std::vector<Point>;

struct BoundingBox {
    Point lower;
    Point upper;
};

/// 0/1 raster read from the documented ASCII mask format. `rows[0]` is the
/// northernmost row; `origin` is the lower-left corner of the raster.
struct AsciiMask {
    int nrows = 0;
    int ncols = 0;
    double cell_size = 0.0;
    Point origin;
    std::vector<std::string> rows;
};

AsciiMask parse_ascii_mask(std::istream& in);
std::vector<Ring> parse_polygon_list(std::istream& in);

/// Neighbor slots in `SpatialDomain::neighbors`.
enum Side : int { kEast = 0, kWest = 1, kNorth = 2, kSouth = 3 };

/// Uniform square-cell raster of the study region. Cells inside the region
/// ("active" cells) are numbered 0..size()-1 in row-major order starting at
/// the south-west corner; all per-cell fields use that numbering.
class SpatialDomain {
public:
    SpatialDomain(int nx, int ny, double cell_size, Point origin, std::vector<unsigned char> mask);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double cell_size() const { return cell_size_; }
    double cell_area() const { return cell_size_ * cell_size_; }
    Point origin() const { return origin_; }
    BoundingBox bounding_box() const;

    std::size_t size() const { return cells_.size(); }

    bool masked_in(int i, int j) const;
    /// Active-cell index of grid position (i, j), or -1.
    int cell_at(int i, int j) const;
    std::array<int, 2> grid_position(int cell) const;
    Point center(int cell) const;
    const std::array<int, 4>& neighbors(int cell) const { return neighbors_[cell]; }

    const std::vector<int>& interior_cells() const { return interior_; }
    const std::vector<int>& boundary_cells() const { return boundary_; }

    /// Active cell whose square contains `p`, if any.
    std::optional<int> locate(Point p) const;
    /// Active cell with the closest center to `p`.
    int nearest_cell(Point p) const;

private:
    int nx_;
    int ny_;
    double cell_size_;
    Point origin_;
    std::vector<unsigned char> mask_;
    std::vector<int> index_;  // grid -> active cell or -1
    std::vector<int> cells_;  // active cell -> grid
    std::vector<std::array<int, 4>> neighbors_;
    std::vector<int> interior_;
    std::vector<int> boundary_;
};

/// Rasterizes the union of `rings`; a cell is in when its center lies inside
/// or on the edge of any ring.
SpatialDomain build_domain(const std::vector<Ring>& rings, double cell_size);
SpatialDomain build_domain(const AsciiMask& mask);

struct DomainMeasures {
    double lebesgue = 0.0;  // |Omega|
    double mu = 0.0;        // |Omega|_mu, integral of dx / D
};

DomainMeasures domain_measures(const SpatialDomain& domain, std::span<const double> diffusion);
DomainMeasures domain_measures(const SpatialDomain& domain, double diffusion);

bool point_in_polygon(Point p, const Ring& ring);
bool point_in_polygons(Point p, const std::vector<Ring>& rings);
bool ring_is_simple(const Ring& ring);

/// Simplified outline of the Mediterranean arc of southern France in
/// kilometres (x east, y north), with the introduction site near the
/// eastern border.
Ring mediterranean_arc();
Point mediterranean_arc_introduction();

} // namespace vbsim
