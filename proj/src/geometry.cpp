#include "vbsim/geometry.hpp"

#include "vbsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

namespace vbsim {

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

Ring open_ring(const Ring& ring) {
    Ring r = ring;
    if (r.size() > 1 && r.front().x == r.back().x && r.front().y == r.back().y) {
        r.pop_back();
    }
    return r;
}

bool on_segment(Point p, Point a, Point b) {
    const double scale = std::max({std::abs(a.x), std::abs(a.y), std::abs(b.x), std::abs(b.y), 1.0});
    if (std::abs(cross(a, b, p)) > 1e-12 * scale * scale) {
        return false;
    }
    return p.x >= std::min(a.x, b.x) - 1e-12 * scale && p.x <= std::max(a.x, b.x) + 1e-12 * scale &&
           p.y >= std::min(a.y, b.y) - 1e-12 * scale && p.y <= std::max(a.y, b.y) + 1e-12 * scale;
}

int orientation(Point a, Point b, Point c) {
    const double v = cross(a, b, c);
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(q1, p1, p2)) return true;
    if (o2 == 0 && on_segment(q2, p1, p2)) return true;
    if (o3 == 0 && on_segment(p1, q1, q2)) return true;
    if (o4 == 0 && on_segment(p2, q1, q2)) return true;
    return false;
}

// Number of cells needed to cover `extent`, tolerant to round-off in extent/h.
int cells_to_cover(double extent, double h) {
    const double n = extent / h;
    return std::max(1, static_cast<int>(std::ceil(n - 1e-9 * std::max(1.0, n))));
}

} // namespace

bool point_in_polygon(Point p, const Ring& ring_in) {
    const Ring ring = open_ring(ring_in);
    const std::size_t n = ring.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = ring[i];
        const Point b = ring[j];
        if (on_segment(p, a, b)) {
            return true;
        }
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

bool point_in_polygons(Point p, const std::vector<Ring>& rings) {
    return std::any_of(rings.begin(), rings.end(), [&](const Ring& r) { return point_in_polygon(p, r); });
}

bool ring_is_simple(const Ring& ring_in) {
    const Ring ring = open_ring(ring_in);
    const std::size_t n = ring.size();
    if (n < 3) {
        return false;
    }
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = ring[i];
        const Point b = ring[(i + 1) % n];
        area2 += a.x * b.y - b.x * a.y;
    }
    if (area2 == 0.0) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const Point a1 = ring[i], a2 = ring[(i + 1) % n];
            const Point b1 = ring[j], b2 = ring[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex; reject fold-backs.
                const Point prev = (j == i + 1) ? a1 : b1;
                const Point shared = (j == i + 1) ? a2 : a1;
                const Point next = (j == i + 1) ? b2 : a2;
                if (on_segment(next, prev, shared) || on_segment(prev, shared, next)) {
                    return false;
                }
                continue;
            }
            if (segments_intersect(a1, a2, b1, b2)) {
                return false;
            }
        }
    }
    return true;
}

SpatialDomain::SpatialDomain(int nx, int ny, double cell_size, Point origin, std::vector<unsigned char> mask)
    : nx_(nx), ny_(ny), cell_size_(cell_size), origin_(origin), mask_(std::move(mask)) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw GeometryError("invalid geometry: cell_size must be positive");
    }
    if (nx <= 0 || ny <= 0 || mask_.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
        throw GeometryError("invalid geometry: mask size does not match grid");
    }
    index_.assign(mask_.size(), -1);
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const std::size_t g = static_cast<std::size_t>(j) * nx_ + i;
            if (mask_[g]) {
                index_[g] = static_cast<int>(cells_.size());
                cells_.push_back(static_cast<int>(g));
            }
        }
    }
    if (cells_.empty()) {
        throw GeometryError("empty domain");
    }
    neighbors_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const int i = cells_[c] % nx_;
        const int j = cells_[c] / nx_;
        auto& nb = neighbors_[c];
        nb[kEast] = cell_at(i + 1, j);
        nb[kWest] = cell_at(i - 1, j);
        nb[kNorth] = cell_at(i, j + 1);
        nb[kSouth] = cell_at(i, j - 1);
        const bool on_boundary = std::any_of(nb.begin(), nb.end(), [](int k) { return k < 0; });
        (on_boundary ? boundary_ : interior_).push_back(static_cast<int>(c));
    }
}

BoundingBox SpatialDomain::bounding_box() const {
    return {origin_, {origin_.x + nx_ * cell_size_, origin_.y + ny_ * cell_size_}};
}

bool SpatialDomain::masked_in(int i, int j) const { return cell_at(i, j) >= 0; }

int SpatialDomain::cell_at(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) {
        return -1;
    }
    return index_[static_cast<std::size_t>(j) * nx_ + i];
}

std::array<int, 2> SpatialDomain::grid_position(int cell) const {
    const int g = cells_.at(cell);
    return {g % nx_, g / nx_};
}

Point SpatialDomain::center(int cell) const {
    const auto [i, j] = grid_position(cell);
    return {origin_.x + (i + 0.5) * cell_size_, origin_.y + (j + 0.5) * cell_size_};
}

std::optional<int> SpatialDomain::locate(Point p) const {
    const double fi = (p.x - origin_.x) / cell_size_;
    const double fj = (p.y - origin_.y) / cell_size_;
    if (!(fi >= 0.0) || !(fj >= 0.0)) {
        return std::nullopt;
    }
    // Points on the far edge of the raster belong to the last cell.
    const int i = fi == nx_ ? nx_ - 1 : static_cast<int>(std::floor(fi));
    const int j = fj == ny_ ? ny_ - 1 : static_cast<int>(std::floor(fj));
    const int c = cell_at(i, j);
    if (c < 0) {
        return std::nullopt;
    }
    return c;
}

int SpatialDomain::nearest_cell(Point p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const Point q = center(static_cast<int>(c));
        const double d = (q.x - p.x) * (q.x - p.x) + (q.y - p.y) * (q.y - p.y);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

SpatialDomain build_domain(const std::vector<Ring>& rings, double cell_size) {
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw GeometryError("invalid geometry: cell_size must be positive");
    }
    if (rings.empty()) {
        throw GeometryError("empty domain");
    }
    BoundingBox box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
                    {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
    for (const Ring& ring : rings) {
        if (!ring_is_simple(ring)) {
            throw GeometryError("invalid geometry: polygon ring is degenerate or self-intersecting");
        }
        for (const Point& p : ring) {
            box.lower.x = std::min(box.lower.x, p.x);
            box.lower.y = std::min(box.lower.y, p.y);
            box.upper.x = std::max(box.upper.x, p.x);
            box.upper.y = std::max(box.upper.y, p.y);
        }
    }
    const int nx = cells_to_cover(box.upper.x - box.lower.x, cell_size);
    const int ny = cells_to_cover(box.upper.y - box.lower.y, cell_size);
    std::vector<unsigned char> mask(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Point c{box.lower.x + (i + 0.5) * cell_size, box.lower.y + (j + 0.5) * cell_size};
            mask[static_cast<std::size_t>(j) * nx + i] = point_in_polygons(c, rings) ? 1 : 0;
        }
    }
    return SpatialDomain(nx, ny, cell_size, box.lower, std::move(mask));
}

SpatialDomain build_domain(const AsciiMask& m) {
    if (m.nrows <= 0 || m.ncols <= 0 || static_cast<int>(m.rows.size()) != m.nrows) {
        throw GeometryError("invalid geometry: ASCII mask row count does not match header");
    }
    std::vector<unsigned char> mask(static_cast<std::size_t>(m.nrows) * m.ncols, 0);
    for (int r = 0; r < m.nrows; ++r) {
        const std::string& row = m.rows[r];
        if (static_cast<int>(row.size()) != m.ncols) {
            throw GeometryError("invalid geometry: ASCII mask row " + std::to_string(r) + " has wrong length");
        }
        const int j = m.nrows - 1 - r;
        for (int i = 0; i < m.ncols; ++i) {
            if (row[i] != '0' && row[i] != '1') {
                throw GeometryError("invalid geometry: ASCII mask accepts only 0/1");
            }
            mask[static_cast<std::size_t>(j) * m.ncols + i] = row[i] == '1';
        }
    }
    return SpatialDomain(m.ncols, m.nrows, m.cell_size, m.origin, std::move(mask));
}

AsciiMask parse_ascii_mask(std::istream& in) {
    AsciiMask m;
    bool have_rows = false, have_cols = false, have_size = false, have_origin = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '0' || line[0] == '1') {
            m.rows.push_back(line);
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "nrows") {
            have_rows = static_cast<bool>(ls >> m.nrows);
        } else if (key == "ncols") {
            have_cols = static_cast<bool>(ls >> m.ncols);
        } else if (key == "cell_size") {
            have_size = static_cast<bool>(ls >> m.cell_size);
        } else if (key == "origin") {
            have_origin = static_cast<bool>(ls >> m.origin.x >> m.origin.y);
        } else {
            throw GeometryError("invalid geometry: unknown ASCII mask header key '" + key + "'");
        }
    }
    if (!have_rows || !have_cols || !have_size || !have_origin) {
        throw GeometryError("invalid geometry: ASCII mask header needs nrows, ncols, cell_size, origin");
    }
    return m;
}

std::vector<Ring> parse_polygon_list(std::istream& in) {
    std::vector<Ring> rings;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        if (line.compare(first, 4, "ring") == 0) {
            rings.emplace_back();
            continue;
        }
        if (rings.empty()) {
            throw GeometryError("invalid geometry: vertex before first 'ring' line");
        }
        std::istringstream ls(line);
        Point p;
        if (!(ls >> p.x >> p.y)) {
            throw GeometryError("invalid geometry: cannot parse vertex '" + line + "'");
        }
        rings.back().push_back(p);
    }
    if (rings.empty()) {
        throw GeometryError("empty domain");
    }
    return rings;
}

DomainMeasures domain_measures(const SpatialDomain& domain, std::span<const double> diffusion) {
    if (diffusion.size() != domain.size()) {
        throw GeometryError("diffusion field size does not match domain");
    }
    DomainMeasures m;
    const double area = domain.cell_area();
    for (double d : diffusion) {
        if (!(d > 0.0)) {
            throw GeometryError("nonpositive diffusion");
        }
        m.mu += area / d;
    }
    m.lebesgue = area * static_cast<double>(domain.size());
    return m;
}

DomainMeasures domain_measures(const SpatialDomain& domain, double diffusion) {
    if (!(diffusion > 0.0)) {
        throw GeometryError("nonpositive diffusion");
    }
    const double lebesgue = domain.cell_area() * static_cast<double>(domain.size());
    return {lebesgue, lebesgue / diffusion};
}

Ring mediterranean_arc() {
    return {{0, 20},    {40, 0},    {60, 40},   {110, 80},  {170, 95},  {220, 85},  {270, 60},
            {330, 50},  {380, 40},  {430, 55},  {480, 80},  {520, 100}, {530, 150}, {490, 190},
            {420, 200}, {350, 190}, {280, 200}, {220, 210}, {160, 180}, {100, 160}, {50, 130},
            {10, 90}};
}

Point mediterranean_arc_introduction() { return {505.0, 130.0}; }

} // namespace vbsim
