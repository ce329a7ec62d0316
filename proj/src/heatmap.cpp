#include "vbsim/heatmap.hpp"

#include "vbsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <numeric>
#include <set>
#include <unordered_map>
#include <utility>

namespace vbsim {

namespace {

double orient(Point a, Point b, Point c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

// Positive when d lies inside the circumcircle of the counter-clockwise triangle abc.
bool in_circumcircle(Point a, Point b, Point c, Point d) {
    const long double adx = a.x - d.x, ady = a.y - d.y;
    const long double bdx = b.x - d.x, bdy = b.y - d.y;
    const long double cdx = c.x - d.x, cdy = c.y - d.y;
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    const long double t1 = adx * (bdy * cd - bd * cdy);
    const long double t2 = ady * (bdx * cd - bd * cdx);
    const long double t3 = ad * (bdx * cdy - bdy * cdx);
    const long double det = t1 - t2 + t3;
    const long double scale = std::fabs(t1) + std::fabs(t2) + std::fabs(t3);
    return det > 1e-12L * scale;
}

struct Barycentric {
    double l0, l1, l2;
};

Barycentric barycentric(Point a, Point b, Point c, Point p) {
    const double area = orient(a, b, c);
    return {orient(p, b, c) / area, orient(a, p, c) / area, orient(a, b, p) / area};
}

constexpr double kInsideSlack = 1e-12;

bool contains(const Barycentric& l) {
    return l.l0 >= -kInsideSlack && l.l1 >= -kInsideSlack && l.l2 >= -kInsideSlack;
}

std::uint64_t edge_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

// Sweep-hull triangulation of the convex hull (points sorted by x, each new
// point joined to the hull edges it sees), then Lawson flips until every
// interior edge is locally Delaunay. Triangles are counter-clockwise.
std::vector<std::array<int, 3>> delaunay(const std::vector<Point>& q) {
    const int n = static_cast<int>(q.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return q[a].x < q[b].x || (q[a].x == q[b].x && q[a].y < q[b].y);
    });

    std::vector<std::array<int, 3>> tris;
    // Leading collinear run, then the first point off its line.
    int k = 2;
    while (k < n && orient(q[order[0]], q[order[1]], q[order[k]]) == 0.0) ++k;
    if (k == n) return tris;
    const int apex = order[k];
    const bool apex_left = orient(q[order[0]], q[order[1]], q[apex]) > 0.0;
    // Hull as a counter-clockwise cycle.
    std::vector<int> hull;
    if (apex_left) {
        for (int i = 0; i < k; ++i) hull.push_back(order[i]);
        hull.push_back(apex);
    } else {
        hull.push_back(apex);
        for (int i = k - 1; i >= 0; --i) hull.push_back(order[i]);
    }
    for (int i = 0; i + 1 < k; ++i) {
        const int a = order[i], b = order[i + 1];
        tris.push_back(apex_left ? std::array<int, 3>{a, b, apex} : std::array<int, 3>{b, a, apex});
    }
    for (int s = k + 1; s < n; ++s) {
        const int p = order[s];
        const std::size_t h = hull.size();
        std::vector<char> visible(h, 0);
        for (std::size_t e = 0; e < h; ++e) {
            visible[e] = orient(q[hull[e]], q[hull[(e + 1) % h]], q[p]) < 0.0 ? 1 : 0;
        }
        // The visible edges form one contiguous run; find its first edge.
        std::size_t first = 0;
        while (!(visible[first] && !visible[(first + h - 1) % h])) ++first;
        std::size_t count = 0;
        while (visible[(first + count) % h]) {
            const std::size_t e = (first + count) % h;
            tris.push_back({hull[(e + 1) % h], hull[e], p});
            ++count;
        }
        // Replace the hull vertices strictly inside the visible run with p.
        std::vector<int> next;
        next.reserve(h + 1);
        for (std::size_t i = 0; i <= h - count; ++i) next.push_back(hull[(first + count + i) % h]);
        next.push_back(p);
        hull = std::move(next);
    }

    std::unordered_map<std::uint64_t, std::size_t> owner;  // directed edge -> triangle
    for (std::size_t t = 0; t < tris.size(); ++t) {
        for (int e = 0; e < 3; ++e) owner[edge_key(tris[t][e], tris[t][(e + 1) % 3])] = t;
    }
    std::vector<std::pair<int, int>> stack;
    for (const auto& t : tris) {
        for (int e = 0; e < 3; ++e) stack.emplace_back(t[e], t[(e + 1) % 3]);
    }
    const std::size_t limit = 100 * tris.size() * tris.size() + 1000;
    for (std::size_t flips = 0; !stack.empty() && flips < limit;) {
        const auto [a, b] = stack.back();
        stack.pop_back();
        const auto i1 = owner.find(edge_key(a, b));
        const auto i2 = owner.find(edge_key(b, a));
        if (i1 == owner.end() || i2 == owner.end()) continue;
        const std::size_t t1 = i1->second, t2 = i2->second;
        auto third = [&](std::size_t t) {
            for (int v : tris[t]) {
                if (v != a && v != b) return v;
            }
            return -1;
        };
        const int c = third(t1), d = third(t2);
        if (!in_circumcircle(q[a], q[b], q[c], q[d])) continue;
        if (!(orient(q[a], q[d], q[c]) > 0.0 && orient(q[b], q[c], q[d]) > 0.0)) continue;
        for (std::size_t t : {t1, t2}) {
            for (int e = 0; e < 3; ++e) owner.erase(edge_key(tris[t][e], tris[t][(e + 1) % 3]));
        }
        tris[t1] = {a, d, c};
        tris[t2] = {b, c, d};
        for (std::size_t t : {t1, t2}) {
            for (int e = 0; e < 3; ++e) owner[edge_key(tris[t][e], tris[t][(e + 1) % 3])] = t;
        }
        stack.insert(stack.end(), {{a, d}, {d, b}, {b, c}, {c, a}});
        ++flips;
    }
    return tris;
}

} // namespace

LinearInterpolant::LinearInterpolant(std::span<const Point> points, std::span<const double> values) {
    if (points.size() != values.size()) {
        throw GeometryError("degenerate interpolation input: point and value counts differ");
    }
    // Exact duplicates keep their first value.
    std::set<std::pair<double, double>> seen;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (seen.insert({points[i].x, points[i].y}).second) {
            points_.push_back(points[i]);
            values_.push_back(values[i]);
        }
    }
    const std::size_t n = points_.size();
    if (n < 3) {
        throw GeometryError("degenerate interpolation input");
    }

    // Work in coordinates normalized to the unit box.
    double x0 = points_[0].x, x1 = x0, y0 = points_[0].y, y1 = y0;
    for (const Point& p : points_) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double extent = std::max(x1 - x0, y1 - y0);
    std::vector<Point> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = {(points_[i].x - x0) / extent, (points_[i].y - y0) / extent};

    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::hypot(q[i].x - q[0].x, q[i].y - q[0].y) > std::hypot(q[far].x - q[0].x, q[far].y - q[0].y)) far = i;
    }
    const double base = std::hypot(q[far].x - q[0].x, q[far].y - q[0].y);
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) spread = std::max(spread, std::abs(orient(q[0], q[far], q[i])) / base);
    if (!(spread > 1e-10)) {
        throw GeometryError("degenerate interpolation input: points are collinear");
    }

    triangles_ = delaunay(q);
    if (triangles_.empty()) {
        throw GeometryError("degenerate interpolation input");
    }
}

std::optional<std::array<int, 3>> LinearInterpolant::containing_triangle(Point p) const {
    for (const auto& tr : triangles_) {
        if (contains(barycentric(points_[tr[0]], points_[tr[1]], points_[tr[2]], p))) return tr;
    }
    return std::nullopt;
}

std::optional<double> LinearInterpolant::at(Point p) const {
    for (const auto& tr : triangles_) {
        const Barycentric l = barycentric(points_[tr[0]], points_[tr[1]], points_[tr[2]], p);
        if (contains(l)) {
            return l.l0 * values_[tr[0]] + l.l1 * values_[tr[1]] + l.l2 * values_[tr[2]];
        }
    }
    return std::nullopt;
}

int LinearInterpolant::nearest(Point p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double d = std::hypot(points_[i].x - p.x, points_[i].y - p.y);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

HeatmapGrid interpolate_heatmap(const SpatialDomain& domain, std::span<const Point> points,
                                std::span<const double> values, int nx, int ny) {
    if (nx < 1 || ny < 1) {
        throw GeometryError("heatmap grid needs positive resolution");
    }
    const LinearInterpolant interp(points, values);
    const BoundingBox box = domain.bounding_box();
    HeatmapGrid grid;
    grid.nx = nx;
    grid.ny = ny;
    const double dx = (box.upper.x - box.lower.x) / nx;
    const double dy = (box.upper.y - box.lower.y) / ny;
    for (int i = 0; i < nx; ++i) grid.x.push_back(box.lower.x + (i + 0.5) * dx);
    for (int j = 0; j < ny; ++j) grid.y.push_back(box.lower.y + (j + 0.5) * dy);
    grid.values.assign(static_cast<std::size_t>(nx) * ny, std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Point p{grid.x[i], grid.y[j]};
            if (!domain.locate(p)) continue;
            const auto v = interp.at(p);
            grid.values[static_cast<std::size_t>(j) * nx + i] = v ? *v : interp.values()[interp.nearest(p)];
        }
    }
    return grid;
}

} // namespace vbsim
