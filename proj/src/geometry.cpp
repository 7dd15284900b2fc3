#include "perfhom/geometry.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <unordered_map>

#include "perfhom/union_find.hpp"

namespace perfhom::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a;
}

// Angular offset of `angle` from `start`, in [0, 2pi).
double angle_from(double start, double angle) { return wrap_angle(angle - start); }

template <typename Fn>
void for_each_face_neighbor(const RasterFrame& f, std::size_t idx, Fn&& fn) {
    const auto c = f.unflatten(idx);
    for (int k = 0; k < f.dim; ++k) {
        for (int s : {-1, 1}) {
            auto n = c;
            n[k] += s;
            if (n[k] < 0 || n[k] >= f.shape[k]) continue;
            fn(f.index(n[0], n[1], n[2]));
        }
    }
}

bool on_frame_boundary(const RasterFrame& f, std::size_t idx) {
    const auto c = f.unflatten(idx);
    for (int k = 0; k < f.dim; ++k)
        if (c[k] == 0 || c[k] == f.shape[k] - 1) return true;
    return false;
}

}  // namespace

ClusterSet clusters(const PointCloud& cloud, const GeometryParams& params) {
    params.validate();
    const auto& pts = cloud.points();
    const std::size_t m = pts.size();
    ClusterSet out;
    out.cluster_of.assign(m, 0);
    if (m == 0) return out;

    const double link = 2.0 * params.r;
    const double link2 = link * link;
    NeighborGrid grid(pts, cloud.dim(), link);
    UnionFind uf(m);
    for (std::size_t i = 0; i < m; ++i) {
        grid.for_each_within(pts[i], link, [&](std::size_t j, double d2) {
            if (j > i && d2 < link2) uf.merge(i, j);
        });
    }
    std::unordered_map<std::size_t, std::size_t> id_of_root;
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t root = uf.find(i);
        auto [it, inserted] = id_of_root.try_emplace(root, out.clusters.size());
        if (inserted) out.clusters.emplace_back();
        out.clusters[it->second].push_back(i);
        out.cluster_of[i] = it->second;
    }
    return out;
}

bool covered(const Point& point, const PointCloud& cloud, const GeometryParams& params) {
    params.validate();
    const double r2 = params.r * params.r;
    for (const auto& c : cloud.points())
        if (dist2(point, c, cloud.dim()) <= r2) return true;
    return false;
}

CoverageIndex::CoverageIndex(const PointCloud& cloud, const GeometryParams& params)
    : cloud_(&cloud), r_(params.r), grid_(cloud.points(), cloud.dim(), params.r) {
    params.validate();
}

bool CoverageIndex::covered(const Point& p) const {
    bool hit = false;
    grid_.for_each_within(p, r_, [&](std::size_t, double) { hit = true; });
    return hit;
}

double CoverageIndex::nearest_dist2(const Point& p, double radius) const {
    double best = std::numeric_limits<double>::infinity();
    grid_.for_each_within(p, radius, [&](std::size_t, double d2) { best = std::min(best, d2); });
    return best;
}

std::array<long, 3> RasterFrame::unflatten(std::size_t idx) const {
    const long i = static_cast<long>(idx % static_cast<std::size_t>(shape[0]));
    const std::size_t rest = idx / static_cast<std::size_t>(shape[0]);
    const long j = static_cast<long>(rest % static_cast<std::size_t>(shape[1]));
    const long k = static_cast<long>(rest / static_cast<std::size_t>(shape[1]));
    return {i, j, k};
}

Point RasterFrame::center(std::size_t idx) const {
    const auto c = unflatten(idx);
    Point p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) p[k] = origin[k] + (static_cast<double>(c[k]) + 0.5) * h;
    return p;
}

std::optional<std::size_t> RasterFrame::locate(const Point& p) const {
    std::array<long, 3> c{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
        const double x = std::floor((p[k] - origin[k]) / h);
        if (!(x >= 0.0) || x >= static_cast<double>(shape[k])) return std::nullopt;
        c[k] = static_cast<long>(x);
    }
    return index(c[0], c[1], c[2]);
}

CellState FilledRaster::state_at(const Point& p) const {
    const auto idx = frame_.locate(p);
    return idx ? cells_[*idx] : CellState::VacantUnbounded;
}

std::size_t FilledRaster::count(CellState s) const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

bool FilledRaster::verify_unbounded_reachability() const {
    // Label vacant components with a union-find pass, independent of the
    // flood fill used at construction.
    const std::size_t total = cells_.size();
    UnionFind uf(total + 1);
    const std::size_t outside = total;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (cells_[idx] == CellState::Covered) continue;
        if (on_frame_boundary(frame_, idx)) uf.merge(idx, outside);
        for_each_face_neighbor(frame_, idx, [&](std::size_t n) {
            if (n > idx && cells_[n] != CellState::Covered) uf.merge(idx, n);
        });
    }
    const std::size_t root = uf.find(outside);
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (cells_[idx] == CellState::Covered) continue;
        const bool reaches = uf.find(idx) == root;
        if (reaches != (cells_[idx] == CellState::VacantUnbounded)) return false;
    }
    return true;
}

FilledRaster fill_region(const PointCloud& cloud, const GeometryParams& params, double resolution,
                         const Box& region, std::optional<Point> anchor) {
    params.validate();
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ParameterError("raster resolution must be > 0");
    const int dim = cloud.dim();
    const double r = params.r;
    const double h = resolution;

    // Any cluster enclosing a region point lies within its own extent of it.
    double extent = 0.0;
    const ClusterSet cs = clusters(cloud, params);
    for (const auto& cl : cs.clusters) {
        Point lo = cloud[cl.front()], hi = lo;
        for (std::size_t i : cl)
            for (int k = 0; k < dim; ++k) {
                lo[k] = std::min(lo[k], cloud[i][k]);
                hi[k] = std::max(hi[k], cloud[i][k]);
            }
        extent = std::max(extent, std::sqrt(dist2(lo, hi, dim)) + 2.0 * r);
    }
    const Box padded = region.inflated(r + extent, dim);

    RasterFrame f;
    f.dim = dim;
    f.h = h;
    double cells = 1.0;
    for (int k = 0; k < dim; ++k) {
        const double base = anchor ? (*anchor)[k] : padded.lo[k];
        f.origin[k] = base + (std::floor((padded.lo[k] - base) / h) - 2.0) * h;
        f.shape[k] = static_cast<long>(std::ceil((padded.hi[k] - f.origin[k]) / h)) + 2;
        cells *= static_cast<double>(f.shape[k]);
    }
    if (cells > 4.0e8) throw ParameterError("raster too large; increase the resolution length");

    std::vector<CellState> state(f.cell_count(), CellState::VacantIsland);
    const Box reach = padded.inflated(r + 2.0 * h, dim);
    const double r2 = r * r;
    for (const auto& p : cloud.points()) {
        if (!reach.contains(p, dim)) continue;
        std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int k = 0; k < dim; ++k) {
            lo[k] = std::max(0L, static_cast<long>(std::ceil((p[k] - r - f.origin[k]) / h - 0.5)));
            hi[k] = std::min(f.shape[k] - 1, static_cast<long>(std::floor((p[k] + r - f.origin[k]) / h - 0.5)));
        }
        for (long z = lo[2]; z <= hi[2]; ++z)
            for (long y = lo[1]; y <= hi[1]; ++y)
                for (long x = lo[0]; x <= hi[0]; ++x) {
                    const std::size_t idx = f.index(x, y, z);
                    if (state[idx] == CellState::Covered) continue;
                    if (dist2(f.center(idx), p, dim) <= r2) state[idx] = CellState::Covered;
                }
    }

    std::deque<std::size_t> queue;
    for (std::size_t idx = 0; idx < state.size(); ++idx) {
        if (state[idx] == CellState::VacantIsland && on_frame_boundary(f, idx)) {
            state[idx] = CellState::VacantUnbounded;
            queue.push_back(idx);
        }
    }
    while (!queue.empty()) {
        const std::size_t idx = queue.front();
        queue.pop_front();
        for_each_face_neighbor(f, idx, [&](std::size_t n) {
            if (state[n] == CellState::VacantIsland) {
                state[n] = CellState::VacantUnbounded;
                queue.push_back(n);
            }
        });
    }
    return FilledRaster(f, std::move(state));
}

FilledRaster fill(const PointCloud& cloud, const GeometryParams& params, double resolution,
                  std::optional<Point> anchor) {
    return fill_region(cloud, params, resolution, cloud.window(), anchor);
}

Point Arc::point_at(const std::vector<Point>& centers, double r, double t) const {
    const Point& c = centers[circle];
    return {c[0] + r * std::cos(start + t), c[1] + r * std::sin(start + t), 0.0};
}

DiskUnionBoundary disk_union_boundary(const std::vector<Point>& centers, double r) {
    DiskUnionBoundary out;
    const std::size_t m = centers.size();
    const double two_r = 2.0 * r;

    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::pair<double, double>> covered;
        for (std::size_t k = 0; k < m; ++k) {
            if (k == i) continue;
            const double d = dist(centers[i], centers[k], 2);
            if (d > two_r) continue;
            const double phi = std::atan2(centers[k][1] - centers[i][1], centers[k][0] - centers[i][0]);
            const double w = std::acos(std::min(1.0, d / two_r));
            const double a = wrap_angle(phi - w);
            const double b = a + 2.0 * w;
            if (b > kTwoPi) {
                covered.emplace_back(a, kTwoPi);
                covered.emplace_back(0.0, b - kTwoPi);
            } else {
                covered.emplace_back(a, b);
            }
        }
        if (covered.empty()) {
            out.arcs.push_back({i, 0.0, kTwoPi});
            continue;
        }
        std::sort(covered.begin(), covered.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : covered) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        std::vector<std::pair<double, double>> gaps;
        double cursor = 0.0;
        for (const auto& iv : merged) {
            if (iv.first > cursor) gaps.emplace_back(cursor, iv.first);
            cursor = std::max(cursor, iv.second);
        }
        if (cursor < kTwoPi) gaps.emplace_back(cursor, kTwoPi);
        // Join the gap that wraps through angle zero.
        if (gaps.size() >= 2 && gaps.front().first == 0.0 && gaps.back().second == kTwoPi) {
            gaps.back().second = kTwoPi + gaps.front().second;
            gaps.erase(gaps.begin());
        }
        for (const auto& g : gaps) {
            const double len = g.second - g.first;
            if (len > 0.0) out.arcs.push_back({i, wrap_angle(g.first), len});
        }
    }

    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d = dist(centers[i], centers[j], 2);
            if (d > two_r || d == 0.0) continue;
            const double a = std::sqrt(std::max(0.0, r * r - 0.25 * d * d));
            const Point mid{0.5 * (centers[i][0] + centers[j][0]), 0.5 * (centers[i][1] + centers[j][1]), 0.0};
            const double ux = (centers[j][0] - centers[i][0]) / d;
            const double uy = (centers[j][1] - centers[i][1]) / d;
            std::vector<Point> candidates{{mid[0] - a * uy, mid[1] + a * ux, 0.0}};
            if (a > 0.0) candidates.push_back({mid[0] + a * uy, mid[1] - a * ux, 0.0});
            for (const auto& p : candidates) {
                bool inside = false;
                for (std::size_t k = 0; k < m && !inside; ++k)
                    if (k != i && k != j && dist2(p, centers[k], 2) < r * r) inside = true;
                if (!inside) out.corners.push_back({p, i, j});
            }
        }
    return out;
}

double distance_to_arc(const Point& p, const Arc& arc, const std::vector<Point>& centers, double r) {
    const Point& c = centers[arc.circle];
    const double dx = p[0] - c[0], dy = p[1] - c[1];
    const double rho = std::hypot(dx, dy);
    if (rho > 0.0 && angle_from(arc.start, std::atan2(dy, dx)) <= arc.length) return std::abs(rho - r);
    if (rho == 0.0) return r;
    return std::min(dist(p, arc.point_at(centers, r, 0.0), 2), dist(p, arc.point_at(centers, r, arc.length), 2));
}

double distance_between_arcs(const Arc& a, const Arc& b, const std::vector<Point>& centers, double r) {
    double best = std::numeric_limits<double>::infinity();
    for (double t : {0.0, a.length}) best = std::min(best, distance_to_arc(a.point_at(centers, r, t), b, centers, r));
    for (double t : {0.0, b.length}) best = std::min(best, distance_to_arc(b.point_at(centers, r, t), a, centers, r));
    if (a.circle != b.circle) {
        // Interior critical points of the distance lie on the line of centres.
        const Point& ca = centers[a.circle];
        const Point& cb = centers[b.circle];
        const double phi = std::atan2(cb[1] - ca[1], cb[0] - ca[0]);
        for (double ta : {phi, phi + std::numbers::pi})
            for (double tb : {phi, phi + std::numbers::pi}) {
                const double oa = angle_from(a.start, ta);
                const double ob = angle_from(b.start, tb);
                if (oa > a.length || ob > b.length) continue;
                best = std::min(best, dist(a.point_at(centers, r, oa), b.point_at(centers, r, ob), 2));
            }
    }
    return best;
}

DeltaEstimate delta_hat(const std::vector<Point>& cluster_points, int dim, const GeometryParams& params) {
    params.validate();
    if (dim != 2) throw UnsupportedDimension("delta_hat is only defined for planar clusters");
    if (cluster_points.empty()) throw ParameterError("delta_hat needs a nonempty cluster");
    const double r = params.r;
    const double cap = r / std::sqrt(2.0);
    const DiskUnionBoundary b = disk_union_boundary(cluster_points, r);

    DeltaEstimate est;
    est.corner_count = b.corners.size();
    if (b.corners.empty()) {
        est.value = cap;
        return est;
    }

    const double tol = 1e-9 * r;
    auto endpoint_near = [&](const Arc& arc, const Point& p) {
        return dist(arc.point_at(cluster_points, r, 0.0), p, 2) <= tol ||
               dist(arc.point_at(cluster_points, r, arc.length), p, 2) <= tol;
    };

    double best = cap;
    for (std::size_t c = 0; c < b.corners.size(); ++c) {
        const Corner& corner = b.corners[c];
        const Point& p = corner.p;
        double feature = std::numeric_limits<double>::infinity();
        for (std::size_t o = 0; o < b.corners.size(); ++o)
            if (o != c) feature = std::min(feature, dist(p, b.corners[o].p, 2));
        for (const Arc& arc : b.arcs)
            if (!endpoint_near(arc, p)) feature = std::min(feature, distance_to_arc(p, arc, cluster_points, r));

        const Point& ci = cluster_points[corner.i];
        const Point& cj = cluster_points[corner.j];
        const double cos_alpha =
            ((p[0] - ci[0]) * (p[0] - cj[0]) + (p[1] - ci[1]) * (p[1] - cj[1])) / (r * r);
        const double half_chord = r * std::sqrt(std::clamp(0.5 * (1.0 + cos_alpha), 0.0, 1.0));
        best = std::min({best, feature, half_chord});
    }

    // Narrow vacant gaps between arcs that do not meet at a corner.
    for (std::size_t a = 0; a < b.arcs.size(); ++a)
        for (std::size_t c = a + 1; c < b.arcs.size(); ++c) {
            const Arc& x = b.arcs[a];
            const Arc& y = b.arcs[c];
            const bool share = endpoint_near(y, x.point_at(cluster_points, r, 0.0)) ||
                               endpoint_near(y, x.point_at(cluster_points, r, x.length));
            if (!share) best = std::min(best, distance_between_arcs(x, y, cluster_points, r));
        }

    est.value = 0.5 * best;
    return est;
}

SmoothnessCertificate certificate(int n, const GeometryParams& params) {
    params.validate();
    if (n < 1) throw ParameterError("thinning level n must be >= 1");
    const double nd = static_cast<double>(n);
    return {1.0 / nd, std::sqrt(2.0 * nd * params.r), 2.0 * nd * params.r};
}

}  // namespace perfhom::geometry
