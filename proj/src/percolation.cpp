#include "perfhom/percolation.hpp"

#include <deque>
#include <numeric>

namespace perfhom::percolation {

namespace {

// Residual graph with unit-ish integer capacities.
class FlowNetwork {
  public:
    struct Edge {
        int to;
        int cap;
        int flow;
    };

    explicit FlowNetwork(int nodes) : adj_(static_cast<std::size_t>(nodes)) {}

    void add_edge(int from, int to, int cap) {
        adj_[from].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({to, cap, 0});
        adj_[to].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({from, 0, 0});
    }

    int max_flow(int s, int t, Augmentation strategy) {
        int total = 0;
        for (;;) {
            const bool found = strategy == Augmentation::ShortestPath ? augment_bfs(s, t) : augment_dfs(s, t);
            if (!found) break;
            ++total;
        }
        return total;
    }

    const std::vector<int>& out_edges(int u) const { return adj_[u]; }
    const Edge& edge(int e) const { return edges_[e]; }
    Edge& edge(int e) { return edges_[e]; }

  private:
    int residual(int e) const { return edges_[e].cap - edges_[e].flow; }

    void push(int e) {
        edges_[e].flow += 1;
        edges_[e ^ 1].flow -= 1;
    }

    bool augment_bfs(int s, int t) {
        std::vector<int> via(adj_.size(), -1);
        std::vector<bool> seen(adj_.size(), false);
        std::deque<int> queue{s};
        seen[s] = true;
        while (!queue.empty() && !seen[t]) {
            const int u = queue.front();
            queue.pop_front();
            for (int e : adj_[u]) {
                const int v = edges_[e].to;
                if (seen[v] || residual(e) <= 0) continue;
                seen[v] = true;
                via[v] = e;
                queue.push_back(v);
            }
        }
        if (!seen[t]) return false;
        for (int v = t; v != s; v = edges_[via[v] ^ 1].to) push(via[v]);
        return true;
    }

    bool augment_dfs(int s, int t) {
        std::vector<int> via(adj_.size(), -1);
        std::vector<bool> seen(adj_.size(), false);
        std::vector<int> stack{s};
        seen[s] = true;
        while (!stack.empty() && !seen[t]) {
            const int u = stack.back();
            stack.pop_back();
            // Reverse order so the stack explores like a recursive DFS.
            for (auto it = adj_[u].rbegin(); it != adj_[u].rend(); ++it) {
                const int e = *it;
                const int v = edges_[e].to;
                if (seen[v] || residual(e) <= 0) continue;
                seen[v] = true;
                via[v] = e;
                stack.push_back(v);
            }
        }
        if (!seen[t]) return false;
        for (int v = t; v != s; v = edges_[via[v] ^ 1].to) push(via[v]);
        return true;
    }

    std::vector<std::vector<int>> adj_;
    std::vector<Edge> edges_;
};

// Vertex v splits into in-node 2v and out-node 2v + 1.
struct SplitGraph {
    FlowNetwork net;
    int source;
    int sink;
};

template <typename Fn>
void for_each_l1_neighbor(const LatticeField& f, std::size_t v, Fn&& fn) {
    auto z = f.coords(v);
    for (int k = 0; k < f.dim(); ++k)
        for (int s : {-1, 1}) {
            auto w = z;
            w[k] += s;
            if (w[k] < 0 || w[k] >= f.n()) continue;
            fn(f.index(w[0], w[1], w[2]));
        }
}

template <typename Fn>
void for_each_linf_neighbor(const LatticeField& f, std::size_t v, Fn&& fn) {
    const auto z = f.coords(v);
    const int dz = f.dim() == 3 ? 1 : 0;
    for (int c = -dz; c <= dz; ++c)
        for (int b = -1; b <= 1; ++b)
            for (int a = -1; a <= 1; ++a) {
                if (a == 0 && b == 0 && c == 0) continue;
                const int x = z[0] + a, y = z[1] + b, w = z[2] + c;
                if (x < 0 || y < 0 || w < 0 || x >= f.n() || y >= f.n() || (f.dim() == 3 && w >= f.n())) continue;
                fn(f.index(x, y, w));
            }
}

SplitGraph build_split_graph(const LatticeField& field) {
    const int vertices = static_cast<int>(field.size());
    SplitGraph g{FlowNetwork(2 * vertices + 2), 2 * vertices, 2 * vertices + 1};
    for (std::size_t v = 0; v < field.size(); ++v) {
        if (!field.is_open(v)) continue;
        const int in = 2 * static_cast<int>(v);
        g.net.add_edge(in, in + 1, 1);
        const auto z = field.coords(v);
        if (z[0] == 0) g.net.add_edge(g.source, in, 1);
        if (z[0] == field.n() - 1) g.net.add_edge(in + 1, g.sink, 1);
        for_each_l1_neighbor(field, v, [&](std::size_t w) {
            if (field.is_open(w)) g.net.add_edge(in + 1, 2 * static_cast<int>(w), 1);
        });
    }
    return g;
}

void require_2d(const LatticeField& field) {
    if (field.dim() != 2) throw UnsupportedDimension("vertical crossings are only defined on planar lattices");
}

// 0-1 BFS: entering an open vertex costs 1, a blocked one 0.
std::pair<int, std::vector<std::size_t>> crossing_search(const LatticeField& field) {
    require_2d(field);
    const int n = field.n();
    if (n == 0) return {0, {}};
    const int inf = std::numeric_limits<int>::max();
    std::vector<int> cost(field.size(), inf);
    std::vector<std::size_t> parent(field.size(), field.size());
    std::deque<std::size_t> queue;
    for (int x = 0; x < n; ++x) {
        const std::size_t v = field.index(x, 0);
        cost[v] = field.is_open(v) ? 1 : 0;
        if (cost[v] == 0) queue.push_front(v);
        else queue.push_back(v);
    }
    std::vector<bool> done(field.size(), false);
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        if (done[v]) continue;
        done[v] = true;
        for_each_linf_neighbor(field, v, [&](std::size_t w) {
            const int step = field.is_open(w) ? 1 : 0;
            if (cost[v] + step < cost[w]) {
                cost[w] = cost[v] + step;
                parent[w] = v;
                if (step == 0) queue.push_front(w);
                else queue.push_back(w);
            }
        });
    }
    std::size_t best = field.index(0, n - 1);
    for (int x = 0; x < n; ++x)
        if (cost[field.index(x, n - 1)] < cost[best]) best = field.index(x, n - 1);
    std::vector<std::size_t> path;
    for (std::size_t v = best; v != field.size(); v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return {cost[best], path};
}

}  // namespace

void LatticeParams::validate() const {
    if (k_scale < 1) throw ParameterError("k_scale must be >= 1");
    if (n < 1) throw ParameterError("lattice side n must be >= 1");
}

int LatticeParams::default_k_scale(double r_c, double r, int dim) {
    if (!(r_c > r)) throw ParameterError("default k_scale needs r < r_c");
    return static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(dim)) / (r_c - r))) + 1;
}

LatticeField::LatticeField(int dim, int n, std::vector<std::uint8_t> open, Point origin, int k_scale)
    : dim_(dim), n_(n), k_scale_(k_scale), origin_(origin), open_(std::move(open)) {
    if (dim_ != 2 && dim_ != 3) throw UnsupportedDimension("lattice dimension must be 2 or 3");
    if (n_ < 1 || k_scale_ < 1) throw ParameterError("lattice needs n >= 1 and k_scale >= 1");
    std::size_t expected = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    if (dim_ == 3) expected *= static_cast<std::size_t>(n_);
    if (open_.size() != expected) throw ParameterError("lattice field has the wrong number of vertices");
}

std::array<int, 3> LatticeField::coords(std::size_t v) const {
    const int i = static_cast<int>(v);
    return {i % n_, (i / n_) % n_, i / (n_ * n_)};
}

Box LatticeField::cube(std::size_t v) const {
    const auto z = coords(v);
    const double s = 1.0 / static_cast<double>(k_scale_);
    Box b;
    for (int k = 0; k < dim_; ++k) {
        b.lo[k] = origin_[k] + z[k] * s;
        b.hi[k] = origin_[k] + (z[k] + 1) * s;
    }
    return b;
}

Box LatticeField::box() const {
    Box b;
    const double side = static_cast<double>(n_) / static_cast<double>(k_scale_);
    for (int k = 0; k < dim_; ++k) {
        b.lo[k] = origin_[k];
        b.hi[k] = origin_[k] + side;
    }
    return b;
}

LatticeField build_field(const PointCloud& cloud, const GeometryParams& geometry, const LatticeParams& lattice) {
    geometry.validate();
    lattice.validate();
    const int dim = cloud.dim();
    const double r = geometry.r;
    Point origin = lattice.origin.value_or(cloud.window().lo);
    if (!lattice.origin)
        for (int k = 0; k < dim; ++k) origin[k] += r;
    for (int k = dim; k < 3; ++k) origin[k] = 0.0;

    std::size_t total = static_cast<std::size_t>(lattice.n) * static_cast<std::size_t>(lattice.n);
    if (dim == 3) total *= static_cast<std::size_t>(lattice.n);
    LatticeField field(dim, lattice.n, std::vector<std::uint8_t>(total, 1), origin, lattice.k_scale);

    const Box box = field.box();
    const Box need = box.inflated(r, dim);
    const Box& w = cloud.window();
    for (int k = 0; k < dim; ++k)
        if (w.lo[k] > need.lo[k] + 1e-12 || w.hi[k] < need.hi[k] - 1e-12)
            throw CoverageError("cloud window does not cover the lattice box padded by r");

    const double k_scale = static_cast<double>(lattice.k_scale);
    const double r2 = r * r;
    for (const auto& p : cloud.points()) {
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        bool empty = false;
        for (int k = 0; k < dim; ++k) {
            lo[k] = std::max(0, static_cast<int>(std::floor((p[k] - r - origin[k]) * k_scale)) - 1);
            hi[k] = std::min(lattice.n - 1, static_cast<int>(std::floor((p[k] + r - origin[k]) * k_scale)) + 1);
            if (lo[k] > hi[k]) empty = true;
        }
        if (empty) continue;
        for (int c = lo[2]; c <= hi[2]; ++c)
            for (int b = lo[1]; b <= hi[1]; ++b)
                for (int a = lo[0]; a <= hi[0]; ++a) {
                    const std::size_t v = field.index(a, b, c);
                    if (field.is_open(v) && field.cube(v).dist2_to(p, dim) <= r2) field.set_open(v, false);
                }
    }
    return field;
}

int count_channels(const LatticeField& field, Augmentation strategy) {
    SplitGraph g = build_split_graph(field);
    return g.net.max_flow(g.source, g.sink, strategy);
}

std::vector<std::vector<std::size_t>> channel_witnesses(const LatticeField& field) {
    SplitGraph g = build_split_graph(field);
    const int flow = g.net.max_flow(g.source, g.sink, Augmentation::ShortestPath);
    std::vector<std::vector<std::size_t>> channels;
    channels.reserve(static_cast<std::size_t>(flow));
    for (int e0 : g.net.out_edges(g.source)) {
        if (g.net.edge(e0).cap == 0 || g.net.edge(e0).flow <= 0) continue;
        std::vector<std::size_t> path;
        int u = g.net.edge(e0).to;
        while (u != g.sink) {
            if (u % 2 == 0) path.push_back(static_cast<std::size_t>(u / 2));
            int next = -1;
            for (int e : g.net.out_edges(u)) {
                auto& edge = g.net.edge(e);
                if (edge.cap > 0 && edge.flow > 0) {
                    edge.flow -= 1;  // consume so each unit is walked once
                    next = edge.to;
                    break;
                }
            }
            if (next < 0) throw SolverError("flow decomposition failed");
            u = next;
        }
        channels.push_back(std::move(path));
    }
    return channels;
}

int min_open_crossing(const LatticeField& field) { return crossing_search(field).first; }

std::vector<std::size_t> min_crossing_path(const LatticeField& field) { return crossing_search(field).second; }

ChannelReport analyze(const LatticeField& field) {
    ChannelReport rep;
    rep.channels = channel_witnesses(field);
    rep.N = static_cast<int>(rep.channels.size());
    if (field.dim() == 2) {
        auto [cost, path] = crossing_search(field);
        rep.L = cost;
        rep.crossing = std::move(path);
    }
    return rep;
}

bool verify_channels(const LatticeField& field, const std::vector<std::vector<std::size_t>>& channels) {
    std::vector<bool> used(field.size(), false);
    for (const auto& ch : channels) {
        if (ch.empty()) return false;
        if (field.coords(ch.front())[0] != 0 || field.coords(ch.back())[0] != field.n() - 1) return false;
        for (std::size_t i = 0; i < ch.size(); ++i) {
            const std::size_t v = ch[i];
            if (v >= field.size() || !field.is_open(v) || used[v]) return false;
            used[v] = true;
            if (i > 0) {
                const auto a = field.coords(ch[i - 1]);
                const auto b = field.coords(v);
                int l1 = 0;
                for (int k = 0; k < 3; ++k) l1 += std::abs(a[k] - b[k]);
                if (l1 != 1) return false;
            }
        }
    }
    return true;
}

bool verify_crossing(const LatticeField& field, const std::vector<std::size_t>& crossing, int expected_open) {
    if (field.dim() != 2 || crossing.empty()) return false;
    if (field.coords(crossing.front())[1] != 0 || field.coords(crossing.back())[1] != field.n() - 1) return false;
    int open = 0;
    for (std::size_t i = 0; i < crossing.size(); ++i) {
        if (crossing[i] >= field.size()) return false;
        if (field.is_open(crossing[i])) ++open;
        if (i > 0) {
            const auto a = field.coords(crossing[i - 1]);
            const auto b = field.coords(crossing[i]);
            if (std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])) != 1) return false;
        }
    }
    return open == expected_open;
}

std::vector<std::size_t> blocked_cluster(const LatticeField& field, std::size_t start) {
    std::vector<std::size_t> out;
    if (field.is_open(start)) return out;
    std::vector<bool> seen(field.size(), false);
    seen[start] = true;
    out.push_back(start);
    for (std::size_t head = 0; head < out.size(); ++head) {
        for_each_linf_neighbor(field, out[head], [&](std::size_t w) {
            if (!seen[w] && !field.is_open(w)) {
                seen[w] = true;
                out.push_back(w);
            }
        });
    }
    return out;
}

double vertex_diameter(const LatticeField& field, const std::vector<std::size_t>& vertices) {
    if (vertices.size() < 2) return 0.0;
    // The farthest pair lies on the convex hull, hence among the extreme
    // vertices of each line parallel to the first axis.
    std::vector<std::array<int, 3>> ext;
    {
        std::vector<std::array<int, 3>> pts;
        pts.reserve(vertices.size());
        for (std::size_t v : vertices) {
            const auto z = field.coords(v);
            pts.push_back({z[1], z[2], z[0]});
        }
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const bool first = i == 0 || pts[i][0] != pts[i - 1][0] || pts[i][1] != pts[i - 1][1];
            const bool last = i + 1 == pts.size() || pts[i][0] != pts[i + 1][0] || pts[i][1] != pts[i + 1][1];
            if (first || last) ext.push_back(pts[i]);
        }
    }
    long best = 0;
    for (std::size_t a = 0; a < ext.size(); ++a)
        for (std::size_t b = a + 1; b < ext.size(); ++b) {
            long d2 = 0;
            for (int k = 0; k < 3; ++k) {
                const long d = ext[a][k] - ext[b][k];
                d2 += d * d;
            }
            best = std::max(best, d2);
        }
    return std::sqrt(static_cast<double>(best));
}

ProportionEstimate wilson(std::size_t hits, std::size_t trials, double z) {
    ProportionEstimate e;
    e.hits = hits;
    e.trials = trials;
    if (trials == 0) return e;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    e.p = p;
    e.ci_lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    e.ci_hi = hits == trials ? 1.0 : std::min(1.0, centre + half);
    return e;
}

DecayTable blocked_diameter_stats(const process::ProcessParams& process, const GeometryParams& geometry,
                                  const LatticeParams& lattice, std::size_t replicas, int m_max, int fit_lo,
                                  int fit_hi) {
    process.validate();
    geometry.validate();
    lattice.validate();
    if (m_max < 1) throw ParameterError("m_max must be >= 1");
    const int dim = process.dim;
    const double side = static_cast<double>(lattice.n) / static_cast<double>(lattice.k_scale);
    Box window;
    for (int k = 0; k < dim; ++k) {
        window.lo[k] = -geometry.r;
        window.hi[k] = side + geometry.r;
    }
    LatticeParams lp = lattice;
    lp.origin = Point{0.0, 0.0, 0.0};

    std::vector<double> diameters(replicas, -1.0);
    const Rng master(process.seed);
    parallel_for(replicas, [&](std::size_t i) {
        Rng rng = master.substream(i);
        const PointCloud cloud = process::sample_poisson(window, process, rng);
        const LatticeField field = build_field(cloud, geometry, lp);
        const int mid = lattice.n / 2;
        const std::size_t origin = field.index(mid, mid, dim == 3 ? mid : 0);
        const auto cluster = blocked_cluster(field, origin);
        diameters[i] = cluster.empty() ? -1.0 : vertex_diameter(field, cluster);
    });

    DecayTable table;
    table.replicas = replicas;
    table.fit_lo = fit_lo;
    table.fit_hi = fit_hi;
    for (int m = 1; m <= m_max; ++m) {
        std::size_t hits = 0;
        for (double d : diameters)
            if (d >= static_cast<double>(m)) ++hits;
        table.rows.push_back({m, wilson(hits, replicas)});
    }

    std::vector<double> xs, ys;
    for (const auto& row : table.rows)
        if (row.m >= fit_lo && row.m <= fit_hi && row.estimate.p > 0.0) {
            xs.push_back(row.m);
            ys.push_back(std::log(row.estimate.p));
        }
    if (xs.size() >= 2) {
        const double k = static_cast<double>(xs.size());
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        table.slope = sxy / sxx;
        table.intercept = my - table.slope * mx;
        table.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    }
    return table;
}

std::vector<CrossingRow> crossing_probability(const process::ProcessParams& process, const GeometryParams& geometry,
                                              int k_scale, double c1, std::size_t replicas,
                                              const std::vector<int>& n_ladder) {
    process.validate();
    geometry.validate();
    if (process.dim != 2) throw UnsupportedDimension("crossing probabilities are planar");
    std::vector<CrossingRow> rows;
    const Rng master(process.seed);
    for (std::size_t li = 0; li < n_ladder.size(); ++li) {
        const int n = n_ladder[li];
        LatticeParams lp{k_scale, n, Point{0.0, 0.0, 0.0}};
        lp.validate();
        const double side = static_cast<double>(n) / static_cast<double>(k_scale);
        Box window;
        window.lo = {-geometry.r, -geometry.r, 0.0};
        window.hi = {side + geometry.r, side + geometry.r, 0.0};
        std::vector<std::uint8_t> hit(replicas, 0);
        const Rng ladder = master.substream(static_cast<std::uint64_t>(li));
        parallel_for(replicas, [&](std::size_t i) {
            Rng rng = ladder.substream(i);
            const PointCloud cloud = process::sample_poisson(window, process, rng);
            const LatticeField field = build_field(cloud, geometry, lp);
            hit[i] = static_cast<double>(min_open_crossing(field)) <= c1 * n ? 1 : 0;
        });
        const std::size_t hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
        rows.push_back({n, wilson(hits, replicas)});
    }
    return rows;
}

}  // namespace perfhom::percolation
