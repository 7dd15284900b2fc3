#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "perfhom/core.hpp"
#include "perfhom/process.hpp"

namespace perfhom::percolation {

struct LatticeParams {
    int k_scale = 1;  // lattice cubes per unit length
    int n = 16;       // vertices per side
    // Lower corner of the scaled box [origin, origin + n / k_scale]^d; the
    // default is the cloud window's lower corner shifted by r.
    std::optional<Point> origin;

    void validate() const;

    // ceil(2 sqrt(d) / (r_c - r)) + 1.
    static int default_k_scale(double r_c, double r, int dim);
};

// Open/blocked field over Z_n^d. Vertex z = (z1, z2[, z3]) is stored at
// z1 + n (z2 + n z3); z1 runs left to right, z2 bottom to top.
class LatticeField {
  public:
    LatticeField() = default;
    LatticeField(int dim, int n, std::vector<std::uint8_t> open, Point origin = {0, 0, 0}, int k_scale = 1);

    int dim() const noexcept { return dim_; }
    int n() const noexcept { return n_; }
    int k_scale() const noexcept { return k_scale_; }
    const Point& origin() const noexcept { return origin_; }
    std::size_t size() const noexcept { return open_.size(); }
    const std::vector<std::uint8_t>& open() const noexcept { return open_; }

    bool is_open(std::size_t v) const { return open_[v] != 0; }
    void set_open(std::size_t v, bool value) { open_[v] = value ? 1 : 0; }
    std::size_t index(int z1, int z2, int z3 = 0) const {
        return static_cast<std::size_t>(z1 + n_ * (z2 + n_ * z3));
    }
    std::array<int, 3> coords(std::size_t v) const;
    // Physical cube k^-1 K_z.
    Box cube(std::size_t v) const;
    // Physical box covered by the whole lattice.
    Box box() const;

  private:
    int dim_ = 2;
    int n_ = 0;
    int k_scale_ = 1;
    Point origin_{0.0, 0.0, 0.0};
    std::vector<std::uint8_t> open_;
};

// open[z] = 1 iff no centre lies within distance r of the closed cube.
// Throws CoverageError unless the cloud window covers the box padded by r.
LatticeField build_field(const PointCloud& cloud, const GeometryParams& geometry, const LatticeParams& lattice);

enum class Augmentation { ShortestPath, DepthFirst };

// Maximum number of vertex-disjoint open left-right channels (l1 adjacency).
int count_channels(const LatticeField& field, Augmentation strategy = Augmentation::ShortestPath);

// A maximum family of disjoint channels, each a vertex list from z1 = 0 to z1 = n - 1.
std::vector<std::vector<std::size_t>> channel_witnesses(const LatticeField& field);

// Minimum number of open vertices on a bottom-top crossing with l-infinity
// adjacency. 2D only.
int min_open_crossing(const LatticeField& field);

// One crossing attaining the minimum, bottom to top.
std::vector<std::size_t> min_crossing_path(const LatticeField& field);

struct ChannelReport {
    int N = 0;
    int L = -1;  // -1 outside 2D
    std::vector<std::vector<std::size_t>> channels;
    std::vector<std::size_t> crossing;
};

ChannelReport analyze(const LatticeField& field);

// Independent witness checks.
bool verify_channels(const LatticeField& field, const std::vector<std::vector<std::size_t>>& channels);
bool verify_crossing(const LatticeField& field, const std::vector<std::size_t>& crossing, int expected_open);

// Blocked l-infinity cluster of a vertex (empty when the vertex is open).
std::vector<std::size_t> blocked_cluster(const LatticeField& field, std::size_t start);
// Euclidean diameter of a vertex set in lattice coordinates.
double vertex_diameter(const LatticeField& field, const std::vector<std::size_t>& vertices);

struct ProportionEstimate {
    std::size_t hits = 0;
    std::size_t trials = 0;
    double p = 0.0;
    double ci_lo = 0.0;  // Wilson 95 %
    double ci_hi = 0.0;
};

ProportionEstimate wilson(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

struct DecayRow {
    int m = 0;
    ProportionEstimate estimate;
};

struct DecayTable {
    std::vector<DecayRow> rows;  // m = 1..m_max
    int fit_lo = 2;
    int fit_hi = 10;
    double slope = 0.0;  // of log p against m over [fit_lo, fit_hi]
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t replicas = 0;
};

// P(origin vertex lies on a blocked path of diameter >= m), origin vertex
// (floor(n/2), ...), replicas drawn from substreams of process.seed.
DecayTable blocked_diameter_stats(const process::ProcessParams& process, const GeometryParams& geometry,
                                  const LatticeParams& lattice, std::size_t replicas, int m_max, int fit_lo = 2,
                                  int fit_hi = 10);

struct CrossingRow {
    int n = 0;
    ProportionEstimate estimate;  // P(L(n) <= c1 n)
};

std::vector<CrossingRow> crossing_probability(const process::ProcessParams& process, const GeometryParams& geometry,
                                              int k_scale, double c1, std::size_t replicas,
                                              const std::vector<int>& n_ladder);

}  // namespace perfhom::percolation
