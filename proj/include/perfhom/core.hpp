#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfhom {

// Points always carry three coordinates; 2D clouds keep z = 0.
using Point = std::array<double, 3>;

// Validation failures (bad parameters, schema, unsupported dimension,
// coverage). The CLI maps these to exit code 2.
class ParameterError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class UnsupportedDimension : public ParameterError {
  public:
    using ParameterError::ParameterError;
};

class CoverageError : public ParameterError {
  public:
    using ParameterError::ParameterError;
};

// Numerical failures (non-convergence, step rejection). Exit code 3.
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

inline double dist2(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

inline double dist(const Point& a, const Point& b, int dim) { return std::sqrt(dist2(a, b, dim)); }

// Axis-aligned box [lo, hi].
struct Box {
    Point lo{0.0, 0.0, 0.0};
    Point hi{0.0, 0.0, 0.0};

    double side(int k) const { return hi[k] - lo[k]; }

    double volume(int dim) const {
        double v = 1.0;
        for (int k = 0; k < dim; ++k) v *= std::max(0.0, side(k));
        return v;
    }

    bool contains(const Point& p, int dim) const {
        for (int k = 0; k < dim; ++k)
            if (p[k] < lo[k] || p[k] > hi[k]) return false;
        return true;
    }

    Box inflated(double margin, int dim) const {
        Box b = *this;
        for (int k = 0; k < dim; ++k) {
            b.lo[k] -= margin;
            b.hi[k] += margin;
        }
        return b;
    }

    // Squared distance from p to the closed box (0 inside).
    double dist2_to(const Point& p, int dim) const {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            double d = 0.0;
            if (p[k] < lo[k]) d = lo[k] - p[k];
            else if (p[k] > hi[k]) d = p[k] - hi[k];
            s += d * d;
        }
        return s;
    }

    bool operator==(const Box&) const = default;
};

// Finite point set with its sampling window.
class PointCloud {
  public:
    PointCloud() = default;

    // Validates: dim in {2,3}, points inside the window, no duplicates.
    PointCloud(int dim, Box window, std::vector<Point> points);

    // Skips validation; used internally for subsets of a validated cloud.
    static PointCloud unchecked(int dim, Box window, std::vector<Point> points);

    int dim() const noexcept { return dim_; }
    const Box& window() const noexcept { return window_; }
    const std::vector<Point>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const Point& operator[](std::size_t i) const { return points_[i]; }

    PointCloud subset(const std::vector<std::size_t>& indices) const;
    PointCloud translated(const Point& t) const;
    PointCloud with_window(const Box& w) const;

    bool operator==(const PointCloud&) const = default;

  private:
    int dim_ = 2;
    Box window_{};
    std::vector<Point> points_;
};

struct GeometryParams {
    double r = 0.3;

    void validate() const {
        if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("ball radius r must be > 0");
    }
};

// Counter-based SplitMix64 stream (format version 1). Output i of a stream
// with key k is mix64(k + (i + 1) * golden); substreams rekey through mix64,
// so replica i of a study draws from substream(i) regardless of scheduling.
class Rng {
  public:
    using result_type = std::uint64_t;
    static constexpr int kVersion = 1;

    explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

    Rng substream(std::uint64_t id) const {
        Rng s(0);
        s.key_ = mix64(key_ ^ mix64(id + kGolden));
        return s;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const noexcept { return counter_; }

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Uniform bucket grid for fixed-radius neighbour queries.
class NeighborGrid {
  public:
    NeighborGrid(const std::vector<Point>& points, int dim, double cell);

    // Calls fn(index, squared distance) for every point within `radius` of p
    // (closed ball). `radius` may exceed the cell size.
    template <typename Fn>
    void for_each_within(const Point& p, double radius, Fn&& fn) const {
        if (points_->empty()) return;
        const double r2 = radius * radius;
        std::array<long, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int k = 0; k < dim_; ++k) {
            lo[k] = std::max(0L, cell_index(p[k] - radius, k));
            hi[k] = std::min(shape_[k] - 1, cell_index(p[k] + radius, k));
            if (lo[k] > hi[k]) return;
        }
        for (long z = lo[2]; z <= hi[2]; ++z)
            for (long y = lo[1]; y <= hi[1]; ++y)
                for (long x = lo[0]; x <= hi[0]; ++x) {
                    const std::size_t c = static_cast<std::size_t>(x + shape_[0] * (y + shape_[1] * z));
                    for (std::size_t s = start_[c]; s < start_[c + 1]; ++s) {
                        const std::size_t i = order_[s];
                        const double d2 = dist2(p, (*points_)[i], dim_);
                        if (d2 <= r2) fn(i, d2);
                    }
                }
    }

  private:
    long cell_index(double coord, int k) const {
        return static_cast<long>(std::floor((coord - origin_[k]) / cell_));
    }

    const std::vector<Point>* points_;
    int dim_;
    double cell_;
    Point origin_{0.0, 0.0, 0.0};
    std::array<long, 3> shape_{1, 1, 1};
    std::vector<std::size_t> start_;
    std::vector<std::size_t> order_;
};

// Runs fn(i) for i in [0, count) on a small thread pool. Each index must
// write only its own slot, which keeps results independent of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

}  // namespace perfhom
