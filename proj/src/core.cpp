#include "perfhom/core.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <openssl/evp.h>

namespace perfhom {

namespace {

void check_dim(int dim) {
    if (dim != 2 && dim != 3) throw UnsupportedDimension("dimension must be 2 or 3, got " + std::to_string(dim));
}

}  // namespace

PointCloud::PointCloud(int dim, Box window, std::vector<Point> points)
    : dim_(dim), window_(window), points_(std::move(points)) {
    check_dim(dim_);
    for (int k = 0; k < dim_; ++k)
        if (!(window_.hi[k] >= window_.lo[k])) throw ParameterError("window upper corner below lower corner");
    for (auto& p : points_) {
        for (int k = dim_; k < 3; ++k) p[k] = 0.0;
        for (int k = 0; k < dim_; ++k)
            if (!std::isfinite(p[k])) throw ParameterError("non-finite point coordinate");
        if (!window_.contains(p, dim_)) throw ParameterError("point outside sampling window");
    }
    std::vector<Point> sorted = points_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ParameterError("point cloud contains duplicate points");
}

PointCloud PointCloud::unchecked(int dim, Box window, std::vector<Point> points) {
    PointCloud c;
    c.dim_ = dim;
    c.window_ = window;
    c.points_ = std::move(points);
    return c;
}

PointCloud PointCloud::subset(const std::vector<std::size_t>& indices) const {
    std::vector<Point> pts;
    pts.reserve(indices.size());
    for (std::size_t i : indices) pts.push_back(points_.at(i));
    return unchecked(dim_, window_, std::move(pts));
}

PointCloud PointCloud::translated(const Point& t) const {
    std::vector<Point> pts = points_;
    Box w = window_;
    for (int k = 0; k < dim_; ++k) {
        for (auto& p : pts) p[k] += t[k];
        w.lo[k] += t[k];
        w.hi[k] += t[k];
    }
    return unchecked(dim_, w, std::move(pts));
}

PointCloud PointCloud::with_window(const Box& w) const { return PointCloud(dim_, w, points_); }

NeighborGrid::NeighborGrid(const std::vector<Point>& points, int dim, double cell)
    : points_(&points), dim_(dim), cell_(cell) {
    if (!(cell_ > 0.0)) throw ParameterError("neighbour grid cell size must be positive");
    if (points.empty()) {
        start_.assign(2, 0);
        return;
    }
    Point lo = points.front(), hi = points.front();
    for (const auto& p : points)
        for (int k = 0; k < dim_; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    // Keep the bucket count proportional to the point count.
    const double budget = 4.0 * static_cast<double>(points.size()) + 64.0;
    for (;;) {
        double cells = 1.0;
        for (int k = 0; k < dim_; ++k) cells *= std::floor((hi[k] - lo[k]) / cell_) + 1.0;
        if (cells <= budget) break;
        cell_ *= 1.5;
    }
    origin_ = lo;
    std::size_t total = 1;
    for (int k = 0; k < dim_; ++k) {
        shape_[k] = static_cast<long>(std::floor((hi[k] - lo[k]) / cell_)) + 1;
        total *= static_cast<std::size_t>(shape_[k]);
    }
    std::vector<std::size_t> bucket(points.size());
    start_.assign(total + 1, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t c = 0, stride = 1;
        for (int k = 0; k < dim_; ++k) {
            const long ix = std::clamp(cell_index(points[i][k], k), 0L, shape_[k] - 1);
            c += static_cast<std::size_t>(ix) * stride;
            stride *= static_cast<std::size_t>(shape_[k]);
        }
        bucket[i] = c;
        ++start_[c + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    order_.resize(points.size());
    std::vector<std::size_t> fill = start_;
    for (std::size_t i = 0; i < points.size(); ++i) order_[fill[bucket[i]]++] = i;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

}  // namespace perfhom
