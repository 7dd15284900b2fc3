#pragma once

// Exhaustive disjoint-channel count for small 2D fields (n * n <= 32):
// enumerate every simple open l1 path from column 0 to column n-1 as a
// vertex bitmask, then pack disjoint paths by memoised branching on the
// lowest still-available left-column vertex.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "perfhom/percolation.hpp"

namespace testing {

class ChannelOracle {
  public:
    explicit ChannelOracle(const perfhom::percolation::LatticeField& f) : f_(f), n_(f.n()) {
        by_start_.resize(n_);
        for (int y = 0; y < n_; ++y) {
            const std::size_t v = f_.index(0, y);
            if (f_.is_open(v)) walk(v, bit(v), y);
        }
    }

    int count() { return best(full_open()); }

  private:
    static std::uint32_t bit(std::size_t v) { return std::uint32_t(1) << v; }

    std::uint32_t full_open() const {
        std::uint32_t m = 0;
        for (std::size_t v = 0; v < f_.size(); ++v)
            if (f_.is_open(v)) m |= bit(v);
        return m;
    }

    void walk(std::size_t v, std::uint32_t mask, int start_row) {
        const auto z = f_.coords(v);
        if (z[0] == n_ - 1) {
            by_start_[start_row].push_back(mask);
            return;
        }
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int x = z[0] + dx[k], y = z[1] + dy[k];
            // column 0 only at the start: a later visit would give a shorter channel anyway
            if (x < 1 || x >= n_ || y < 0 || y >= n_) continue;
            const std::size_t w = f_.index(x, y);
            if (!f_.is_open(w) || (mask & bit(w))) continue;
            walk(w, mask | bit(w), start_row);
        }
    }

    int best(std::uint32_t avail) {
        if (auto it = memo_.find(avail); it != memo_.end()) return it->second;
        int row = -1;
        for (int y = 0; y < n_; ++y)
            if (avail & bit(f_.index(0, y))) {
                row = y;
                break;
            }
        int result = 0;
        if (row >= 0) {
            result = best(avail & ~bit(f_.index(0, row)));
            for (std::uint32_t p : by_start_[row])
                if ((p & avail) == p) result = std::max(result, 1 + best(avail & ~p));
        }
        memo_[avail] = result;
        return result;
    }

    const perfhom::percolation::LatticeField& f_;
    int n_;
    std::vector<std::vector<std::uint32_t>> by_start_;
    std::unordered_map<std::uint32_t, int> memo_;
};

inline perfhom::percolation::LatticeField random_field(perfhom::Rng& rng, int n, double p_open, int dim = 2) {
    std::size_t size = 1;
    for (int k = 0; k < dim; ++k) size *= std::size_t(n);
    std::vector<std::uint8_t> open(size);
    for (auto& o : open) o = rng.uniform() < p_open ? 1 : 0;
    return perfhom::percolation::LatticeField(dim, n, open);
}

}  // namespace testing
