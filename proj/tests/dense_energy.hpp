#pragma once

// Dense reference for the 2D box energy: assemble the bilinear stiffness
// matrix from the textbook element matrix and solve with a rank-revealing
// factorisation.

#include <Eigen/Dense>
#include <array>
#include <map>

#include "perfhom/conductivity.hpp"

namespace testing {

inline double dense_energy(const perfhom::conductivity::CellMask& mask, std::array<double, 2> eta) {
    const int N = mask.cells;
    const double h = mask.h;
    // local vertices (0,0) (1,0) (0,1) (1,1)
    const double K[4][4] = {{4, -1, -1, -2}, {-1, 4, -2, -1}, {-1, -2, 4, -1}, {-2, -1, -1, 4}};
    const int ox[4] = {0, 1, 0, 1}, oy[4] = {0, 0, 1, 1};
    std::map<int, int> dof;
    auto vertex = [&](int i, int j) { return i + (N + 1) * j; };
    auto interior = [&](int i, int j) { return i > 0 && j > 0 && i < N && j < N; };
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            if (!mask.kept[std::size_t(i + N * j)]) continue;
            for (int a = 0; a < 4; ++a)
                if (interior(i + ox[a], j + oy[a])) dof.emplace(vertex(i + ox[a], j + oy[a]), 0);
        }
    int m = 0;
    for (auto& [v, d] : dof) d = m++;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    double c = 0.0;
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            if (!mask.kept[std::size_t(i + N * j)]) continue;
            c += (eta[0] * eta[0] + eta[1] * eta[1]) * h * h;
            for (int a = 0; a < 4; ++a) {
                if (!interior(i + ox[a], j + oy[a])) continue;
                const int da = dof[vertex(i + ox[a], j + oy[a])];
                b[da] += 0.5 * h * (eta[0] * (ox[a] ? 1 : -1) + eta[1] * (oy[a] ? 1 : -1));
                for (int q = 0; q < 4; ++q) {
                    if (!interior(i + ox[q], j + oy[q])) continue;
                    A(da, dof[vertex(i + ox[q], j + oy[q])]) += K[a][q] / 6.0;
                }
            }
        }
    double e = c;
    if (m > 0) {
        const Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(b);
        e = c - b.dot(x);
    }
    const double L = N * h;
    return e / (L * L);
}

}  // namespace testing
