#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "wgan2d/data.hpp"
#include "wgan2d/tensor.hpp"

namespace wgan2d {

/// Square matrix of Euclidean distances between two equal-size point batches.
struct CostMatrix {
    std::size_t n = 0;
    Tensor costs; // [n, n], costs(i, j) = |a_i - b_j|

    static CostMatrix euclidean(const Batch2D& a, const Batch2D& b)
    {
        if (a.size() != b.size())
            throw ShapeError("CostMatrix: batch sizes differ (" + std::to_string(a.size()) + " vs "
                             + std::to_string(b.size()) + ")");
        CostMatrix m;
        m.n = a.size();
        m.costs = Tensor({m.n, m.n});
        for (std::size_t i = 0; i < m.n; ++i)
            for (std::size_t j = 0; j < m.n; ++j) {
                const double dx = a.x(i) - b.x(j);
                const double dy = a.y(i) - b.y(j);
                m.costs.at(i, j) = std::sqrt(dx * dx + dy * dy);
            }
        return m;
    }

    void validate() const
    {
        if (costs.rank() != 2 || costs.rows() != n || costs.cols() != n)
            throw ShapeError("CostMatrix: expected square [n,n], got " + shape_str(costs.shape()));
        for (double v : costs.data())
            if (!std::isfinite(v) || v < 0.0)
                throw NumericError("CostMatrix: entries must be finite and nonnegative");
    }
};

/// Minimum-cost perfect matching: row i of A is assigned to column perm[i].
struct Assignment {
    std::vector<std::size_t> perm;
    double total_cost = 0.0;
};

/// Exact assignment solver with row/column potentials, O(n^3) worst case.
/// Augments one row at a time along shortest alternating paths.
inline Assignment hungarian(const CostMatrix& m)
{
    m.validate();
    const std::size_t n = m.n;
    const double inf = std::numeric_limits<double>::infinity();
    const auto cost = [&](std::size_t i, std::size_t j) { return m.costs.at(i - 1, j - 1); };

    // 1-based arrays; column 0 is the virtual root of each augmenting search.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        // Unwind the alternating path found for row i.
        while (j0 != 0) {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        }
    }

    Assignment out;
    out.perm.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j)
        out.perm[match[j] - 1] = j - 1;
    out.total_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        out.total_cost += m.costs.at(i, out.perm[i]);
    return out;
}

/// Exact earth mover's distance between equal-size batches: mean per-point
/// transport cost of the optimal matching under Euclidean ground distance.
inline double emd(const Batch2D& a, const Batch2D& b)
{
    const CostMatrix m = CostMatrix::euclidean(a, b);
    return hungarian(m).total_cost / static_cast<double>(m.n);
}

/// Test oracle: minimum mean transport cost over all n! permutations.
inline double brute_force_emd(const Batch2D& a, const Batch2D& b)
{
    if (a.size() != b.size())
        throw ShapeError("brute_force_emd: batch sizes differ");
    if (a.size() > 9)
        throw Error("brute_force_emd: n > 9 would enumerate too many permutations");
    const CostMatrix m = CostMatrix::euclidean(a, b);
    std::vector<std::size_t> perm(m.n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < m.n; ++i)
            total += m.costs.at(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(m.n);
}

} // namespace wgan2d
