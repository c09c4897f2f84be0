#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ces/error.hpp"
#include "ces/types.hpp"

namespace ces {

enum class Linkage { Single, Complete, Average, Ward };

/// One agglomeration step. Leaves are nodes 0..n-1; merge t creates node n+t.
struct Merge {
    std::size_t left;
    std::size_t right;
    double height;
    std::size_t size;
};

struct Dendrogram {
    std::size_t leaves = 0;
    std::vector<Merge> merges;
};

/// Agglomerative clustering of a symmetric dissimilarity matrix using the
/// Lance-Williams update for the chosen linkage. The closest pair is merged first;
/// ties go to the lexicographically smallest pair of active slots, so the result is
/// a pure function of the input matrix.
inline Dendrogram agglomerate(const Matrix& dissimilarity, Linkage linkage) {
    const auto n = static_cast<std::size_t>(dissimilarity.rows());
    if (dissimilarity.cols() != dissimilarity.rows()) throw DimensionMismatch("dissimilarity matrix must be square");
    Dendrogram tree{n, {}};
    if (n < 2) return tree;
    tree.merges.reserve(n - 1);

    // Work on a dense copy; merged clusters live in the smaller slot of the pair.
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = dissimilarity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    if (linkage == Linkage::Ward)
        for (auto& x : d) x *= x;

    std::vector<std::size_t> node(n), size(n, 1);
    std::iota(node.begin(), node.end(), std::size_t{0});
    std::vector<bool> active(n, true);

    // Nearest active neighbour (with larger index) per slot keeps each step O(n) amortized.
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_dist(n, std::numeric_limits<double>::infinity());
    auto refresh = [&](std::size_t i) {
        nn[i] = n;
        nn_dist[i] = std::numeric_limits<double>::infinity();
        for (std::size_t j = i + 1; j < n; ++j)
            if (active[j] && d[i * n + j] < nn_dist[i]) {
                nn_dist[i] = d[i * n + j];
                nn[i] = j;
            }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && nn[i] < n && (a == n || nn_dist[i] < nn_dist[a])) a = i;
        const std::size_t b = nn[a];
        const double dab = d[a * n + b];
        const double na = static_cast<double>(size[a]);
        const double nb = static_cast<double>(size[b]);

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) continue;
            const double dak = d[a * n + k];
            const double dbk = d[b * n + k];
            double v = 0.0;
            switch (linkage) {
                case Linkage::Single: v = std::min(dak, dbk); break;
                case Linkage::Complete: v = std::max(dak, dbk); break;
                case Linkage::Average: v = (na * dak + nb * dbk) / (na + nb); break;
                case Linkage::Ward: {
                    const double nk = static_cast<double>(size[k]);
                    v = ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk);
                    break;
                }
            }
            d[a * n + k] = v;
            d[k * n + a] = v;
        }

        const double height = linkage == Linkage::Ward ? std::sqrt(std::max(0.0, dab)) : dab;
        tree.merges.push_back({std::min(node[a], node[b]), std::max(node[a], node[b]), height, size[a] + size[b]});
        active[b] = false;
        size[a] += size[b];
        node[a] = n + step;

        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            if (i == a || nn[i] == a || nn[i] == b) {
                refresh(i);
            } else if (i < a && (d[i * n + a] < nn_dist[i] || (d[i * n + a] == nn_dist[i] && a < nn[i]))) {
                nn_dist[i] = d[i * n + a];
                nn[i] = a;
            }
        }
    }
    return tree;
}

/// Undoes the last k-1 merges. Clusters are numbered by their smallest sample index.
inline Partition cut(const Dendrogram& tree, std::size_t k) {
    const auto n = tree.leaves;
    if (k < 1 || k > n) throw InvalidK("cannot cut " + std::to_string(n) + " samples into " + std::to_string(k) + " clusters");
    if (tree.merges.size() + 1 != n) throw DimensionMismatch("dendrogram is incomplete");
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t t = 0; t < n - k; ++t) {
        const auto& m = tree.merges[t];
        parent[find(m.left)] = n + t;
        parent[find(m.right)] = n + t;
    }
    std::vector<int> roots(n);
    for (std::size_t i = 0; i < n; ++i) roots[i] = static_cast<int>(find(i));
    return Partition::from_labels(roots);
}

}  // namespace ces
