#pragma once

// Basic clustering algorithms that feed the ensemble committee. Each run is a pure
// function of (dataset, config) and reports the randomized inputs it drew so that
// two runs of the same algorithm can be compared by bpi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ces/agglomerative.hpp"
#include "ces/error.hpp"
#include "ces/rng.hpp"
#include "ces/types.hpp"

namespace ces {

/// Mean-imputes NaN cells, then standardizes each column to mean 0 and population
/// standard deviation 1 (divisor n), so [1, 3] maps to [-1, 1]. Constant columns
/// become all zeros.
inline Dataset preprocess(const Matrix& raw) {
    if (raw.rows() < 2) throw DataError("need at least two samples");
    if (raw.cols() < 1) throw DataError("need at least one feature");
    Dataset out;
    out.samples = raw;
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        double sum = 0.0;
        Eigen::Index observed = 0;
        for (Eigen::Index r = 0; r < raw.rows(); ++r) {
            const double v = raw(r, c);
            if (std::isnan(v)) continue;
            if (!std::isfinite(v)) throw DataError("non-finite value in column " + std::to_string(c));
            sum += v;
            ++observed;
        }
        if (observed == 0) throw AllMissingColumn(static_cast<std::size_t>(c));
        const double mean = sum / static_cast<double>(observed);
        auto col = out.samples.col(c);
        for (Eigen::Index r = 0; r < col.size(); ++r)
            if (std::isnan(col(r))) col(r) = mean;
        const double centre = col.mean();
        col.array() -= centre;
        const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
        if (sd > 1e-12 * std::max(1.0, std::abs(centre)))
            col /= sd;
        else
            col.setZero();
    }
    return out;
}

struct ClustererConfig {
    std::string algorithm;  // K, F, SPS or a linkage id such as ALE
    int k = 2;
    std::uint64_t seed = 0;
    int max_iterations = 300;
    double tolerance = 1e-6;
    double fuzzifier = 2.0;
    std::optional<std::size_t> neighbors;  // spectral t; default min(10, n-1)
    std::optional<double> sigma;           // spectral kernel width; default median distance
};

struct ClusterRun {
    Partition partition;
    BasicParams params;
};

namespace detail {

inline void check_k(const Dataset& data, int k) {
    if (k < 2 || static_cast<std::size_t>(k) > data.n())
        throw InvalidK("k = " + std::to_string(k) + " outside [2, " + std::to_string(data.n()) + "]");
}

inline Matrix pairwise_euclidean(const Matrix& x) {
    const auto n = x.rows();
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    }
    return d;
}

struct LloydResult {
    std::vector<int> labels;
    Matrix initial_centroids;
};

// Moves, for each empty cluster, the point farthest from its own centroid (taken from
// a cluster with at least two members) into the empty cluster.
inline void repair_empty(const Matrix& x, std::vector<int>& labels, Matrix& centroids) {
    const auto k = centroids.rows();
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (Eigen::Index c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) continue;
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const auto own = labels[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(own)] < 2) continue;
            const double dist = (x.row(i) - centroids.row(own)).squaredNorm();
            if (dist > far_d) {
                far_d = dist;
                far = i;
            }
        }
        --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
        labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
        sizes[static_cast<std::size_t>(c)] = 1;
        centroids.row(c) = x.row(far);
    }
}

inline std::vector<int> assign_nearest(const Matrix& x, const Matrix& centroids) {
    std::vector<int> labels(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double dist = (x.row(i) - centroids.row(c)).squaredNorm();
            if (dist < best_d) {
                best_d = dist;
                best = c;
            }
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

/// Lloyd iteration from k distinct randomly chosen samples.
inline LloydResult lloyd(const Matrix& x, int k, Rng& rng, int max_iterations, double tolerance) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    Matrix centroids(k, x.cols());
    for (int c = 0; c < k; ++c) centroids.row(c) = x.row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(c)]));
    LloydResult out{{}, centroids};

    out.labels = assign_nearest(x, centroids);
    repair_empty(x, out.labels, centroids);
    for (int iter = 0; iter < max_iterations; ++iter) {
        Matrix next = Matrix::Zero(k, x.cols());
        std::vector<double> count(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            next.row(out.labels[i]) += x.row(static_cast<Eigen::Index>(i));
            count[static_cast<std::size_t>(out.labels[i])] += 1.0;
        }
        for (int c = 0; c < k; ++c) next.row(c) /= count[static_cast<std::size_t>(c)];
        const double shift = (next - centroids).cwiseAbs().maxCoeff();
        centroids = std::move(next);
        auto labels = assign_nearest(x, centroids);
        repair_empty(x, labels, centroids);
        const bool stable = labels == out.labels;
        out.labels = std::move(labels);
        if (stable || shift < tolerance) break;
    }
    return out;
}

inline Linkage linkage_of(char c) {
    switch (c) {
        case 'S': return Linkage::Single;
        case 'A': return Linkage::Average;
        case 'C': return Linkage::Complete;
        case 'W': return Linkage::Ward;
    }
    throw std::invalid_argument("bad linkage code");
}

}  // namespace detail

enum class Distance { Euclidean, Hamming, Cosine };

/// Pairwise dissimilarities. Hamming counts coordinates differing by more than 1e-9,
/// divided by d. Cosine is 1 - cos(angle), with zero vectors at distance 1 from
/// everything except another zero vector.
inline Matrix pairwise_distance(const Matrix& x, Distance kind) {
    if (kind == Distance::Euclidean) return detail::pairwise_euclidean(x);
    const auto n = x.rows();
    Matrix d = Matrix::Zero(n, n);
    Vector norms = x.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v = 0.0;
            if (kind == Distance::Hamming) {
                Eigen::Index diff = 0;
                for (Eigen::Index c = 0; c < x.cols(); ++c) diff += std::abs(x(i, c) - x(j, c)) > 1e-9;
                v = static_cast<double>(diff) / static_cast<double>(x.cols());
            } else {
                const double denom = norms(i) * norms(j);
                if (denom == 0.0)
                    v = (norms(i) == 0.0 && norms(j) == 0.0) ? 0.0 : 1.0;
                else
                    v = std::clamp(1.0 - x.row(i).dot(x.row(j)) / denom, 0.0, 2.0);
            }
            d(i, j) = d(j, i) = v;
        }
    return d;
}

inline ClusterRun run_kmeans(const Dataset& data, const ClustererConfig& cfg) {
    detail::check_k(data, cfg.k);
    Rng rng(cfg.seed);
    auto result = detail::lloyd(data.samples, cfg.k, rng, cfg.max_iterations, cfg.tolerance);
    return {Partition(std::move(result.labels), cfg.k), {cfg.algorithm.empty() ? "K" : cfg.algorithm, std::move(result.initial_centroids)}};
}

/// Fuzzy c-means with fuzzifier m. The basic parameters are the fuzzy centroids of the
/// random initial membership matrix.
inline ClusterRun run_fcm(const Dataset& data, const ClustererConfig& cfg) {
    detail::check_k(data, cfg.k);
    const auto& x = data.samples;
    const auto n = x.rows();
    const auto k = static_cast<Eigen::Index>(cfg.k);
    const double m = cfg.fuzzifier;
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Matrix u(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < k; ++c) u(i, c) = unit(rng) + 1e-12;
        u.row(i) /= u.row(i).sum();
    }
    auto centroids_of = [&](const Matrix& memberships) {
        const Matrix w = memberships.array().pow(m).matrix();
        Matrix c = w.transpose() * x;
        for (Eigen::Index j = 0; j < k; ++j) c.row(j) /= w.col(j).sum();
        return c;
    };
    Matrix centroids = centroids_of(u);
    BasicParams params{cfg.algorithm.empty() ? "F" : cfg.algorithm, centroids};

    const double exponent = 2.0 / (m - 1.0);
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        Matrix next(n, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            Vector dist(k);
            Eigen::Index zeros = 0;
            for (Eigen::Index c = 0; c < k; ++c) {
                dist(c) = (x.row(i) - centroids.row(c)).norm();
                zeros += dist(c) == 0.0;
            }
            for (Eigen::Index c = 0; c < k; ++c) {
                if (zeros > 0) {
                    next(i, c) = dist(c) == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
                    continue;
                }
                double s = 0.0;
                for (Eigen::Index j = 0; j < k; ++j) s += std::pow(dist(c) / dist(j), exponent);
                next(i, c) = 1.0 / s;
            }
        }
        const double change = (next - u).cwiseAbs().maxCoeff();
        u = std::move(next);
        centroids = centroids_of(u);
        if (change < cfg.tolerance) break;
    }

    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        u.row(i).maxCoeff(&best);
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    // An empty hard cluster takes the point with the highest membership in it among
    // points whose own cluster can spare one.
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (Eigen::Index c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) continue;
        Eigen::Index best = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
            if (best < 0 || u(i, c) > u(best, c)) best = i;
        }
        --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(best)])];
        labels[static_cast<std::size_t>(best)] = static_cast<int>(c);
        sizes[static_cast<std::size_t>(c)] = 1;
    }
    return {Partition(std::move(labels), cfg.k), std::move(params)};
}

inline bool is_linkage_id(const std::string& id) {
    return id.size() == 3 && std::string("SACW").find(id[0]) != std::string::npos && id[1] == 'L' &&
           std::string("EHC").find(id[2]) != std::string::npos;
}

/// Agglomerative clustering for ids {S,A,C,W}L{E,H,C}: linkage letter, then base
/// distance (Euclidean, Hamming, cosine). Deterministic, so the basic parameters
/// are the constant row (linkage code, distance code).
inline ClusterRun run_linkage(const Dataset& data, const ClustererConfig& cfg) {
    detail::check_k(data, cfg.k);
    if (!is_linkage_id(cfg.algorithm)) throw UnknownAlgorithm(cfg.algorithm);
    const auto linkage = detail::linkage_of(cfg.algorithm[0]);
    const Distance distance = cfg.algorithm[2] == 'E' ? Distance::Euclidean : cfg.algorithm[2] == 'H' ? Distance::Hamming : Distance::Cosine;
    const auto tree = agglomerate(pairwise_distance(data.samples, distance), linkage);
    Matrix code(1, 2);
    code << static_cast<double>(linkage), static_cast<double>(distance);
    return {cut(tree, static_cast<std::size_t>(cfg.k)), {cfg.algorithm, std::move(code)}};
}

/// Spectral clustering on a symmetric t-nearest-neighbour Gaussian similarity graph:
/// L = D^-1/2 S D^-1/2, top-k eigenvectors, unit-length rows, then k-means. The
/// basic parameters are the k-means initial centroids in the embedded space.
inline ClusterRun run_spectral_sparse(const Dataset& data, const ClustererConfig& cfg) {
    detail::check_k(data, cfg.k);
    const auto n = static_cast<Eigen::Index>(data.n());
    const std::size_t t = cfg.neighbors.value_or(std::min<std::size_t>(10, data.n() - 1));
    if (t < 1 || t >= data.n()) throw std::invalid_argument("spectral neighbour count must be in [1, n)");

    const Matrix dist = detail::pairwise_euclidean(data.samples);
    double sigma = 0.0;
    if (cfg.sigma) {
        sigma = *cfg.sigma;
    } else {
        std::vector<double> all;
        all.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) all.push_back(dist(i, j));
        const auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
        std::nth_element(all.begin(), mid, all.end());
        sigma = *mid;
    }
    if (!(sigma > 0.0)) sigma = 1.0;

    Matrix s = Matrix::Zero(n, n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return dist(i, a) < dist(i, b); });
        std::size_t taken = 0;
        for (Eigen::Index j : order) {
            if (j == i) continue;
            if (taken++ == t) break;
            const double w = std::exp(-dist(i, j) * dist(i, j) / (2.0 * sigma * sigma));
            s(i, j) = w;
            s(j, i) = w;
        }
    }
    Vector inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double deg = s.row(i).sum();
        inv_sqrt_deg(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    const Matrix l = inv_sqrt_deg.asDiagonal() * s * inv_sqrt_deg.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
    if (eig.info() != Eigen::Success) throw DegenerateSpectrum("eigen decomposition failed");
    // A tie across the cut point leaves the embedding subspace undetermined.
    if (cfg.k < n) {
        const double lo = eig.eigenvalues()(n - cfg.k - 1), hi = eig.eigenvalues()(n - cfg.k);
        if (hi - lo <= 1e-10 * std::max(1.0, std::abs(hi))) throw DegenerateSpectrum("no eigengap at k");
    }
    Matrix embed = eig.eigenvectors().rightCols(cfg.k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = embed.row(i).norm();
        if (norm > 0.0) embed.row(i) /= norm;
    }

    std::vector<Eigen::Index> distinct;
    for (Eigen::Index i = 0; i < n && distinct.size() < static_cast<std::size_t>(cfg.k); ++i) {
        bool seen = false;
        for (auto r : distinct)
            if ((embed.row(i) - embed.row(r)).norm() < 1e-8) {
                seen = true;
                break;
            }
        if (!seen) distinct.push_back(i);
    }
    if (distinct.size() < static_cast<std::size_t>(cfg.k))
        throw DegenerateSpectrum("embedding has fewer than k distinct points");

    Rng rng(cfg.seed);
    auto result = detail::lloyd(embed, cfg.k, rng, cfg.max_iterations, cfg.tolerance);
    return {Partition(std::move(result.labels), cfg.k), {cfg.algorithm.empty() ? "SPS" : cfg.algorithm, std::move(result.initial_centroids)}};
}

/// Every algorithm id run_clusterer accepts.
inline std::vector<std::string> implemented_algorithms() {
    std::vector<std::string> ids{"K", "F"};
    for (char l : std::string("SACW"))
        for (char d : std::string("EHC")) ids.push_back(std::string{l, 'L', d});
    ids.push_back("SPS");
    return ids;
}

inline ClusterRun run_clusterer(const Dataset& data, const ClustererConfig& cfg) {
    if (cfg.algorithm == "K") return run_kmeans(data, cfg);
    if (cfg.algorithm == "F") return run_fcm(data, cfg);
    if (cfg.algorithm == "SPS") return run_spectral_sparse(data, cfg);
    if (is_linkage_id(cfg.algorithm)) return run_linkage(data, cfg);
    throw UnknownAlgorithm(cfg.algorithm);
}

}  // namespace ces
