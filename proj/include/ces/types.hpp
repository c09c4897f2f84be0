#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ces/error.hpp"

namespace ces {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Hard assignment of n samples to k clusters labelled 0..k-1.
class Partition {
public:
    Partition() = default;

    Partition(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
        if (k_ < 1) throw InvalidK("partition needs k >= 1");
        for (int l : labels_)
            if (l < 0 || l >= k_) throw std::out_of_range("cluster label " + std::to_string(l) + " outside [0, k)");
    }

    /// Relabels arbitrary integer labels to 0..k-1 in order of first appearance.
    static Partition from_labels(const std::vector<int>& raw) {
        std::map<int, int> remap;
        std::vector<int> labels;
        labels.reserve(raw.size());
        for (int l : raw) {
            auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
            labels.push_back(it->second);
        }
        return Partition(std::move(labels), std::max<int>(1, static_cast<int>(remap.size())));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    int k() const noexcept { return k_; }
    int operator[](std::size_t i) const { return labels_[i]; }
    const std::vector<int>& labels() const noexcept { return labels_; }

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
        for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
        return sizes;
    }

    std::vector<std::vector<std::size_t>> clusters() const {
        std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k_));
        for (std::size_t i = 0; i < labels_.size(); ++i) out[static_cast<std::size_t>(labels_[i])].push_back(i);
        return out;
    }

    std::size_t nonempty_clusters() const {
        const auto sizes = cluster_sizes();
        return static_cast<std::size_t>(std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }));
    }

    bool operator==(const Partition&) const = default;

private:
    std::vector<int> labels_;
    int k_ = 1;
};

/// The randomized inputs of one clusterer run (e.g. initial centroids), one row per item.
struct BasicParams {
    std::string algorithm;
    Matrix rows;

    bool operator==(const BasicParams& other) const {
        return algorithm == other.algorithm && rows.rows() == other.rows.rows() && rows.cols() == other.rows.cols() &&
               rows == other.rows;
    }
};

inline void to_json(nlohmann::json& j, const BasicParams& p) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < p.rows.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < p.rows.cols(); ++c) row.push_back(p.rows(r, c));
        rows.push_back(std::move(row));
    }
    j = nlohmann::json{{"algorithm", p.algorithm}, {"rows", std::move(rows)}};
}

inline void from_json(const nlohmann::json& j, BasicParams& p) {
    p.algorithm = j.at("algorithm").get<std::string>();
    const auto& rows = j.at("rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
    p.rows.resize(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != d)
            throw DimensionMismatch("ragged basic parameter rows");
        for (Eigen::Index c = 0; c < d; ++c) p.rows(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
}

/// Samples in the standardized feature space, with optional ground truth for evaluation.
struct Dataset {
    Matrix samples;  // n x d
    std::optional<std::vector<int>> labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    std::size_t n() const noexcept { return static_cast<std::size_t>(samples.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(samples.cols()); }

    std::size_t class_count() const {
        if (!labels) return 0;
        return Partition::from_labels(*labels).nonempty_clusters();
    }
};

}  // namespace ces
