#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "ces/error.hpp"
#include "ces/types.hpp"

namespace ces::diversity {

/// One cluster of a partition over `total` samples.
struct ClusterView {
    std::vector<std::size_t> members;
    std::size_t total;

    std::size_t size() const noexcept { return members.size(); }
};

inline std::vector<ClusterView> clusters_of(const Partition& p) {
    std::vector<ClusterView> out;
    for (auto& members : p.clusters())
        if (!members.empty()) out.push_back({std::move(members), p.size()});
    return out;
}

/// APMM similarity of a cluster to a partition:
///
///   -2 n_c ln(n / n_c) / (n_c ln(n_c / n) + sum_i n_i ln(n_i / n))
///
/// The 0/0 case (full cluster against a single-cluster partition) is 1.
inline double apmm(const ClusterView& cluster, const Partition& partition) {
    const auto n = partition.size();
    if (n < 2) throw std::invalid_argument("apmm needs at least two samples");
    if (cluster.total != n) throw LengthMismatch("cluster and partition cover different sample counts");
    if (cluster.size() < 1 || cluster.size() > n) throw std::invalid_argument("cluster size outside [1, n]");

    const double nn = static_cast<double>(n);
    const double nc = static_cast<double>(cluster.size());
    double partition_term = 0.0;
    for (auto size : partition.cluster_sizes()) {
        if (size == 0) continue;
        const double ni = static_cast<double>(size);
        partition_term += ni * std::log(ni / nn);
    }
    const double numerator = -2.0 * nc * std::log(nn / nc);
    const double denominator = nc * std::log(nc / nn) + partition_term;
    if (denominator == 0.0) return 1.0;  // only reachable when n_c = n and the partition is one cluster
    return numerator / denominator;
}

struct AapmmValue {
    double raw;
    double clamped;
};

/// Mean APMM of p's clusters against `ref`; clamped to [0, 1].
inline AapmmValue aapmm_detail(const Partition& p, const Partition& ref) {
    if (p.size() != ref.size()) throw LengthMismatch("partitions cover different sample counts");
    const auto clusters = clusters_of(p);
    double sum = 0.0;
    for (const auto& c : clusters) sum += apmm(c, ref);
    const double raw = sum / static_cast<double>(clusters.size());
    return {raw, std::clamp(raw, 0.0, 1.0)};
}

inline double aapmm(const Partition& p, const Partition& ref) { return aapmm_detail(p, ref).clamped; }

/// Maximum AAPMM of p against the committee.
inline double uniformity(const Partition& p, const std::vector<Partition>& committee) {
    if (committee.empty()) throw EmptyCommittee();
    double best = 0.0;
    for (const auto& member : committee) best = std::max(best, aapmm(p, member));
    return best;
}

struct DiversityReport {
    double uniformity = 0.0;
    double div = 1.0;
    std::vector<double> raw_aapmm;  // one per committee member, unclamped
    bool admitted = true;
};

inline void to_json(nlohmann::json& j, const DiversityReport& r) {
    j = nlohmann::json{{"uniformity", r.uniformity}, {"div", r.div}, {"raw_aapmm", r.raw_aapmm}, {"admitted", r.admitted}};
}

/// Diversity gate: admitted when the committee is empty or 1 - uniformity >= dT.
inline DiversityReport admit(const Partition& p, const std::vector<Partition>& committee, double dT) {
    if (!(dT >= 0.0 && dT <= 1.0)) throw std::invalid_argument("dT must lie in [0, 1]");
    DiversityReport report;
    if (committee.empty()) return report;
    for (const auto& member : committee) {
        const auto v = aapmm_detail(p, member);
        report.raw_aapmm.push_back(v.raw);
        report.uniformity = std::max(report.uniformity, v.clamped);
    }
    report.div = 1.0 - report.uniformity;
    report.admitted = report.div >= dT;
    return report;
}

}  // namespace ces::diversity
