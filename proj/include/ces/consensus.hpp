#pragma once

// Committee building and consensus: candidates are generated, gated by diversity,
// weighted by independency and fused through a weighted co-association matrix cut
// by average linkage.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ces/agglomerative.hpp"
#include "ces/clusterers.hpp"
#include "ces/diversity.hpp"
#include "ces/error.hpp"
#include "ces/independency.hpp"
#include "ces/rng.hpp"
#include "ces/types.hpp"

namespace ces::consensus {

struct CommitteeEntry {
    Partition partition;
    std::string algorithm;
    BasicParams basic_params;
    double diversity_at_admission = 1.0;
    std::size_t run_index = 0;
};

/// n x n evidence that two samples share a cluster; symmetric, unit diagonal, in [0, 1].
struct CoAssociationMatrix {
    Matrix values;

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.rows()); }
    double operator()(std::size_t i, std::size_t j) const {
        return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

namespace detail {

// Sum of weights of the partitions co-clustering each pair, divided by the committee
// size. Partitions are accumulated in committee order.
template <typename PartitionAt>
CoAssociationMatrix accumulate(std::size_t m, PartitionAt partition_at, const std::vector<double>& weights) {
    if (m == 0) throw EmptyCommittee();
    const auto n = partition_at(0).size();
    for (std::size_t p = 1; p < m; ++p)
        if (partition_at(p).size() != n) throw LengthMismatch("committee partitions cover different sample counts");
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t p = 0; p < m; ++p) {
        const auto& labels = partition_at(p).labels();
        const double w = weights[p];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (labels[i] == labels[j]) sum(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += w;
    }
    CoAssociationMatrix c{Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    const double denom = static_cast<double>(m);
    for (Eigen::Index i = 0; i < c.values.rows(); ++i)
        for (Eigen::Index j = i + 1; j < c.values.cols(); ++j) c.values(i, j) = c.values(j, i) = sum(i, j) / denom;
    return c;
}

}  // namespace detail

/// Evidence accumulation: fraction of partitions placing i and j together.
inline CoAssociationMatrix eac(const std::vector<Partition>& committee) {
    return detail::accumulate(
        committee.size(), [&](std::size_t p) -> const Partition& { return committee[p]; },
        std::vector<double>(committee.size(), 1.0));
}

/// Weighted evidence accumulation: co-clustering partitions contribute their entry's
/// weight instead of 1. Unit weights reproduce eac exactly.
inline CoAssociationMatrix weac(const std::vector<CommitteeEntry>& committee, const std::vector<double>& weights) {
    if (weights.size() != committee.size())
        throw WeightMismatch(std::to_string(weights.size()) + " weights for " + std::to_string(committee.size()) + " entries");
    return detail::accumulate(
        committee.size(), [&](std::size_t p) -> const Partition& { return committee[p].partition; }, weights);
}

/// Average linkage on the dissimilarity 1 - C.
inline Dendrogram average_linkage(const CoAssociationMatrix& c) {
    Matrix d = Matrix::Ones(c.values.rows(), c.values.cols()) - c.values;
    d.diagonal().setZero();
    return agglomerate(d, Linkage::Average);
}

enum class ConsensusMode { Weac, Eac };

inline std::string to_string(ConsensusMode m) { return m == ConsensusMode::Weac ? "weac" : "eac"; }

struct PipelineConfig {
    int k_final = 2;  // K_b
    double dT = 0.0;
    std::size_t committee_target = 20;
    std::size_t max_attempts = 200;
    std::uint64_t seed = 0;
    std::vector<std::string> roster = implemented_algorithms();
    ConsensusMode consensus = ConsensusMode::Weac;
    independency::Aidm aidm;
    std::string aidm_source = "reference";
    /// When set, candidate k is drawn uniformly from [2, k_max] instead of k_final.
    std::optional<int> k_max;
    /// Wall-clock cap on candidate generation; stops early, so results then depend on timing.
    std::optional<double> time_budget_ms;
    /// Candidates generated speculatively per batch; admission stays in run-index order.
    std::size_t workers = 1;
    ClustererConfig clusterer;  // shared hyperparameters; algorithm, k and seed are set per run
};

struct AttemptRecord {
    std::size_t run_index = 0;
    std::string algorithm;
    int k = 0;
    bool failed = false;
    std::string error;
    bool admitted = false;
    double div = 0.0;
};

struct EntryReport {
    std::string algorithm;
    std::size_t run_index;
    int k;
    double weight;
    double diversity;
};

struct RunReport {
    Partition final_partition;
    std::size_t nce = 0;
    std::size_t attempts = 0;
    std::vector<EntryReport> per_entry;
    std::vector<AttemptRecord> trace;
    nlohmann::json config;
    double wall_time_ms = 0.0;

    /// attempts per admitted entry
    double attempts_per_admission() const { return nce == 0 ? 0.0 : static_cast<double>(attempts) / static_cast<double>(nce); }
};

inline nlohmann::json config_json(const PipelineConfig& cfg) {
    nlohmann::json j{{"k", cfg.k_final},
                     {"dT", cfg.dT},
                     {"committee", cfg.committee_target},
                     {"max_attempts", cfg.max_attempts},
                     {"seed", cfg.seed},
                     {"roster", cfg.roster},
                     {"consensus", to_string(cfg.consensus)},
                     {"aidm", cfg.aidm_source}};
    if (cfg.k_max) j["k_max"] = *cfg.k_max;
    if (cfg.time_budget_ms) j["time_budget_ms"] = *cfg.time_budget_ms;
    return j;
}

/// `include_timing = false` drops wall_time_ms, the only field that varies between
/// otherwise identical runs.
inline nlohmann::json to_json(const RunReport& r, bool include_timing = true) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.per_entry)
        entries.push_back({{"algorithm", e.algorithm}, {"run_index", e.run_index}, {"k", e.k}, {"weight", e.weight}, {"diversity", e.diversity}});
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& a : r.trace) {
        nlohmann::json t{{"run_index", a.run_index}, {"algorithm", a.algorithm}, {"k", a.k}, {"admitted", a.admitted}, {"div", a.div}};
        if (a.failed) t["error"] = a.error;
        trace.push_back(std::move(t));
    }
    nlohmann::json j{{"final_assignments", r.final_partition.labels()},
                     {"nCE", r.nce},
                     {"attempts", r.attempts},
                     {"per_entry", std::move(entries)},
                     {"diversity_trace", std::move(trace)},
                     {"config", r.config}};
    if (include_timing) j["wall_time_ms"] = r.wall_time_ms;
    return j;
}

namespace detail {

struct Candidate {
    std::size_t run_index;
    std::string algorithm;
    int k;
    std::optional<ClusterRun> run;
    std::string error;
};

inline Candidate generate(const Dataset& data, const PipelineConfig& cfg, std::size_t run_index) {
    Rng roster_rng(derive_seed(cfg.seed, stream::roster, run_index));
    std::uniform_int_distribution<std::size_t> pick(0, cfg.roster.size() - 1);
    Candidate c{run_index, cfg.roster[pick(roster_rng)], cfg.k_final, std::nullopt, {}};
    if (cfg.k_max) {
        Rng k_rng(derive_seed(cfg.seed, stream::candidate_k, run_index));
        const int hi = std::min<int>(*cfg.k_max, static_cast<int>(data.n()));
        c.k = std::uniform_int_distribution<int>(2, std::max(2, hi))(k_rng);
    }
    ClustererConfig cc = cfg.clusterer;
    cc.algorithm = c.algorithm;
    cc.k = c.k;
    cc.seed = derive_seed(cfg.seed, stream::clusterer, run_index);
    try {
        c.run = run_clusterer(data, cc);
    } catch (const DegenerateSpectrum& e) {
        c.error = e.what();
    }
    return c;
}

}  // namespace detail

/// Cluster ensemble selection. Candidates are drawn from the roster in run-index
/// order and admitted through the diversity gate until the committee reaches its
/// target size or the attempt budget runs out; the closed committee is weighted,
/// fused by (w)eac and cut at k_final by average linkage.
inline Partition run_ces(const Dataset& data, const PipelineConfig& cfg, RunReport* report = nullptr) {
    if (cfg.k_final < 2) throw InvalidK("k_final must be at least 2");
    if (cfg.committee_target < 2) throw std::invalid_argument("committee target must be at least 2");
    if (cfg.max_attempts < cfg.committee_target) throw std::invalid_argument("max_attempts must be at least the committee target");
    if (cfg.roster.empty()) throw std::invalid_argument("algorithm roster is empty");
    if (!(cfg.dT >= 0.0 && cfg.dT <= 1.0)) throw std::invalid_argument("dT must lie in [0, 1]");
    if (static_cast<std::size_t>(cfg.k_final) > data.n()) throw InvalidK("k_final exceeds sample count");
    if (cfg.consensus == ConsensusMode::Weac)
        for (const auto& id : cfg.roster) cfg.aidm.index_of(id);

    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count(); };

    RunReport local;
    RunReport& rep = report ? *report : local;
    rep = RunReport{};
    rep.config = config_json(cfg);

    std::vector<CommitteeEntry> committee;
    std::vector<Partition> members;
    const std::size_t batch = std::max<std::size_t>(1, cfg.workers);
    std::size_t next = 0;
    bool done = false;
    while (!done && next < cfg.max_attempts) {
        const std::size_t count = std::min(batch, cfg.max_attempts - next);
        std::vector<detail::Candidate> candidates;
        if (count == 1) {
            candidates.push_back(detail::generate(data, cfg, next));
        } else {
            std::vector<std::future<detail::Candidate>> futures;
            for (std::size_t i = 0; i < count; ++i)
                futures.push_back(std::async(std::launch::async, detail::generate, std::cref(data), std::cref(cfg), next + i));
            for (auto& f : futures) candidates.push_back(f.get());
        }
        next += count;

        for (auto& c : candidates) {
            AttemptRecord rec{c.run_index, c.algorithm, c.k};
            ++rep.attempts;
            if (!c.run) {
                rec.failed = true;
                rec.error = c.error;
            } else {
                const auto gate = diversity::admit(c.run->partition, members, cfg.dT);
                rec.admitted = gate.admitted;
                rec.div = gate.div;
                if (gate.admitted) {
                    members.push_back(c.run->partition);
                    committee.push_back({std::move(c.run->partition), c.algorithm, std::move(c.run->params), gate.div, c.run_index});
                }
            }
            rep.trace.push_back(std::move(rec));
            if (committee.size() >= cfg.committee_target) {
                done = true;
                break;
            }
        }
        if (cfg.time_budget_ms && elapsed_ms() > *cfg.time_budget_ms) break;
    }

    rep.nce = committee.size();
    if (committee.size() < 2) throw CommitteeTooSmall(committee.size());

    std::vector<double> weights(committee.size(), 1.0);
    if (cfg.consensus == ConsensusMode::Weac) weights = independency::ai_weights(committee, cfg.aidm);
    const auto coassoc = weac(committee, weights);
    rep.final_partition = cut(average_linkage(coassoc), static_cast<std::size_t>(cfg.k_final));

    for (std::size_t p = 0; p < committee.size(); ++p)
        rep.per_entry.push_back({committee[p].algorithm, committee[p].run_index, committee[p].partition.k(), weights[p],
                                 committee[p].diversity_at_admission});
    rep.wall_time_ms = elapsed_ms();
    return rep.final_partition;
}

}  // namespace ces::consensus
