#pragma once

// Dataset I/O, synthetic data, evaluation and the experiment protocols (repeated
// runs against baselines, diversity-threshold sweeps, missing-value and noise
// perturbation schedules).

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ces/assignment.hpp"
#include "ces/clusterers.hpp"
#include "ces/consensus.hpp"
#include "ces/error.hpp"
#include "ces/io.hpp"
#include "ces/rng.hpp"
#include "ces/types.hpp"

namespace ces::harness {

/// Parses a CSV with a header row. Empty fields are missing values; the column named
/// `label_column` (if any) holds class names. The result is preprocessed.
inline Dataset parse_csv(std::string_view text, const std::optional<std::string>& label_column = std::nullopt) {
    const auto rows = io::lines(text);
    if (rows.empty()) throw ParseError(1, 1, "missing header row");
    std::vector<std::string> header;
    for (const auto& h : io::split(rows[0], ',')) header.emplace_back(io::trim(h));

    std::optional<std::size_t> label_idx;
    if (label_column) {
        const auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end()) throw DataError("label column '" + *label_column + "' not found");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }
    Dataset data;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_idx) data.feature_names.push_back(header[c]);

    std::vector<std::vector<double>> values;
    std::vector<int> labels;
    std::map<std::string, int> classes;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (io::trim(rows[r]).empty()) continue;
        const auto fields = io::split(rows[r], ',');
        if (fields.size() != header.size())
            throw ParseError(r + 1, fields.size(), "expected " + std::to_string(header.size()) + " fields");
        std::vector<double> row;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto field = io::trim(fields[c]);
            if (c == label_idx) {
                auto [it, inserted] = classes.try_emplace(std::string(field), static_cast<int>(classes.size()));
                if (inserted) data.class_names.emplace_back(field);
                labels.push_back(it->second);
                continue;
            }
            if (field.empty()) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            double x = 0.0;
            const auto* first = field.data();
            if (!field.empty() && field.front() == '+') ++first;
            const auto res = std::from_chars(first, field.data() + field.size(), x);
            if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(x))
                throw ParseError(r + 1, c + 1, "'" + std::string(field) + "' is not a number");
            row.push_back(x);
        }
        values.push_back(std::move(row));
    }
    if (values.empty()) throw DataError("no data rows");
    Matrix raw(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(data.feature_names.size()));
    for (std::size_t r = 0; r < values.size(); ++r)
        for (std::size_t c = 0; c < values[r].size(); ++c) raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];

    auto processed = preprocess(raw);
    processed.feature_names = std::move(data.feature_names);
    processed.class_names = std::move(data.class_names);
    if (label_idx) processed.labels = std::move(labels);
    return processed;
}

inline Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column = std::nullopt) {
    return parse_csv(io::read_text_file(path), label_column);
}

inline std::string to_csv(const Dataset& data) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t c = 0; c < data.d(); ++c)
        out << (c ? "," : "") << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c));
    if (data.labels) out << ",label";
    out << "\n";
    for (std::size_t r = 0; r < data.n(); ++r) {
        for (std::size_t c = 0; c < data.d(); ++c) out << (c ? "," : "") << data.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (data.labels) {
            const int l = (*data.labels)[r];
            out << "," << (static_cast<std::size_t>(l) < data.class_names.size() ? data.class_names[static_cast<std::size_t>(l)] : std::to_string(l));
        }
        out << "\n";
    }
    return out.str();
}

/// Two interleaved half circles: unit arc over the top, and a second arc shifted by
/// (1, 0.5) and flipped. Gaussian jitter of scale `noise` on every coordinate.
inline Matrix half_ring_raw(std::size_t n, double noise, std::uint64_t seed, std::vector<int>* labels = nullptr) {
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("half ring needs an even sample count >= 4");
    const std::size_t half = n / 2;
    Matrix x(static_cast<Eigen::Index>(n), 2);
    if (labels) labels->assign(n, 0);
    for (std::size_t i = 0; i < half; ++i) {
        const double t = std::numbers::pi * static_cast<double>(i) / static_cast<double>(half - 1);
        x(static_cast<Eigen::Index>(i), 0) = std::cos(t);
        x(static_cast<Eigen::Index>(i), 1) = std::sin(t);
        x(static_cast<Eigen::Index>(half + i), 0) = 1.0 - std::cos(t);
        x(static_cast<Eigen::Index>(half + i), 1) = 0.5 - std::sin(t);
        if (labels) (*labels)[half + i] = 1;
    }
    if (noise > 0.0) {
        Rng rng(seed);
        std::normal_distribution<double> jitter(0.0, noise);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index c = 0; c < 2; ++c) x(i, c) += jitter(rng);
    }
    return x;
}

inline Dataset gen_half_ring(std::size_t n, double noise, std::uint64_t seed) {
    std::vector<int> labels;
    auto data = preprocess(half_ring_raw(n, noise, seed, &labels));
    data.labels = std::move(labels);
    data.feature_names = {"x", "y"};
    data.class_names = {"upper", "lower"};
    return data;
}

/// Percentage of samples on the optimal one-to-one cluster/class matching. Clusters
/// or classes left over when the counts differ score nothing.
inline double accuracy(const Partition& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("prediction and truth differ in length");
    if (truth.empty()) throw std::invalid_argument("accuracy of an empty labelling");
    const auto classes = Partition::from_labels(truth);
    Matrix cost = Matrix::Zero(pred.k(), classes.k());
    for (std::size_t i = 0; i < truth.size(); ++i) cost(pred[i], classes[i]) -= 1.0;
    const auto match = min_cost_assignment(cost);
    double hits = 0.0;
    for (std::size_t r = 0; r < match.size(); ++r)
        if (match[r] >= 0) hits -= cost(static_cast<Eigen::Index>(r), match[r]);
    return 100.0 * hits / static_cast<double>(truth.size());
}

/// Sorted flat indices (row * d + col) of round(rate * n * d) distinct cells.
inline std::vector<std::size_t> perturbation_mask(std::size_t n, std::size_t d, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("perturbation rate must lie in [0, 1)");
    const auto cells = n * d;
    const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(cells)));
    std::vector<std::size_t> all(cells);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, cells - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
}

/// Marks the masked cells missing, then re-imputes and re-standardizes.
inline Dataset inject_missing(const Dataset& data, double rate, std::uint64_t seed) {
    const auto mask = perturbation_mask(data.n(), data.d(), rate, seed);
    if (mask.empty()) return data;
    Matrix raw = data.samples;
    for (auto cell : mask) raw(static_cast<Eigen::Index>(cell / data.d()), static_cast<Eigen::Index>(cell % data.d())) = std::numeric_limits<double>::quiet_NaN();
    auto out = preprocess(raw);
    out.labels = data.labels;
    out.feature_names = data.feature_names;
    out.class_names = data.class_names;
    return out;
}

/// Replaces the masked cells with standard normal draws.
inline Dataset inject_noise(const Dataset& data, double rate, std::uint64_t seed) {
    const auto mask = perturbation_mask(data.n(), data.d(), rate, seed);
    Dataset out = data;
    Rng rng(splitmix64(seed));
    std::normal_distribution<double> draw(0.0, 1.0);
    for (auto cell : mask) out.samples(static_cast<Eigen::Index>(cell / data.d()), static_cast<Eigen::Index>(cell % data.d())) = draw(rng);
    return out;
}

// ---------------------------------------------------------------------------
// Experiments

struct AccuracyResult {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 for a single run
    std::vector<double> runs;
};

inline AccuracyResult summarize(std::vector<double> runs) {
    AccuracyResult r;
    r.runs = std::move(runs);
    if (r.runs.empty()) return r;
    r.mean = std::accumulate(r.runs.begin(), r.runs.end(), 0.0) / static_cast<double>(r.runs.size());
    if (r.runs.size() > 1) {
        double ss = 0.0;
        for (double v : r.runs) ss += (v - r.mean) * (v - r.mean);
        r.stddev = std::sqrt(ss / static_cast<double>(r.runs.size() - 1));
    }
    return r;
}

enum class Perturbation { None, Missing, Noise };

inline std::string to_string(Perturbation p) {
    switch (p) {
        case Perturbation::None: return "none";
        case Perturbation::Missing: return "missing";
        case Perturbation::Noise: return "noise";
    }
    return {};
}

struct ExperimentSpec {
    std::string dataset_name = "dataset";
    Dataset data;  // must carry labels
    consensus::PipelineConfig pipeline;
    std::size_t repetitions = 10;
    std::vector<std::string> methods{"kmeans", "spectral", "eac", "weac"};
    Perturbation perturbation = Perturbation::None;
    std::vector<double> rates{0.0};
    std::vector<double> dt_sweep;  // non-empty switches to a dT sweep of the weac pipeline
    std::size_t jobs = 1;          // repetitions run concurrently
};

/// One (method, perturbation rate or dT) row.
struct ResultRow {
    std::string method;
    double rate = 0.0;
    std::optional<double> dT;
    AccuracyResult accuracy;
    double mean_wall_ms = 0.0;
    double mean_nce = 0.0;
    double attempts_per_admission = 0.0;
    std::size_t failures = 0;  // repetitions ending in CommitteeTooSmall
};

struct ExperimentReport {
    std::string dataset;
    std::size_t repetitions = 0;
    std::string perturbation;
    std::vector<ResultRow> rows;
    nlohmann::json pipeline;
};

namespace detail {

struct RepOutcome {
    double accuracy = 0.0;
    double wall_ms = 0.0;
    double nce = 0.0;
    std::size_t attempts = 0;  // kept for failed runs too
    std::size_t admissions = 0;
    bool failed = false;
};

inline RepOutcome run_method(const std::string& method, const Dataset& data, const consensus::PipelineConfig& base, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    RepOutcome out;
    const auto& truth = *data.labels;
    if (method == "kmeans" || method == "spectral") {
        ClustererConfig cc = base.clusterer;
        cc.algorithm = method == "kmeans" ? "K" : "SPS";
        cc.k = base.k_final;
        cc.seed = seed;
        out.accuracy = accuracy(run_clusterer(data, cc).partition, truth);
    } else if (method == "eac" || method == "weac") {
        auto cfg = base;
        cfg.seed = seed;
        if (method == "eac") {
            // Plain evidence accumulation: no selection, unit weights.
            cfg.consensus = consensus::ConsensusMode::Eac;
            cfg.dT = 0.0;
        } else {
            cfg.consensus = consensus::ConsensusMode::Weac;
        }
        consensus::RunReport report;
        try {
            out.accuracy = accuracy(consensus::run_ces(data, cfg, &report), truth);
            out.nce = static_cast<double>(report.nce);
        } catch (const CommitteeTooSmall&) {
            out.failed = true;
        }
        out.attempts = report.attempts;
        out.admissions = report.nce;
    } else {
        throw std::invalid_argument("unknown method '" + method + "'");
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

inline ResultRow run_row(const ExperimentSpec& spec, const std::string& method, double rate, const consensus::PipelineConfig& pipeline,
                         std::optional<double> dT) {
    auto rep = [&](std::size_t r) {
        const auto seed = derive_seed(spec.pipeline.seed, stream::repetition, r);
        Dataset data = spec.data;
        const auto pseed = derive_seed(spec.pipeline.seed, stream::perturbation, r);
        if (spec.perturbation == Perturbation::Missing) data = inject_missing(spec.data, rate, pseed);
        if (spec.perturbation == Perturbation::Noise) data = inject_noise(spec.data, rate, pseed);
        return run_method(method, data, pipeline, seed);
    };
    std::vector<RepOutcome> outcomes(spec.repetitions);
    if (spec.jobs <= 1) {
        for (std::size_t r = 0; r < spec.repetitions; ++r) outcomes[r] = rep(r);
    } else {
        for (std::size_t first = 0; first < spec.repetitions; first += spec.jobs) {
            std::vector<std::future<RepOutcome>> futures;
            for (std::size_t r = first; r < std::min(spec.repetitions, first + spec.jobs); ++r) futures.push_back(std::async(std::launch::async, rep, r));
            for (std::size_t i = 0; i < futures.size(); ++i) outcomes[first + i] = futures[i].get();
        }
    }
    ResultRow row{method, rate, dT, {}, 0.0, 0.0, 0.0, 0};
    std::vector<double> acc;
    std::size_t ok = 0, attempts = 0, admissions = 0;
    for (const auto& o : outcomes) {
        row.mean_wall_ms += o.wall_ms / static_cast<double>(outcomes.size());
        attempts += o.attempts;
        admissions += o.admissions;
        if (o.failed) {
            ++row.failures;
            continue;
        }
        ++ok;
        acc.push_back(o.accuracy);
        row.mean_nce += o.nce;
    }
    if (ok > 0) row.mean_nce /= static_cast<double>(ok);
    // Pooled over all repetitions, failed ones included, so hard thresholds are not
    // hidden by dropping the runs they starve.
    if (admissions > 0) row.attempts_per_admission = static_cast<double>(attempts) / static_cast<double>(admissions);
    row.accuracy = summarize(std::move(acc));
    return row;
}

}  // namespace detail

/// Repetition r of every method uses the same derived seed, so methods see the same
/// candidate stream and the same perturbation.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
    if (!spec.data.labels) throw DataError("experiments need labelled data");
    if (spec.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    ExperimentReport report{spec.dataset_name, spec.repetitions, to_string(spec.perturbation), {}, consensus::config_json(spec.pipeline)};
    if (!spec.dt_sweep.empty()) {
        for (double dT : spec.dt_sweep) {
            auto cfg = spec.pipeline;
            cfg.dT = dT;
            report.rows.push_back(detail::run_row(spec, "weac", 0.0, cfg, dT));
        }
        return report;
    }
    const auto rates = spec.perturbation == Perturbation::None ? std::vector<double>{0.0} : spec.rates;
    for (double rate : rates)
        for (const auto& method : spec.methods) report.rows.push_back(detail::run_row(spec, method, rate, spec.pipeline, std::nullopt));
    return report;
}

inline nlohmann::json to_json(const ExperimentReport& r, bool include_timing = true) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json j{{"method", row.method},
                         {"rate", row.rate},
                         {"accuracy_mean", row.accuracy.mean},
                         {"accuracy_std", row.accuracy.stddev},
                         {"accuracy_runs", row.accuracy.runs},
                         {"mean_nce", row.mean_nce},
                         {"attempts_per_admission", row.attempts_per_admission},
                         {"failures", row.failures}};
        if (row.dT) j["dT"] = *row.dT;
        if (include_timing) j["mean_wall_ms"] = row.mean_wall_ms;
        rows.push_back(std::move(j));
    }
    return {{"dataset", r.dataset}, {"repetitions", r.repetitions}, {"perturbation", r.perturbation}, {"pipeline", r.pipeline}, {"results", rows}};
}

/// One line per row: dataset, method, rate, dT, mean, std, wall time, committee size.
inline std::string to_csv(const ExperimentReport& r) {
    std::ostringstream out;
    out << "dataset,method,perturbation,rate,dT,accuracy_mean,accuracy_std,mean_wall_ms,mean_nce,attempts_per_admission,failures\n";
    out.precision(6);
    out << std::fixed;
    for (const auto& row : r.rows) {
        out << r.dataset << ',' << row.method << ',' << r.perturbation << ',' << row.rate << ',';
        if (row.dT) out << *row.dT;
        out << ',' << row.accuracy.mean << ',' << row.accuracy.stddev << ',' << row.mean_wall_ms << ',' << row.mean_nce << ','
            << row.attempts_per_admission << ',' << row.failures << '\n';
    }
    return out.str();
}

}  // namespace ces::harness
