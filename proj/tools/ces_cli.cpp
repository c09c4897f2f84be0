// Command line front end for the cluster ensemble selection toolkit.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ces/ces.hpp"

namespace fs = std::filesystem;
using namespace ces;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPipeline = 3;

struct DataOptions {
    std::string source = "iris";  // iris | half-ring | path to CSV
    std::string label = "species";
    std::size_t n = 400;
    double noise = 0.05;
    std::uint64_t data_seed = 7;
};

struct PipelineOptions {
    int k = 0;  // 0: number of classes in the data
    double dt = 0.0;
    std::size_t committee = 20;
    std::size_t max_attempts = 0;  // 0: 10 x committee
    std::uint64_t seed = 1;
    std::string aidm = "reference";
    std::string consensus = "weac";
    std::string scmt = std::string(CES_DATA_DIR) + "/scmt.tsv";
    std::string cail_dir = std::string(CES_DATA_DIR) + "/cail";
    std::vector<std::string> roster;
    int k_max = 0;
    double time_budget = 0.0;
    std::size_t workers = 1;
};

void add_data_options(CLI::App* app, DataOptions& d) {
    app->add_option("--data", d.source, "iris, half-ring, or a CSV path")->capture_default_str();
    app->add_option("--label", d.label, "class column of a CSV file")->capture_default_str();
    app->add_option("--n", d.n, "half-ring sample count")->capture_default_str();
    app->add_option("--noise", d.noise, "half-ring jitter")->capture_default_str();
    app->add_option("--data-seed", d.data_seed, "half-ring generator seed")->capture_default_str();
}

void add_pipeline_options(CLI::App* app, PipelineOptions& p) {
    app->add_option("--k", p.k, "final cluster count (default: class count)");
    app->add_option("--dt", p.dt, "diversity threshold in [0, 1]")->capture_default_str();
    app->add_option("--committee", p.committee, "target committee size")->capture_default_str();
    app->add_option("--max-attempts", p.max_attempts, "candidate budget (default 10 x committee)");
    app->add_option("--seed", p.seed, "master seed")->capture_default_str();
    app->add_option("--aidm", p.aidm, "reference | computed | path to an AIDM CSV")->capture_default_str();
    app->add_option("--consensus", p.consensus, "weac | eac")->check(CLI::IsMember({"weac", "eac"}))->capture_default_str();
    app->add_option("--scmt", p.scmt, "symbol table for computed AIDMs")->capture_default_str();
    app->add_option("--cail-dir", p.cail_dir, "CAIL scripts for computed AIDMs")->capture_default_str();
    app->add_option("--roster", p.roster, "comma-separated algorithm ids (default: all implemented)")->delimiter(',');
    app->add_option("--k-max", p.k_max, "draw candidate k from [2, k-max]");
    app->add_option("--time-budget", p.time_budget, "candidate generation budget in ms (non-deterministic)");
    app->add_option("--workers", p.workers, "speculative candidate workers")->capture_default_str();
}

Dataset load_data(const DataOptions& d) {
    if (d.source == "iris") return harness::load_csv(fs::path(CES_DATA_DIR) / "iris.csv", std::string("species"));
    if (d.source == "half-ring") return harness::gen_half_ring(d.n, d.noise, d.data_seed);
    return harness::load_csv(d.source, d.label.empty() ? std::nullopt : std::optional<std::string>(d.label));
}

independency::Aidm resolve_aidm(const PipelineOptions& p) {
    if (p.aidm == "reference") return independency::load_aidm_csv(fs::path(CES_DATA_DIR) / "aidm_reference.csv");
    if (p.aidm == "computed") return independency::build_aidm_from_directory(p.cail_dir, cail::Scmt::load(p.scmt));
    return independency::load_aidm_csv(p.aidm);
}

consensus::PipelineConfig make_pipeline(const PipelineOptions& p, const Dataset& data) {
    consensus::PipelineConfig cfg;
    cfg.k_final = p.k > 0 ? p.k : static_cast<int>(data.class_count());
    if (cfg.k_final < 2) throw std::invalid_argument("--k is required when the data has no class labels");
    cfg.dT = p.dt;
    cfg.committee_target = p.committee;
    cfg.max_attempts = p.max_attempts > 0 ? p.max_attempts : 10 * p.committee;
    cfg.seed = p.seed;
    if (!p.roster.empty()) cfg.roster = p.roster;
    cfg.consensus = p.consensus == "eac" ? consensus::ConsensusMode::Eac : consensus::ConsensusMode::Weac;
    cfg.aidm = resolve_aidm(p);
    cfg.aidm_source = p.aidm;
    if (p.k_max > 0) cfg.k_max = p.k_max;
    if (p.time_budget > 0.0) cfg.time_budget_ms = p.time_budget;
    cfg.workers = p.workers;
    return cfg;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        io::write_text_file(out, text);
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    for (const auto& f : io::split(csv, ',')) {
        const auto t = io::trim(f);
        if (!t.empty()) out.push_back(std::stod(std::string(t)));
    }
    return out;
}

void write_experiment(const harness::ExperimentReport& report, const std::string& out) {
    if (out.empty()) {
        std::cout << harness::to_csv(report);
        return;
    }
    io::write_text_file(out + ".json", harness::to_json(report).dump(2) + "\n");
    io::write_text_file(out + ".csv", harness::to_csv(report));
    std::cout << harness::to_csv(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster ensemble selection by diversity and algorithm independency"};
    app.require_subcommand(1);

    DataOptions data_opts;
    PipelineOptions pipe_opts;
    std::string out;

    auto* run = app.add_subcommand("run", "run the selection pipeline once and write a JSON report");
    add_data_options(run, data_opts);
    add_pipeline_options(run, pipe_opts);
    run->add_option("--out", out, "report path (default stdout)");

    std::vector<std::string> methods{"kmeans", "spectral", "eac", "weac"};
    std::size_t reps = 10;
    std::size_t jobs = 1;
    std::string perturb_mode = "none";
    std::string rates = "0";
    auto* baseline = app.add_subcommand("baseline", "repeated runs of the pipeline and baselines (JSON + CSV)");
    add_data_options(baseline, data_opts);
    add_pipeline_options(baseline, pipe_opts);
    baseline->add_option("--methods", methods, "comma-separated: kmeans, spectral, eac, weac")->delimiter(',')->capture_default_str();
    baseline->add_option("--reps", reps, "repetitions")->capture_default_str();
    baseline->add_option("--jobs", jobs, "concurrent repetitions")->capture_default_str();
    baseline->add_option("--perturb", perturb_mode, "none | missing | noise")->check(CLI::IsMember({"none", "missing", "noise"}));
    baseline->add_option("--rates", rates, "comma-separated perturbation rates")->capture_default_str();
    baseline->add_option("--out", out, "output prefix; writes <prefix>.json and <prefix>.csv");

    std::string dts = "0,0.1,0.2,0.3,0.4,0.5";
    auto* sweep = app.add_subcommand("sweep-dt", "accuracy, time and attempts per admission across dT values");
    add_data_options(sweep, data_opts);
    add_pipeline_options(sweep, pipe_opts);
    sweep->add_option("--dts", dts, "comma-separated dT values")->capture_default_str();
    sweep->add_option("--reps", reps, "repetitions")->capture_default_str();
    sweep->add_option("--jobs", jobs, "concurrent repetitions")->capture_default_str();
    sweep->add_option("--out", out, "output prefix; writes <prefix>.json and <prefix>.csv");

    auto* aidm = app.add_subcommand("aidm", "compute the AIDM of a directory of CAIL scripts");
    aidm->add_option("--scmt", pipe_opts.scmt, "symbol table")->capture_default_str();
    aidm->add_option("--cail-dir", pipe_opts.cail_dir, "directory of *.cail scripts")->capture_default_str();
    aidm->add_option("--out", out, "CSV path (default stdout)");

    std::vector<std::string> scripts;
    std::string dot_out;
    auto* cail_cmd = app.add_subcommand("cail", "parse CAIL scripts, print their graph arrays, export DOT");
    cail_cmd->add_option("scripts", scripts, "CAIL files")->required()->check(CLI::ExistingFile);
    cail_cmd->add_option("--scmt", pipe_opts.scmt, "symbol table")->capture_default_str();
    cail_cmd->add_option("--dot", dot_out, "write DOT graphs into this directory ('-' for stdout)");

    auto* gen = app.add_subcommand("gen-data", "write a half-ring dataset as CSV");
    gen->add_option("--n", data_opts.n, "sample count")->capture_default_str();
    gen->add_option("--noise", data_opts.noise, "jitter")->capture_default_str();
    gen->add_option("--seed", data_opts.data_seed, "generator seed")->capture_default_str();
    gen->add_option("--out", out, "CSV path (default stdout)");

    double rate = 0.1;
    std::uint64_t perturb_seed = 1;
    auto* perturb = app.add_subcommand("perturb", "write a copy of a dataset with missing or noisy cells");
    add_data_options(perturb, data_opts);
    perturb->add_option("--mode", perturb_mode, "missing | noise")->required()->check(CLI::IsMember({"missing", "noise"}));
    perturb->add_option("--rate", rate, "fraction of cells in [0, 1)")->capture_default_str();
    perturb->add_option("--seed", perturb_seed, "mask seed")->capture_default_str();
    perturb->add_option("--out", out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) {
            const auto data = load_data(data_opts);
            const auto cfg = make_pipeline(pipe_opts, data);
            consensus::RunReport report;
            consensus::run_ces(data, cfg, &report);
            auto j = consensus::to_json(report);
            if (data.labels) j["accuracy"] = harness::accuracy(report.final_partition, *data.labels);
            emit(out, j.dump(2) + "\n");
        } else if (*baseline || *sweep) {
            harness::ExperimentSpec spec;
            spec.data = load_data(data_opts);
            spec.dataset_name = data_opts.source == "iris" || data_opts.source == "half-ring" ? data_opts.source : fs::path(data_opts.source).stem().string();
            spec.pipeline = make_pipeline(pipe_opts, spec.data);
            spec.repetitions = reps;
            spec.jobs = jobs;
            if (*sweep) {
                spec.dt_sweep = parse_list(dts);
            } else {
                spec.methods = methods;
                spec.perturbation = perturb_mode == "missing" ? harness::Perturbation::Missing
                                    : perturb_mode == "noise" ? harness::Perturbation::Noise
                                                              : harness::Perturbation::None;
                spec.rates = parse_list(rates);
            }
            write_experiment(harness::run_experiment(spec), out);
        } else if (*aidm) {
            emit(out, independency::to_csv(independency::build_aidm_from_directory(pipe_opts.cail_dir, cail::Scmt::load(pipe_opts.scmt))));
        } else if (*cail_cmd) {
            const auto scmt = cail::Scmt::load(pipe_opts.scmt);
            for (const auto& path : scripts) {
                const auto script = cail::load_cail(path, scmt);
                const auto graph = cail::build_graph(script);
                std::cout << script.name << ": " << script.tokens.size() << " tokens, " << graph.nodes.size() << " nodes, "
                          << graph.edges.size() << " edges\n";
                try {
                    for (const auto& cell : cail::to_graph_array(graph).cells) std::cout << "  [" << cail::join_symbols(cell) << "]\n";
                } catch (const EmptyGraph&) {
                    std::cout << "  (no symbols)\n";
                }
                if (dot_out == "-")
                    std::cout << cail::export_dot(graph);
                else if (!dot_out.empty())
                    io::write_text_file(fs::path(dot_out) / (script.name + ".dot"), cail::export_dot(graph));
            }
        } else if (*gen) {
            emit(out, harness::to_csv(harness::gen_half_ring(data_opts.n, data_opts.noise, data_opts.data_seed)));
        } else if (*perturb) {
            const auto data = load_data(data_opts);
            const auto result = perturb_mode == "missing" ? harness::inject_missing(data, rate, perturb_seed) : harness::inject_noise(data, rate, perturb_seed);
            emit(out, harness::to_csv(result));
        }
    } catch (const CommitteeTooSmall& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
    return 0;
}
