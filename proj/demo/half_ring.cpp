// Minimal end-to-end use of the library: generate a half-ring dataset, run the
// selection pipeline with the reference AIDM and compare against plain k-means.

#include <iostream>

#include "ces/ces.hpp"

int main() {
    using namespace ces;
    const auto data = harness::gen_half_ring(400, 0.05, 7);

    consensus::PipelineConfig cfg;
    cfg.k_final = 2;
    cfg.seed = 42;
    cfg.aidm = independency::load_aidm_csv(CES_DATA_DIR "/aidm_reference.csv");

    consensus::RunReport report;
    const auto result = consensus::run_ces(data, cfg, &report);

    ClustererConfig km{"K", 2, 42};
    std::cout << "committee size: " << report.nce << " after " << report.attempts << " attempts\n"
              << "pipeline accuracy: " << harness::accuracy(result, *data.labels) << "%\n"
              << "k-means accuracy:  " << harness::accuracy(run_kmeans(data, km).partition, *data.labels) << "%\n";
}
