#pragma once

#include "gpfs/config.hpp"

#include <filesystem>
#include <ostream>
#include <vector>

namespace gpfs {

/// Runs the shots sweep on every configured fold and writes the report, the
/// sweep CSV (shots,miou,mean_variance) and per-episode timings into `out_dir`.
/// report.json and sweep.csv depend only on the config and seed; wall-clock
/// timings go to the separate timings file.
int cmd_run(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

struct BenchRow {
    std::size_t shots = 0;
    std::size_t n_support = 0;
    std::size_t n_query = 0;
    std::size_t dim = 0;
    std::size_t repetitions = 0;
    double fit_ms = 0.0;      // support preparation: Gram, factorization, weights
    double predict_ms = 0.0;  // query inference given the fitted model
};

/// Mean single-threaded fit and predict times on random features, one row per
/// entry of bench.shots (n_support = shots · grid²).
[[nodiscard]] std::vector<BenchRow> run_bench(const RunConfig& config);

int cmd_bench(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Prints one PASS/FAIL line per property; returns 0 iff all pass.
int cmd_verify(const RunConfig& config, std::ostream& log);

int cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace gpfs
