#include "gpfs/commands.hpp"

#include "gpfs/verify.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>

namespace gpfs {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    }
    out << text;
}

DatasetIndex prepare_dataset(const RunConfig& config, const std::filesystem::path& out_dir) {
    if (config.synthetic) {
        return synth_dataset(*config.synthetic, derive_seed(config.seed, 0xDA7A), out_dir / "dataset");
    }
    return read_index(*config.index_path);
}

std::size_t feature_dim(const DatasetIndex& index) {
    if (index.entries.empty()) {
        throw Error(ErrorKind::InvalidConfig, "dataset has no images");
    }
    return fmap_read(index.resolve(index.entries.front().features)).d;
}

json episode_json(const EpisodeReport& r) {
    return {{"class", r.class_id},
            {"query", r.query_id},
            {"support", r.support_ids},
            {"intersection", r.counts.intersection},
            {"union", r.counts.union_},
            {"mean_variance", r.mean_variance},
            {"max_variance", r.max_variance},
            {"jitter", r.jitter}};
}

}  // namespace

int cmd_run(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
    config.validate();
    std::filesystem::create_directories(out_dir);
    const DatasetIndex index = prepare_dataset(config, out_dir);
    for (std::size_t f : config.folds) {
        if (f >= index.folds.size()) throw ConfigError("folds", "fold " + std::to_string(f) + " does not exist");
    }
    const std::size_t dim = feature_dim(index);
    const PipelineConfig pipeline = config.pipeline_for(dim);

    std::vector<SweepResult> sweeps;
    for (std::size_t f : config.folds) {
        sweeps.push_back(shots_sweep(index, f, config.shots, config.episodes_per_shot, pipeline,
                                     derive_seed(config.seed, 0xF000 + f), config.sampling, config.workers));
    }

    json resolved = config_to_json(config, dim);
    resolved.erase("workers");  // execution detail; results do not depend on it

    json report;
    report["config"] = resolved;
    report["readout"] = {{"rule", "foreground iff mean > threshold, ties to background"},
                         {"threshold", config.threshold}};
    report["iou_resolution"] = config.downsample_query ? "query feature grid, downsampled by 2"
                                                       : "query feature grid";
    report["folds"] = json::array();
    json timings;
    timings["folds"] = json::array();

    std::string csv = "shots,miou,mean_variance\n";
    report["sweep"] = json::array();
    for (std::size_t s = 0; s < config.shots.size(); ++s) {
        std::vector<double> fold_miou;
        std::vector<double> fold_var;
        for (const auto& sweep : sweeps) {
            fold_miou.push_back(sweep.rows[s].miou);
            fold_var.push_back(sweep.rows[s].mean_variance);
        }
        const double m = mean_over_folds(fold_miou);
        const double v = mean_over_folds(fold_var);
        csv += std::to_string(config.shots[s]) + "," + format("%.6f", m) + "," + format("%.9g", v) + "\n";
        report["sweep"].push_back({{"shots", config.shots[s]}, {"miou", m}, {"mean_variance", v}});
    }

    for (const auto& sweep : sweeps) {
        json fold_doc = {{"fold", sweep.fold}, {"rows", json::array()}};
        json fold_times = {{"fold", sweep.fold}, {"rows", json::array()}};
        for (const auto& row : sweep.rows) {
            json per_class = json::array();
            for (const auto& [c, counts] : row.accumulator.counts()) {
                per_class.push_back({{"class", c},
                                     {"intersection", counts.intersection},
                                     {"union", counts.union_},
                                     {"iou", counts.ratio()}});
            }
            json episodes = json::array();
            json times = json::array();
            double fit_sum = 0.0;
            double predict_sum = 0.0;
            double total_sum = 0.0;
            for (const auto& ep : row.episodes) {
                episodes.push_back(episode_json(ep));
                times.push_back({{"fit_ms", ep.fit_ms}, {"predict_ms", ep.predict_ms}, {"total_ms", ep.total_ms}});
                fit_sum += ep.fit_ms;
                predict_sum += ep.predict_ms;
                total_sum += ep.total_ms;
            }
            const double n = static_cast<double>(std::max<std::size_t>(1, row.episodes.size()));
            fold_doc["rows"].push_back({{"shots", row.shots},
                                        {"miou", row.miou},
                                        {"mean_variance", row.mean_variance},
                                        {"per_class", per_class},
                                        {"episodes", episodes}});
            fold_times["rows"].push_back({{"shots", row.shots},
                                          {"mean_fit_ms", fit_sum / n},
                                          {"mean_predict_ms", predict_sum / n},
                                          {"mean_total_ms", total_sum / n},
                                          {"episodes", times}});
        }
        report["folds"].push_back(std::move(fold_doc));
        timings["folds"].push_back(std::move(fold_times));
    }

    write_text(out_dir / config.sweep_file, csv);
    write_text(out_dir / config.report_file, report.dump(2) + "\n");
    write_text(out_dir / config.timings_file, timings.dump(2) + "\n");
    log << csv;
    return 0;
}

std::vector<BenchRow> run_bench(const RunConfig& config) {
    config.validate();
    const BenchConfig& b = config.bench;
    const KernelSpec spec = config.kernel_for(b.dim);
    std::vector<BenchRow> rows;
    for (std::size_t shots : b.shots) {
        BenchRow row;
        row.shots = shots;
        row.n_support = shots * b.grid * b.grid;
        row.n_query = b.queries;
        row.dim = b.dim;
        row.repetitions = b.repetitions;

        Rng rng(derive_seed(config.seed, shots));
        // Scaled so that typical squared distances are comparable to ℓ².
        const double scale = 0.2;
        Matrix xs(row.n_support, b.dim);
        for (double& v : xs.data()) v = scale * rng.normal();
        Matrix ys(row.n_support, 1);
        for (double& v : ys.data()) v = rng.uniform();
        Matrix xq(row.n_query, b.dim);
        for (double& v : xq.data()) v = scale * rng.normal();
        const FeatureSet support(std::move(xs));
        const FeatureSet query(std::move(xq));

        double fit_total = 0.0;
        double predict_total = 0.0;
        for (std::size_t rep = 0; rep < b.repetitions; ++rep) {
            const auto t0 = Clock::now();
            const GPModel model = fit(spec, config.noise_sq, support, ys);
            const auto t1 = Clock::now();
            const Posterior post = predict(model, query);
            const auto t2 = Clock::now();
            fit_total += std::chrono::duration<double, std::milli>(t1 - t0).count();
            predict_total += std::chrono::duration<double, std::milli>(t2 - t1).count();
            if (post.mean.rows() != row.n_query) {
                throw Error(ErrorKind::DimensionMismatch, "benchmark produced a malformed posterior");
            }
        }
        row.fit_ms = fit_total / static_cast<double>(b.repetitions);
        row.predict_ms = predict_total / static_cast<double>(b.repetitions);
        rows.push_back(row);
    }
    return rows;
}

int cmd_bench(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
    const std::vector<BenchRow> rows = run_bench(config);
    std::filesystem::create_directories(out_dir);

    char line[160];
    std::snprintf(line, sizeof line, "%-28s", "phase [ms]");
    log << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%20s", (std::to_string(r.shots) + "-shot (n=" + std::to_string(r.n_support) + ")").c_str());
        log << line;
    }
    log << '\n';
    auto print_phase = [&](const char* name, auto field) {
        std::snprintf(line, sizeof line, "%-28s", name);
        log << line;
        for (const auto& r : rows) {
            std::snprintf(line, sizeof line, "%20.3f", r.*field);
            log << line;
        }
        log << '\n';
    };
    print_phase("GP preparation on support", &BenchRow::fit_ms);
    print_phase("GP inference on query", &BenchRow::predict_ms);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::snprintf(line, sizeof line, "fit time ratio n=%zu -> n=%zu: %.2f\n", rows[i - 1].n_support,
                      rows[i].n_support, rows[i].fit_ms / rows[i - 1].fit_ms);
        log << line;
    }

    std::string csv = "shots,n_support,n_query,dim,repetitions,fit_ms,predict_ms\n";
    for (const auto& r : rows) {
        csv += std::to_string(r.shots) + "," + std::to_string(r.n_support) + "," + std::to_string(r.n_query) + "," +
               std::to_string(r.dim) + "," + std::to_string(r.repetitions) + "," + format("%.4f", r.fit_ms) + "," +
               format("%.4f", r.predict_ms) + "\n";
    }
    write_text(out_dir / "bench.csv", csv);
    return 0;
}

int cmd_verify(const RunConfig& config, std::ostream& log) {
    const auto results = verify::run_suite(config.verify.instances, config.seed);
    bool all = true;
    char line[256];
    for (const auto& r : results) {
        all = all && r.passed;
        std::snprintf(line, sizeof line, "%s %-32s checked=%zu worst=%.3e tol=%.1e", r.passed ? "PASS" : "FAIL",
                      r.name.c_str(), r.checked, r.worst, r.tolerance);
        log << line;
        if (r.failing_seed) log << " seed=" << *r.failing_seed;
        if (!r.detail.empty()) log << " (" << r.detail << ")";
        log << '\n';
    }
    return all ? 0 : 1;
}

int cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
    config.validate();
    if (!config.synthetic) {
        throw ConfigError("dataset", "synth needs a synthetic dataset config");
    }
    const DatasetIndex index = synth_dataset(*config.synthetic, derive_seed(config.seed, 0xDA7A), out_dir);
    log << "wrote " << index.entries.size() << " images in " << index.folds.size() << " folds to "
        << out_dir.string() << '\n';
    return 0;
}

}  // namespace gpfs
