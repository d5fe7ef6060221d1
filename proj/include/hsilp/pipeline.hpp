#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsilp/cube.hpp"
#include "hsilp/metrics.hpp"
#include "hsilp/noise.hpp"
#include "hsilp/propagation.hpp"

namespace hsilp {

enum class LabelingMode { ground_truth, clustering };

/// Everything a run needs. Presets fill the published per-scene defaults;
/// explicit flags and config-file keys override them.
struct RunConfig {
    std::string cube_path;
    std::string labels_path;

    Eigen::Index d = 30;         // PCA dims
    std::size_t theta = 3000;    // pixels per slice
    double sigma2 = 0.2;         // Gaussian kernel bandwidth
    Eigen::Index k = 1000;       // top-k pruning
    double alpha = 0.99;
    PropagationMode mode = PropagationMode::closed_form;
    double tol = 1e-6;
    int max_iter = 1000;

    LabelingMode labeling = LabelingMode::ground_truth;
    int samples_per_class = 5;   // s (ground-truth mode)
    Eigen::Index m = 80;         // anchor count (clustering mode)
    int c = 0;                   // cluster count, 0 -> truth class count
    double beta = 30.0;
    int h = 0;                   // 0 -> min(25, m-1)
    int cluster_max_iter = 50;   // t2
    bool beta_adapt = true;

    NoiseSpec noise;
    std::uint64_t seed = 0;
    int workers = 0;             // 0 -> hardware concurrency
    bool classify_all = false;   // also classify background pixels

    std::string out_map;
    std::string out_report;
    std::string out_preview;
    std::string graph_dump_prefix;

    void validate() const;
    int effective_workers() const;
};

/// Published per-scene parameter defaults.
void apply_preset(RunConfig& config, const std::string& name);

/// Line-oriented "key = value" text with # comments; unknown keys are errors.
void load_config_file(RunConfig& config, const std::string& path);

struct StageTime {
    std::string name;
    double seconds = 0.0;
};

struct RunReport {
    int schema_version = 1;
    std::map<std::string, std::string> config;   // echoed configuration
    std::size_t pixels = 0;                      // n
    Eigen::Index anchors = 0;                    // m
    int classes = 0;                             // c
    std::size_t slices = 0;
    bool converged = true;
    std::vector<std::string> warnings;
    std::vector<StageTime> stage_times;

    std::vector<Eigen::Index> anchor_rows;       // SpectraMatrix rows
    std::vector<std::uint32_t> anchor_raster;    // linear raster indices
    Eigen::MatrixXd anchor_features;
    Eigen::MatrixXd anchor_labels;               // U

    std::optional<ClassificationMetrics> classification;
    std::optional<ClusteringMetrics> clustering;
    std::vector<double> clustering_objective;    // per-iteration trace
    std::optional<double> clustering_beta;

    std::string to_json(bool include_timings = true) const;
};

struct PipelineResult {
    RunReport report;
    std::vector<std::uint16_t> map;  // h*w class ids, 0 = unclassified
    HsiCube source;                  // normalized (and noise-injected) cube
};

/// Full run on an in-memory cube: normalize -> noise -> PCA -> anchors ->
/// anchor labels -> per-slice two-stage propagation -> metrics.
PipelineResult run_pipeline_on(const HsiCube& cube, const RunConfig& config);

/// File-level entry: loads inputs, runs, writes map/report/preview artifacts.
PipelineResult run_pipeline(const RunConfig& config);

struct BenchRow {
    std::string label;
    std::size_t pixels = 0;
    int workers = 1;
    double total_seconds = 0.0;                  // median over repeats
    std::map<std::string, double> stage_seconds; // median per stage
};

/// Repeats run_pipeline_on and reports the median wall time per stage.
BenchRow bench_run(const HsiCube& cube, const RunConfig& config, int repeats,
                   const std::string& label);

std::string format_bench_table(const std::vector<BenchRow>& rows);

}  // namespace hsilp
