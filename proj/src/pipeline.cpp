#include "hsilp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hsilp/anchors.hpp"
#include "hsilp/clustering.hpp"
#include "hsilp/errors.hpp"
#include "hsilp/parallel.hpp"
#include "hsilp/pca.hpp"
#include "hsilp/spectra.hpp"
#include "hsilp/sparse_graph.hpp"

namespace hsilp {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
public:
    explicit StageTimer(std::vector<StageTime>& sink) : sink_(sink) {}

    template <typename Fn>
    auto run(const std::string& name, Fn&& fn) {
        const auto start = Clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(name, start);
        } else {
            auto value = fn();
            record(name, start);
            return value;
        }
    }

private:
    void record(const std::string& name, Clock::time_point start) {
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        for (auto& stage : sink_) {
            if (stage.name == name) {
                stage.seconds += seconds;
                return;
            }
        }
        sink_.push_back({name, seconds});
    }

    std::vector<StageTime>& sink_;
};

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

std::map<std::string, std::string> echo_config(const RunConfig& c) {
    std::map<std::string, std::string> out;
    out["cube"] = c.cube_path;
    out["labels"] = c.labels_path;
    out["d"] = std::to_string(c.d);
    out["theta"] = std::to_string(c.theta);
    out["sigma2"] = format_double(c.sigma2);
    out["k"] = std::to_string(c.k);
    out["alpha"] = format_double(c.alpha);
    out["mode"] = c.mode == PropagationMode::closed_form ? "closed-form" : "iterative";
    out["tol"] = format_double(c.tol);
    out["max-iter"] = std::to_string(c.max_iter);
    out["labeling"] = c.labeling == LabelingMode::ground_truth ? "ground-truth" : "clustering";
    out["samples-per-class"] = std::to_string(c.samples_per_class);
    out["m"] = std::to_string(c.m);
    out["c"] = std::to_string(c.c);
    out["beta"] = format_double(c.beta);
    out["h"] = std::to_string(c.h);
    out["cluster-max-iter"] = std::to_string(c.cluster_max_iter);
    out["beta-adapt"] = c.beta_adapt ? "1" : "0";
    out["noise"] = to_string(c.noise.model);
    out["noise-scale"] = format_double(c.noise.scale);
    out["seed"] = std::to_string(c.seed);
    out["workers"] = std::to_string(c.workers);
    out["classify-all"] = c.classify_all ? "1" : "0";
    return out;
}

/// Stratified draw of `s` feature rows per class (half of `s`, at least one,
/// when a class has fewer than `s` annotated pixels).
struct StratifiedSample {
    std::vector<Eigen::Index> rows;
    std::vector<int> class_ids;  // 0-based
};

StratifiedSample sample_per_class(const std::vector<int>& truth0, int num_classes, int s,
                                  std::uint64_t seed) {
    std::vector<std::vector<Eigen::Index>> buckets(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < truth0.size(); ++i)
        if (truth0[i] >= 0) buckets[std::size_t(truth0[i])].push_back(Eigen::Index(i));

    std::mt19937_64 rng(seed);
    StratifiedSample out;
    for (int c = 0; c < num_classes; ++c) {
        auto& bucket = buckets[std::size_t(c)];
        if (bucket.empty())
            throw Error(ErrorCode::invalid_argument,
                        "class " + std::to_string(c + 1) + " has no annotated pixels");
        std::shuffle(bucket.begin(), bucket.end(), rng);
        std::size_t take = std::size_t(s);
        if (bucket.size() < take) take = std::max<std::size_t>(1, std::size_t((s + 1) / 2));
        take = std::min(take, bucket.size());
        std::vector<Eigen::Index> chosen(bucket.begin(), bucket.begin() + std::ptrdiff_t(take));
        std::sort(chosen.begin(), chosen.end());  // row order independent of shuffle layout
        for (Eigen::Index r : chosen) {
            out.rows.push_back(r);
            out.class_ids.push_back(c);
        }
    }
    return out;
}

nlohmann::json metrics_json(const ClassificationMetrics& m) {
    nlohmann::json j;
    j["oa"] = m.oa;
    j["aa"] = m.aa;
    j["kappa"] = m.kappa;
    j["per_class"] = m.per_class;
    j["empty_class"] = std::vector<int>(m.empty_class.begin(), m.empty_class.end());
    return j;
}

nlohmann::json metrics_json(const ClusteringMetrics& m) {
    nlohmann::json j;
    j["acc"] = m.acc;
    j["kappa"] = m.kappa;
    j["nmi"] = m.nmi;
    j["purity"] = m.purity;
    j["ari"] = m.ari;
    j["f_score"] = m.f_score;
    j["assignment"] = m.assignment;
    return j;
}

}  // namespace

void RunConfig::validate() const {
    if (d < 1) throw Error(ErrorCode::invalid_argument, "d must be at least 1");
    if (theta < 1) throw Error(ErrorCode::invalid_argument, "theta must be at least 1");
    if (sigma2 <= 0.0) throw Error(ErrorCode::invalid_argument, "sigma2 must be positive");
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::invalid_argument, "alpha must lie in (0, 1)");
    if (tol <= 0.0) throw Error(ErrorCode::invalid_argument, "tol must be positive");
    if (max_iter < 1) throw Error(ErrorCode::invalid_argument, "max-iter must be at least 1");
    if (samples_per_class < 1)
        throw Error(ErrorCode::invalid_argument, "samples-per-class must be at least 1");
    if (m < 1) throw Error(ErrorCode::invalid_argument, "m must be at least 1");
    if (beta <= 0.0) throw Error(ErrorCode::invalid_argument, "beta must be positive");
    if (h < 0) throw Error(ErrorCode::invalid_argument, "h cannot be negative");
    if (c < 0) throw Error(ErrorCode::invalid_argument, "c cannot be negative");
    if (cluster_max_iter < 1)
        throw Error(ErrorCode::invalid_argument, "cluster-max-iter must be at least 1");
    if (noise.scale < 0.0)
        throw Error(ErrorCode::invalid_argument, "noise scale cannot be negative");
    if (workers < 0) throw Error(ErrorCode::invalid_argument, "workers cannot be negative");
}

int RunConfig::effective_workers() const {
    return workers == 0 ? default_workers() : workers;
}

void apply_preset(RunConfig& config, const std::string& name) {
    if (name == "indian-pines" || name == "ip") {
        config.d = 30;
        config.theta = 3000;
        config.sigma2 = 0.2;
        config.k = 1000;
        config.m = 80;
        config.samples_per_class = 5;
        config.h = 25;
    } else if (name == "salinas") {
        config.d = 40;
        config.theta = 4000;
        config.sigma2 = 1.0;
        config.k = 500;
        config.m = 80;
        config.samples_per_class = 5;
        config.beta = 35.0;
        config.h = 25;
    } else if (name == "pavia" || name == "pavia-university") {
        config.d = 50;
        config.theta = 4000;
        config.sigma2 = 2.0;
        config.k = 500;
        config.m = 45;
        config.samples_per_class = 5;
        config.beta = 25.0;
        config.h = 110;  // published value; exceeds m and must be lowered to cluster
    } else {
        throw Error(ErrorCode::invalid_argument, "unknown preset '" + name + "'");
    }
}

void load_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::invalid_argument,
                        path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        try {
            if (key == "preset") apply_preset(config, value);
            else if (key == "cube") config.cube_path = value;
            else if (key == "labels") config.labels_path = value;
            else if (key == "d") config.d = std::stol(value);
            else if (key == "theta") config.theta = std::stoul(value);
            else if (key == "sigma2") config.sigma2 = std::stod(value);
            else if (key == "k") config.k = std::stol(value);
            else if (key == "alpha") config.alpha = std::stod(value);
            else if (key == "mode") {
                if (value == "closed-form") config.mode = PropagationMode::closed_form;
                else if (value == "iterative") config.mode = PropagationMode::iterative;
                else throw Error(ErrorCode::invalid_argument, "unknown mode '" + value + "'");
            }
            else if (key == "tol") config.tol = std::stod(value);
            else if (key == "max-iter") config.max_iter = std::stoi(value);
            else if (key == "labeling") {
                if (value == "ground-truth") config.labeling = LabelingMode::ground_truth;
                else if (value == "clustering") config.labeling = LabelingMode::clustering;
                else throw Error(ErrorCode::invalid_argument, "unknown labeling '" + value + "'");
            }
            else if (key == "samples-per-class") config.samples_per_class = std::stoi(value);
            else if (key == "m") config.m = std::stol(value);
            else if (key == "c") config.c = std::stoi(value);
            else if (key == "beta") config.beta = std::stod(value);
            else if (key == "h") config.h = std::stoi(value);
            else if (key == "cluster-max-iter") config.cluster_max_iter = std::stoi(value);
            else if (key == "beta-adapt") config.beta_adapt = value == "1" || value == "true";
            else if (key == "noise") config.noise.model = parse_noise_model(value);
            else if (key == "noise-scale") config.noise.scale = std::stod(value);
            else if (key == "seed") config.seed = std::stoull(value);
            else if (key == "workers") config.workers = std::stoi(value);
            else if (key == "classify-all") config.classify_all = value == "1" || value == "true";
            else if (key == "out-map") config.out_map = value;
            else if (key == "out-report") config.out_report = value;
            else if (key == "out-preview") config.out_preview = value;
            else if (key == "graph-dump") config.graph_dump_prefix = value;
            else
                throw Error(ErrorCode::invalid_argument,
                            path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::invalid_argument,
                        path + ":" + std::to_string(line_no) + ": bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw Error(ErrorCode::invalid_argument,
                        path + ":" + std::to_string(line_no) + ": value out of range for '" + key + "'");
        }
    }
}

std::string RunReport::to_json(bool include_timings) const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["config"] = config;
    j["pixels"] = pixels;
    j["anchors"] = anchors;
    j["classes"] = classes;
    j["slices"] = slices;
    j["converged"] = converged;
    j["warnings"] = warnings;
    if (include_timings) {
        nlohmann::json stages = nlohmann::json::array();
        for (const auto& stage : stage_times)
            stages.push_back({{"name", stage.name}, {"seconds", stage.seconds}});
        j["stage_times"] = stages;
    }

    nlohmann::json anchors_j;
    anchors_j["rows"] = anchor_rows;
    anchors_j["raster"] = anchor_raster;
    std::vector<std::vector<double>> features(static_cast<std::size_t>(anchor_features.rows()));
    for (Eigen::Index i = 0; i < anchor_features.rows(); ++i) {
        features[std::size_t(i)].assign(anchor_features.row(i).begin(),
                                        anchor_features.row(i).end());
    }
    anchors_j["features"] = features;
    std::vector<std::vector<double>> labels(static_cast<std::size_t>(anchor_labels.rows()));
    for (Eigen::Index i = 0; i < anchor_labels.rows(); ++i)
        labels[std::size_t(i)].assign(anchor_labels.row(i).begin(), anchor_labels.row(i).end());
    anchors_j["labels"] = labels;
    j["anchor_set"] = anchors_j;

    if (classification) j["classification"] = metrics_json(*classification);
    if (clustering) j["clustering"] = metrics_json(*clustering);
    if (!clustering_objective.empty()) j["clustering_objective"] = clustering_objective;
    if (clustering_beta) j["clustering_beta"] = *clustering_beta;
    return j.dump(2);
}

PipelineResult run_pipeline_on(const HsiCube& cube, const RunConfig& config) {
    config.validate();
    const int workers = config.effective_workers();

    PipelineResult result;
    RunReport& report = result.report;
    report.config = echo_config(config);
    StageTimer timer(report.stage_times);

    result.source = cube;
    timer.run("normalize", [&] { normalize_per_band(result.source); });
    if (config.noise.model != NoiseModel::none) {
        timer.run("noise", [&] {
            result.source = apply_noise(result.source, config.noise, workers);
        });
    }

    const bool has_truth = result.source.truth.has_value();
    if (config.labeling == LabelingMode::ground_truth && !has_truth)
        throw Error(ErrorCode::invalid_argument, "ground-truth labeling requires a label raster");
    int num_classes = has_truth ? int(result.source.class_count()) : 0;
    if (config.labeling == LabelingMode::ground_truth && num_classes < 1)
        throw Error(ErrorCode::invalid_argument, "label raster contains no classes");

    const SpectraMatrix flat = timer.run("flatten", [&] {
        return flatten_cube(result.source, /*annotated_only=*/!config.classify_all);
    });
    const std::size_t n = std::size_t(flat.rows());
    report.pixels = n;

    if (config.d > flat.data.cols())
        throw Error(ErrorCode::invalid_argument, "d exceeds the band count");
    const Eigen::MatrixXd X = timer.run("pca", [&] {
        PcaModel pca = pca_fit(flat.data, config.d);
        for (auto& w : pca.warnings) report.warnings.push_back("pca: " + w);
        return pca.project(flat.data);
    });

    // 0-based truth per retained row (-1 = background, only with classify_all).
    std::vector<int> truth0(n, -1);
    if (has_truth)
        for (std::size_t i = 0; i < n; ++i)
            truth0[i] = int((*result.source.truth)[flat.pixel_index[i]]) - 1;

    // --- anchor selection and labels ---
    Eigen::MatrixXd anchors_X;            // m x d
    std::vector<Eigen::Index> anchor_rows;
    AnchorLabels U;
    int c = 0;
    std::vector<std::uint8_t> training(n, 0);

    if (config.labeling == LabelingMode::ground_truth) {
        timer.run("anchors", [&] {
            const StratifiedSample sample =
                sample_per_class(truth0, num_classes, config.samples_per_class, config.seed);
            anchor_rows = sample.rows;
            anchors_X.resize(Eigen::Index(sample.rows.size()), X.cols());
            for (std::size_t i = 0; i < sample.rows.size(); ++i)
                anchors_X.row(Eigen::Index(i)) = X.row(sample.rows[i]);
            U = AnchorLabels::one_hot(sample.class_ids, num_classes);
            c = num_classes;
            for (Eigen::Index r : anchor_rows) training[std::size_t(r)] = 1;
        });
    } else {
        timer.run("anchors", [&] {
            if (config.m > Eigen::Index(n))
                throw Error(ErrorCode::invalid_argument, "m exceeds the pixel count");
            KmeansOptions opts;
            opts.seed = config.seed;
            const AnchorSet set = kmeans(X, config.m, opts);
            anchors_X = set.features;
            anchor_rows = set.source_rows;
        });
        c = config.c > 0 ? config.c : num_classes;
        if (c < 1)
            throw Error(ErrorCode::invalid_argument,
                        "clustering mode needs --c or a label raster to infer it");
        timer.run("clustering", [&] {
            ClusterConfig cc;
            cc.c = c;
            cc.beta = config.beta;
            cc.h = config.h > 0 ? config.h : int(std::min<Eigen::Index>(25, config.m - 1));
            cc.max_iter = config.cluster_max_iter;
            cc.beta_adapt = config.beta_adapt;
            cc.seed = config.seed;
            const Eigen::MatrixXd W_ll = anchor_block(anchors_X, config.sigma2);
            ClusteringResult clu = run_clustering(W_ll, anchors_X, cc);
            for (auto& w : clu.warnings) report.warnings.push_back("clustering: " + w);
            if (!clu.converged) report.converged = false;
            U.U = pseudo_label_anchors(clu.labels, c);
            report.clustering_objective = clu.objective_trace;
            report.clustering_beta = clu.final_beta;
        });
    }
    const Eigen::Index m = anchors_X.rows();
    report.anchors = m;
    report.classes = c;
    report.anchor_rows = anchor_rows;
    for (Eigen::Index r : anchor_rows)
        report.anchor_raster.push_back(flat.pixel_index[std::size_t(r)]);
    report.anchor_features = anchors_X;
    report.anchor_labels = U.U;

    // --- per-slice two-stage propagation ---
    const Eigen::MatrixXd W_ll = timer.run("anchor-block", [&] {
        return anchor_block(anchors_X, config.sigma2);
    });
    const SlicePlan plan = slice_pixels(n, config.theta);
    report.slices = plan.slices.size();

    std::vector<int> pred(n, -1);
    bool k_clamped = false;
    for (std::size_t s = 0; s < plan.slices.size(); ++s) {
        const auto range = plan.slices[s];
        const Eigen::Index ns = Eigen::Index(range.size());
        const Eigen::MatrixXd Xs = X.middleRows(Eigen::Index(range.begin), ns);

        const AnchorGraph Z = timer.run("anchor-graph", [&] {
            AnchorGraph graph = build_anchor_graph(Xs, anchors_X, config.sigma2, workers);
            if (!graph.underflow_rows.empty())
                report.warnings.push_back("slice " + std::to_string(s) + ": " +
                                          std::to_string(graph.underflow_rows.size()) +
                                          " anchor-kernel rows underflowed to uniform");
            return graph;
        });

        SparseAffinity W_uu;
        timer.run("pixel-graph", [&] {
            const FactoredAffinity affinity = anchor_affinity(Z);
            if (!affinity.dropped_anchors.empty())
                report.warnings.push_back("slice " + std::to_string(s) + ": " +
                                          std::to_string(affinity.dropped_anchors.size()) +
                                          " unused anchors dropped from the pixel affinity");
            if (ns < 2) {
                // One-pixel slice has no pixel-pixel edges.
                W_uu.order = ns;
                W_uu.row_offsets.assign(std::size_t(ns) + 1, 0);
                return;
            }
            Eigen::Index k_eff = config.k;
            if (k_eff >= ns) {
                k_eff = ns - 1;
                k_clamped = true;
            }
            const EdgeSet edges = topk_prune(affinity, k_eff, workers);
            const SparseAffinity recomputed =
                recompute_similarity(Xs, edges, config.sigma2, workers);
            W_uu = combine(affinity, recomputed, edges, workers);
        });

        const NormalizedGraph graph = timer.run("assemble", [&] {
            AffinityBlocks blocks = assemble(W_ll, Z.Z, std::move(W_uu));
            if (!config.graph_dump_prefix.empty())
                dump_edge_list(blocks, config.graph_dump_prefix + "-slice" + std::to_string(s) +
                                           ".txt");
            NormalizedGraph normalized = symmetric_normalize(std::move(blocks));
            if (!normalized.isolated_nodes.empty())
                report.warnings.push_back("slice " + std::to_string(s) + ": " +
                                          std::to_string(normalized.isolated_nodes.size()) +
                                          " isolated nodes received self-loops");
            return normalized;
        });

        timer.run("solve", [&] {
            const Eigen::MatrixXd Y = build_Y(U, initial_labels(Z, U));
            PropagationConfig pc;
            pc.alpha = config.alpha;
            pc.mode = config.mode;
            pc.tol = config.tol;
            pc.max_iter = config.max_iter;
            pc.workers = workers;
            const PropagationResult solved = config.mode == PropagationMode::closed_form
                                                 ? propagate_closed_form(graph, Y, pc)
                                                 : propagate_iterative(graph, Y, pc);
            if (!solved.converged) report.converged = false;
            if (solved.used_fallback)
                report.warnings.push_back("slice " + std::to_string(s) +
                                          ": solver stagnated, fell back to iterative mode");
            for (Eigen::Index i = 0; i < ns; ++i)
                pred[range.begin + std::size_t(i)] = solved.labels.hardened[std::size_t(m + i)];
        });
    }
    if (k_clamped)
        report.warnings.push_back("k reduced to slice size - 1 on at least one slice");

    // --- class map over the raster ---
    result.map.assign(result.source.pixel_count(), 0);
    std::size_t unclassified = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pred[i] < 0) {
            ++unclassified;
            continue;
        }
        result.map[flat.pixel_index[i]] = std::uint16_t(pred[i] + 1);
    }
    if (unclassified > 0)
        report.warnings.push_back(std::to_string(unclassified) +
                                  " pixels hardened to the unclassified id 0");

    // --- evaluation ---
    if (has_truth) {
        timer.run("metrics", [&] {
            std::vector<std::uint8_t> mask(n, 0);
            std::vector<int> eval_pred(n, 0), eval_truth(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                if (truth0[i] < 0) continue;  // background under classify_all
                const bool is_training =
                    config.labeling == LabelingMode::ground_truth && training[i];
                if (is_training || pred[i] < 0) continue;
                mask[i] = 1;
                eval_truth[i] = truth0[i];
                eval_pred[i] = pred[i];
            }
            if (config.labeling == LabelingMode::ground_truth) {
                report.classification =
                    classification_metrics(eval_pred, eval_truth, mask, num_classes);
            } else {
                report.clustering =
                    clustering_metrics(eval_pred, eval_truth, mask, c, num_classes);
            }
        });
    }
    return result;
}

PipelineResult run_pipeline(const RunConfig& config) {
    if (config.cube_path.empty())
        throw Error(ErrorCode::invalid_argument, "no input cube given");
    HsiCube cube = load_cube(config.cube_path);
    if (!config.labels_path.empty())
        cube.truth = load_labels(config.labels_path, cube.height, cube.width);

    PipelineResult result = run_pipeline_on(cube, config);

    if (!config.out_map.empty())
        save_labels(result.map, cube.height, cube.width, config.out_map);
    if (!config.out_preview.empty())
        save_pgm_preview(result.map, cube.height, cube.width, config.out_preview,
                         config.out_preview + ".palette");
    if (!config.out_report.empty()) {
        std::ofstream out(config.out_report);
        if (!out) throw Error(ErrorCode::io_failure, "cannot write " + config.out_report);
        out << result.report.to_json() << '\n';
    }
    return result;
}

BenchRow bench_run(const HsiCube& cube, const RunConfig& config, int repeats,
                   const std::string& label) {
    if (repeats < 1) throw Error(ErrorCode::invalid_argument, "need at least one repeat");

    std::vector<double> totals;
    std::map<std::string, std::vector<double>> stages;
    std::size_t pixels = 0;
    for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        const PipelineResult run = run_pipeline_on(cube, config);
        totals.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        for (const auto& stage : run.report.stage_times)
            stages[stage.name].push_back(stage.seconds);
        pixels = run.report.pixels;
    }

    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t mid = v.size() / 2;
        return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    };

    BenchRow row;
    row.label = label;
    row.pixels = pixels;
    row.workers = config.effective_workers();
    row.total_seconds = median(totals);
    for (auto& [name, samples] : stages) row.stage_seconds[name] = median(samples);
    return row;
}

std::string format_bench_table(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << std::setw(20) << std::left << "label" << std::right << std::setw(10) << "pixels"
        << std::setw(9) << "workers" << std::setw(11) << "total_s";
    std::vector<std::string> stage_names;
    for (const auto& row : rows)
        for (const auto& [name, _] : row.stage_seconds)
            if (std::find(stage_names.begin(), stage_names.end(), name) == stage_names.end())
                stage_names.push_back(name);
    std::sort(stage_names.begin(), stage_names.end());
    for (const auto& name : stage_names) out << std::setw(13) << name;
    out << '\n';
    for (const auto& row : rows) {
        out << std::setw(20) << std::left << row.label << std::right << std::setw(10) << row.pixels
            << std::setw(9) << row.workers << std::setw(11) << row.total_seconds;
        for (const auto& name : stage_names) {
            const auto it = row.stage_seconds.find(name);
            out << std::setw(13) << (it != row.stage_seconds.end() ? it->second : 0.0);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace hsilp
