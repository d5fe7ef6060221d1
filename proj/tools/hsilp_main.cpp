// Command-line front end: convert / classify / cluster / bench / noise.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "hsilp/cube.hpp"
#include "hsilp/errors.hpp"
#include "hsilp/metrics.hpp"
#include "hsilp/noise.hpp"
#include "hsilp/parallel.hpp"
#include "hsilp/pipeline.hpp"
#include "hsilp/synth.hpp"

namespace {

// Holds the raw flag values plus the CLI11 option handles so we can tell
// which flags were actually given. Precedence: defaults < preset < config
// file < explicit flags.
struct CommonOpts {
    std::string preset;
    std::string config_file;
    std::string cube_path;
    std::string labels_path;

    std::int64_t d = 0;
    std::uint64_t theta = 0;
    double sigma2 = 0.0;
    std::int64_t k = 0;
    double alpha = 0.0;
    std::string mode;
    double tol = 0.0;
    int max_iter = 0;

    int samples_per_class = 0;
    std::int64_t m = 0;
    int c = 0;
    double beta = 0.0;
    int h = 0;
    int cluster_max_iter = 0;
    bool beta_adapt_on = false;
    bool beta_adapt_off = false;

    std::string noise;
    double noise_scale = 0.0;
    std::uint64_t seed = 0;
    int workers = 0;
    bool classify_all = false;

    std::string out_map;
    std::string out_report;
    std::string out_preview;
    std::string dump_graph;

    CLI::Option* preset_o = nullptr;
    CLI::Option* config_o = nullptr;
    CLI::Option* cube_o = nullptr;
    CLI::Option* labels_o = nullptr;
    CLI::Option* d_o = nullptr;
    CLI::Option* theta_o = nullptr;
    CLI::Option* sigma2_o = nullptr;
    CLI::Option* k_o = nullptr;
    CLI::Option* alpha_o = nullptr;
    CLI::Option* mode_o = nullptr;
    CLI::Option* tol_o = nullptr;
    CLI::Option* max_iter_o = nullptr;
    CLI::Option* spc_o = nullptr;
    CLI::Option* m_o = nullptr;
    CLI::Option* c_o = nullptr;
    CLI::Option* beta_o = nullptr;
    CLI::Option* h_o = nullptr;
    CLI::Option* cmi_o = nullptr;
    CLI::Option* noise_o = nullptr;
    CLI::Option* noise_scale_o = nullptr;
    CLI::Option* seed_o = nullptr;
    CLI::Option* workers_o = nullptr;
    CLI::Option* out_map_o = nullptr;
    CLI::Option* out_report_o = nullptr;
    CLI::Option* out_preview_o = nullptr;
    CLI::Option* dump_graph_o = nullptr;
};

void add_common_options(CLI::App* cmd, CommonOpts& o, bool needs_cube) {
    o.preset_o = cmd->add_option("--preset", o.preset,
                                 "Per-scene defaults: indian-pines|salinas|pavia");
    o.config_o = cmd->add_option("--config", o.config_file,
                                 "key = value config file (# comments); flags override");
    o.cube_o = cmd->add_option("--cube", o.cube_path, "HSC1 cube file");
    if (needs_cube) o.cube_o->required();
    o.labels_o = cmd->add_option("--labels", o.labels_path, "HSL1 ground-truth file");

    o.d_o = cmd->add_option("-d,--pca-dims", o.d, "Spectral dimensions kept by PCA");
    o.theta_o = cmd->add_option("--theta", o.theta, "Pixels per processing slice");
    o.sigma2_o = cmd->add_option("--sigma2", o.sigma2, "Gaussian kernel bandwidth sigma^2");
    o.k_o = cmd->add_option("-k,--top-k", o.k, "Neighbors kept per pixel when pruning");
    o.alpha_o = cmd->add_option("--alpha", o.alpha, "Propagation trade-off in (0,1)");
    o.mode_o = cmd->add_option("--mode", o.mode, "Solver: closed|iterative")
                   ->check(CLI::IsMember({"closed", "iterative"}));
    o.tol_o = cmd->add_option("--tol", o.tol, "Solver convergence tolerance");
    o.max_iter_o = cmd->add_option("--max-iter", o.max_iter, "Solver iteration cap");

    o.noise_o = cmd->add_option("--noise", o.noise, "Noise model: none|gaussian|impulse|poisson")
                    ->check(CLI::IsMember({"none", "gaussian", "impulse", "poisson"}));
    o.noise_scale_o = cmd->add_option("--noise-scale", o.noise_scale, "Noise severity (>= 0)");
    o.seed_o = cmd->add_option("--seed", o.seed, "RNG seed (sampling, k-means, noise)");
    o.workers_o = cmd->add_option("--workers", o.workers, "Worker threads, 0 = hardware");
    cmd->add_flag("--classify-all", o.classify_all, "Also classify background pixels");

    o.out_map_o = cmd->add_option("--out-map", o.out_map, "Write HSL1 classification map");
    o.out_report_o = cmd->add_option("--out-report", o.out_report, "Write JSON run report");
    o.out_preview_o =
        cmd->add_option("--out-preview", o.out_preview, "Write PGM preview (+ .palette)");
    o.dump_graph_o = cmd->add_option("--dump-graph", o.dump_graph,
                                     "Prefix for per-slice edge-list dumps");
}

void add_anchor_options(CLI::App* cmd, CommonOpts& o) {
    o.m_o = cmd->add_option("-m,--anchors", o.m, "Anchor count");
    o.c_o = cmd->add_option("-c,--clusters", o.c, "Cluster count, 0 = truth class count");
    o.beta_o = cmd->add_option("--beta", o.beta, "Rank-constraint weight");
    o.h_o = cmd->add_option("--row-support", o.h, "Nonzeros per learned-graph row");
    o.cmi_o = cmd->add_option("--cluster-max-iter", o.cluster_max_iter,
                              "Outer clustering iteration cap");
    cmd->add_flag("--beta-adapt", o.beta_adapt_on, "Re-enable automatic beta adjustment");
    cmd->add_flag("--no-beta-adapt", o.beta_adapt_off, "Freeze beta across iterations");
}

hsilp::RunConfig build_config(const CommonOpts& o, hsilp::LabelingMode labeling) {
    hsilp::RunConfig cfg;
    if (o.preset_o && o.preset_o->count()) hsilp::apply_preset(cfg, o.preset);
    if (o.config_o && o.config_o->count()) hsilp::load_config_file(cfg, o.config_file);

    auto set_if = [](CLI::Option* opt, auto& dst, const auto& src) {
        if (opt && opt->count()) dst = src;
    };
    set_if(o.cube_o, cfg.cube_path, o.cube_path);
    set_if(o.labels_o, cfg.labels_path, o.labels_path);
    set_if(o.d_o, cfg.d, static_cast<Eigen::Index>(o.d));
    set_if(o.theta_o, cfg.theta, static_cast<std::size_t>(o.theta));
    set_if(o.sigma2_o, cfg.sigma2, o.sigma2);
    set_if(o.k_o, cfg.k, static_cast<Eigen::Index>(o.k));
    set_if(o.alpha_o, cfg.alpha, o.alpha);
    if (o.mode_o && o.mode_o->count())
        cfg.mode = o.mode == "iterative" ? hsilp::PropagationMode::iterative
                                         : hsilp::PropagationMode::closed_form;
    set_if(o.tol_o, cfg.tol, o.tol);
    set_if(o.max_iter_o, cfg.max_iter, o.max_iter);
    set_if(o.spc_o, cfg.samples_per_class, o.samples_per_class);
    set_if(o.m_o, cfg.m, static_cast<Eigen::Index>(o.m));
    set_if(o.c_o, cfg.c, o.c);
    set_if(o.beta_o, cfg.beta, o.beta);
    set_if(o.h_o, cfg.h, o.h);
    set_if(o.cmi_o, cfg.cluster_max_iter, o.cluster_max_iter);
    if (o.beta_adapt_off) cfg.beta_adapt = false;
    if (o.beta_adapt_on) cfg.beta_adapt = true;
    if (o.noise_o && o.noise_o->count()) cfg.noise.model = hsilp::parse_noise_model(o.noise);
    set_if(o.noise_scale_o, cfg.noise.scale, o.noise_scale);
    if (o.seed_o && o.seed_o->count()) {
        cfg.seed = o.seed;
        cfg.noise.seed = o.seed;
    }
    set_if(o.workers_o, cfg.workers, o.workers);
    if (o.classify_all) cfg.classify_all = true;
    set_if(o.out_map_o, cfg.out_map, o.out_map);
    set_if(o.out_report_o, cfg.out_report, o.out_report);
    set_if(o.out_preview_o, cfg.out_preview, o.out_preview);
    set_if(o.dump_graph_o, cfg.graph_dump_prefix, o.dump_graph);
    cfg.labeling = labeling;
    return cfg;
}

int run_and_print(const hsilp::RunConfig& cfg) {
    hsilp::PipelineResult result = hsilp::run_pipeline(cfg);
    const hsilp::RunReport& report = result.report;

    std::cout << "pixels: " << report.pixels << "  anchors: " << report.anchors
              << "  classes: " << report.classes << "  slices: " << report.slices << "\n";
    if (report.classification)
        std::cout << hsilp::format_classification_table(*report.classification);
    if (report.clustering) std::cout << hsilp::format_clustering_table(*report.clustering);
    for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!report.converged) {
        std::cerr << "error: run did not converge\n";
        return 3;
    }
    return 0;
}

// "64x128" -> SynthSpec dims.
bool parse_dims(const std::string& text, std::uint32_t& height, std::uint32_t& width) {
    unsigned h = 0, w = 0;
    char trailing = 0;
    if (std::sscanf(text.c_str(), "%ux%u%c", &h, &w, &trailing) != 2 || h == 0 || w == 0)
        return false;
    height = h;
    width = w;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anchor-graph label propagation for hyperspectral images"};
    app.require_subcommand(1);

    // ---- convert ----
    auto* convert = app.add_subcommand("convert", "Text dumps -> HSC1 cube / HSL1 labels");
    std::string cv_input, cv_output, cv_labels_in, cv_labels_out, cv_drop;
    std::uint32_t cv_height = 0, cv_width = 0;
    convert->add_option("--input", cv_input, "Pixel dump: one pixel per line, bands as columns");
    convert->add_option("--output", cv_output, "HSC1 path for the converted cube");
    convert->add_option("--labels-input", cv_labels_in, "Label dump: one class id per line");
    convert->add_option("--labels-output", cv_labels_out, "HSL1 path for converted labels");
    convert->add_option("--height", cv_height, "Scene height (rows)")->required();
    convert->add_option("--width", cv_width, "Scene width (columns)")->required();
    convert->add_option("--drop-bands", cv_drop, "1-based bands to drop, e.g. 104-108,220");

    // ---- classify ----
    auto* classify =
        app.add_subcommand("classify", "Semi-supervised run: sampled ground-truth anchors");
    CommonOpts cls;
    add_common_options(classify, cls, /*needs_cube=*/true);
    add_anchor_options(classify, cls);
    cls.spc_o = classify->add_option("-s,--samples-per-class", cls.samples_per_class,
                                     "Labeled pixels sampled per class");

    // ---- cluster ----
    auto* cluster =
        app.add_subcommand("cluster", "Unsupervised run: anchors pseudo-labeled by clustering");
    CommonOpts clu;
    add_common_options(cluster, clu, /*needs_cube=*/true);
    add_anchor_options(cluster, clu);

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "Median per-stage wall times");
    CommonOpts ben;
    add_common_options(bench, ben, /*needs_cube=*/false);
    add_anchor_options(bench, ben);
    ben.spc_o = bench->add_option("-s,--samples-per-class", ben.samples_per_class,
                                  "Labeled pixels sampled per class");
    int bench_repeats = 3;
    std::vector<int> bench_workers;
    std::vector<std::string> bench_synth;
    std::uint32_t synth_bands = 16;
    int synth_classes = 4;
    bool bench_cluster_mode = false;
    bench->add_option("--repeats", bench_repeats, "Runs per configuration (median)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--workers-list", bench_workers, "Worker counts to compare");
    bench->add_option("--synthetic", bench_synth, "Synthetic scene dims HxW (repeatable)");
    bench->add_option("--synthetic-bands", synth_bands, "Bands for synthetic scenes");
    bench->add_option("--synthetic-classes", synth_classes, "Classes for synthetic scenes");
    bench->add_flag("--cluster-mode", bench_cluster_mode, "Bench the unsupervised pipeline");

    // ---- noise ----
    auto* noise = app.add_subcommand("noise", "Inject sensor noise into an HSC1 cube");
    std::string nz_input, nz_output, nz_model = "gaussian";
    double nz_scale = 0.1;
    std::uint64_t nz_seed = 0;
    int nz_workers = 0;
    noise->add_option("--input", nz_input, "Source HSC1 cube")->required();
    noise->add_option("--output", nz_output, "Destination HSC1 cube")->required();
    noise->add_option("--noise", nz_model, "Noise model: none|gaussian|impulse|poisson")
        ->check(CLI::IsMember({"none", "gaussian", "impulse", "poisson"}));
    noise->add_option("--noise-scale", nz_scale, "Noise severity (>= 0)");
    noise->add_option("--seed", nz_seed, "RNG seed");
    noise->add_option("--workers", nz_workers, "Worker threads, 0 = hardware");

    CLI11_PARSE(app, argc, argv);

    try {
        if (convert->parsed()) {
            if (cv_input.empty() && cv_labels_in.empty())
                throw hsilp::Error(hsilp::ErrorCode::invalid_argument,
                                   "convert: need --input and/or --labels-input");
            if (!cv_input.empty()) {
                if (cv_output.empty())
                    throw hsilp::Error(hsilp::ErrorCode::invalid_argument,
                                       "convert: --input requires --output");
                hsilp::HsiCube cube = hsilp::cube_from_text_dump(
                    cv_input, cv_height, cv_width, hsilp::parse_band_list(cv_drop));
                hsilp::save_cube(cube, cv_output);
                std::cout << "wrote " << cv_output << " (" << cube.height << "x" << cube.width
                          << "x" << cube.bands << ")\n";
            }
            if (!cv_labels_in.empty()) {
                if (cv_labels_out.empty())
                    throw hsilp::Error(hsilp::ErrorCode::invalid_argument,
                                       "convert: --labels-input requires --labels-output");
                std::vector<std::uint16_t> labels =
                    hsilp::labels_from_text_dump(cv_labels_in, cv_height, cv_width);
                hsilp::save_labels(labels, cv_height, cv_width, cv_labels_out);
                std::cout << "wrote " << cv_labels_out << " (" << cv_height << "x" << cv_width
                          << ")\n";
            }
            return 0;
        }

        if (classify->parsed()) {
            hsilp::RunConfig cfg = build_config(cls, hsilp::LabelingMode::ground_truth);
            return run_and_print(cfg);
        }

        if (cluster->parsed()) {
            hsilp::RunConfig cfg = build_config(clu, hsilp::LabelingMode::clustering);
            return run_and_print(cfg);
        }

        if (bench->parsed()) {
            hsilp::RunConfig base = build_config(
                ben, bench_cluster_mode ? hsilp::LabelingMode::clustering
                                        : hsilp::LabelingMode::ground_truth);
            if (bench_workers.empty()) bench_workers.push_back(base.workers);

            struct Scene {
                std::string label;
                hsilp::HsiCube cube;
            };
            std::vector<Scene> scenes;
            if (!base.cube_path.empty()) {
                Scene s;
                s.label = base.cube_path.substr(base.cube_path.find_last_of("/\\") + 1);
                s.cube = hsilp::load_cube(base.cube_path);
                if (!base.labels_path.empty())
                    s.cube.truth =
                        hsilp::load_labels(base.labels_path, s.cube.height, s.cube.width);
                scenes.push_back(std::move(s));
            }
            for (const std::string& dims : bench_synth) {
                std::uint32_t sh = 0, sw = 0;
                if (!parse_dims(dims, sh, sw))
                    throw hsilp::Error(hsilp::ErrorCode::invalid_argument,
                                       "bench: bad --synthetic value '" + dims +
                                           "', expected HxW");
                hsilp::SynthSpec spec;
                spec.height = sh;
                spec.width = sw;
                spec.bands = synth_bands;
                spec.classes = synth_classes;
                spec.seed = base.seed;
                scenes.push_back({"synth-" + dims, hsilp::make_blob_cube(spec)});
            }
            if (scenes.empty())
                throw hsilp::Error(hsilp::ErrorCode::invalid_argument,
                                   "bench: need --cube or --synthetic");

            std::vector<hsilp::BenchRow> rows;
            for (const Scene& scene : scenes) {
                for (int w : bench_workers) {
                    hsilp::RunConfig cfg = base;
                    cfg.workers = w;
                    // The stock PCA size targets real sensors with hundreds of
                    // bands; when -d was not given, keep what the scene offers.
                    if (!ben.d_o->count() && cfg.d > static_cast<Eigen::Index>(scene.cube.bands))
                        cfg.d = static_cast<Eigen::Index>(scene.cube.bands);
                    rows.push_back(hsilp::bench_run(scene.cube, cfg, bench_repeats,
                                                    scene.label + "/w" + std::to_string(w)));
                }
            }
            std::cout << hsilp::format_bench_table(rows);
            return 0;
        }

        if (noise->parsed()) {
            hsilp::HsiCube cube = hsilp::load_cube(nz_input);
            hsilp::NoiseSpec spec;
            spec.model = hsilp::parse_noise_model(nz_model);
            spec.scale = nz_scale;
            spec.seed = nz_seed;
            int workers = nz_workers > 0 ? nz_workers : hsilp::default_workers();
            hsilp::HsiCube out = hsilp::apply_noise(cube, spec, workers);
            hsilp::save_cube(out, nz_output);
            std::cout << "wrote " << nz_output << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
