#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsilp/cube.hpp"
#include "hsilp/errors.hpp"
#include "hsilp/pipeline.hpp"
#include "hsilp/synth.hpp"

using namespace hsilp;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/hsilp_pipe_") + name;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

// A crisply separable 4-class scene the classifier should solve exactly.
HsiCube toy_scene() {
    SynthSpec spec;
    spec.height = 20;
    spec.width = 20;
    spec.bands = 6;
    spec.classes = 4;
    spec.spread = 0.01;
    spec.separation = 0.8;
    spec.seed = 5;
    return make_blob_cube(spec);
}

RunConfig toy_config() {
    RunConfig config;
    config.d = 3;
    config.theta = 200;  // two slices
    config.sigma2 = 0.05;
    config.k = 20;
    config.samples_per_class = 5;
    config.workers = 1;
    config.seed = 1;
    return config;
}

}  // namespace

TEST_CASE("config validation rejects out-of-range values") {
    RunConfig config = toy_config();
    SUBCASE("d") { config.d = 0; }
    SUBCASE("theta") { config.theta = 0; }
    SUBCASE("sigma2") { config.sigma2 = 0.0; }
    SUBCASE("k") { config.k = 0; }
    SUBCASE("alpha low") { config.alpha = 0.0; }
    SUBCASE("alpha high") { config.alpha = 1.0; }
    SUBCASE("tol") { config.tol = 0.0; }
    SUBCASE("max iter") { config.max_iter = 0; }
    SUBCASE("samples") { config.samples_per_class = 0; }
    SUBCASE("m") { config.m = 0; }
    SUBCASE("beta") { config.beta = 0.0; }
    SUBCASE("h") { config.h = -1; }
    SUBCASE("c") { config.c = -1; }
    SUBCASE("cluster iters") { config.cluster_max_iter = 0; }
    SUBCASE("noise scale") { config.noise.scale = -0.5; }
    SUBCASE("workers") { config.workers = -2; }
    CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("ground-truth labeling solves the separable scene exactly") {
    const HsiCube cube = toy_scene();
    const RunConfig config = toy_config();
    const PipelineResult run = run_pipeline_on(cube, config);

    REQUIRE(run.report.classification.has_value());
    CHECK(run.report.classification->oa == 1.0);
    CHECK(run.report.classification->aa == 1.0);
    CHECK(run.report.classification->kappa == 1.0);
    CHECK(run.report.pixels == 400);
    CHECK(run.report.anchors == 20);  // 5 samples x 4 classes
    CHECK(run.report.classes == 4);
    CHECK(run.report.slices == 2);
    CHECK(run.report.converged);

    // The map reproduces the truth raster everywhere (training pixels too).
    REQUIRE(run.map.size() == 400);
    for (std::size_t i = 0; i < run.map.size(); ++i) CHECK(run.map[i] == (*cube.truth)[i]);
}

TEST_CASE("slice partitioning follows theta and the map stays deterministic") {
    const HsiCube cube = toy_scene();
    RunConfig config = toy_config();

    config.theta = 400;
    const PipelineResult one = run_pipeline_on(cube, config);
    CHECK(one.report.slices == 1);

    config.theta = 150;  // 150 + 150 + 100
    const PipelineResult three = run_pipeline_on(cube, config);
    CHECK(three.report.slices == 3);

    config.theta = 1000;  // larger than n clamps to a single slice
    const PipelineResult big = run_pipeline_on(cube, config);
    CHECK(big.report.slices == 1);
    CHECK(big.map == one.map);

    // Identical config -> identical result, bit for bit.
    const PipelineResult again = run_pipeline_on(cube, config);
    CHECK(again.map == big.map);

    // On this scene every slicing yields the same (correct) map.
    CHECK(three.map == one.map);
}

TEST_CASE("single-pixel slices still classify") {
    const HsiCube cube = toy_scene();
    RunConfig config = toy_config();
    config.theta = 1;
    const PipelineResult run = run_pipeline_on(cube, config);
    CHECK(run.report.slices == 400);
    REQUIRE(run.report.classification.has_value());
    CHECK(run.report.classification->oa == 1.0);
}

TEST_CASE("results are worker-count independent") {
    const HsiCube cube = toy_scene();
    RunConfig config = toy_config();
    config.noise.model = NoiseModel::gaussian;
    config.noise.scale = 0.05;
    config.noise.seed = 3;

    config.workers = 1;
    const PipelineResult w1 = run_pipeline_on(cube, config);
    config.workers = 6;
    const PipelineResult w6 = run_pipeline_on(cube, config);

    CHECK(w1.map == w6.map);
    CHECK(w1.report.warnings == w6.report.warnings);
    CHECK(w1.report.anchor_rows == w6.report.anchor_rows);
    REQUIRE(w1.report.classification.has_value());
    REQUIRE(w6.report.classification.has_value());
    CHECK(w1.report.classification->oa == w6.report.classification->oa);
    CHECK(w1.report.classification->kappa == w6.report.classification->kappa);
    CHECK(w1.source.values == w6.source.values);
}

TEST_CASE("gaussian noise degrades accuracy on the toy scene") {
    const HsiCube cube = toy_scene();
    RunConfig config = toy_config();
    const PipelineResult clean = run_pipeline_on(cube, config);

    config.noise.model = NoiseModel::gaussian;
    config.noise.scale = 0.5;
    config.noise.seed = 9;
    const PipelineResult noisy = run_pipeline_on(cube, config);

    REQUIRE(clean.report.classification.has_value());
    REQUIRE(noisy.report.classification.has_value());
    CHECK(clean.report.classification->oa == 1.0);
    CHECK(noisy.report.classification->oa < clean.report.classification->oa);
}

TEST_CASE("stratified sampling halves the draw for scarce classes") {
    // Class 2 keeps only 3 annotated pixels (fewer than s = 5), so its draw
    // falls back to (s+1)/2 = 3; class 3 keeps one pixel and yields one anchor.
    HsiCube cube = toy_scene();
    std::size_t kept2 = 0, kept3 = 0;
    for (std::size_t i = 0; i < cube.truth->size(); ++i) {
        if ((*cube.truth)[i] == 2 && ++kept2 > 3) (*cube.truth)[i] = 0;
        if ((*cube.truth)[i] == 3 && ++kept3 > 1) (*cube.truth)[i] = 0;
    }
    const RunConfig config = toy_config();
    const PipelineResult run = run_pipeline_on(cube, config);
    CHECK(run.report.anchors == 5 + 3 + 1 + 5);

    // Every anchor carries a one-hot label row.
    CHECK(run.report.anchor_labels.rows() == run.report.anchors);
    CHECK(run.report.anchor_labels.cols() == 4);
    for (Eigen::Index i = 0; i < run.report.anchor_labels.rows(); ++i) {
        CHECK(run.report.anchor_labels.row(i).sum() == 1.0);
        CHECK(run.report.anchor_labels.row(i).maxCoeff() == 1.0);
    }
}

TEST_CASE("a class with no annotated pixels is an error") {
    HsiCube cube = toy_scene();
    for (auto& t : *cube.truth)
        if (t == 2) t = 0;  // class 2 vanishes but ids 3 and 4 remain
    CHECK_THROWS_WITH_AS(run_pipeline_on(cube, toy_config()),
                         doctest::Contains("no annotated pixels"), Error);
}

TEST_CASE("ground-truth labeling requires a truth raster") {
    HsiCube cube = toy_scene();
    cube.truth.reset();
    CHECK_THROWS_AS(run_pipeline_on(cube, toy_config()), Error);
}

TEST_CASE("d larger than the band count is an error") {
    RunConfig config = toy_config();
    config.d = 7;  // cube has 6 bands
    CHECK_THROWS_AS(run_pipeline_on(toy_scene(), config), Error);
}

TEST_CASE("classify_all extends the map to background pixels") {
    HsiCube cube = toy_scene();
    // Strip annotations from the first raster row (20 pixels).
    for (std::size_t i = 0; i < 20; ++i) (*cube.truth)[i] = 0;

    RunConfig config = toy_config();
    const PipelineResult annotated_only = run_pipeline_on(cube, config);
    CHECK(annotated_only.report.pixels == 380);
    for (std::size_t i = 0; i < 20; ++i) CHECK(annotated_only.map[i] == 0);

    config.classify_all = true;
    const PipelineResult everything = run_pipeline_on(cube, config);
    CHECK(everything.report.pixels == 400);
    // Background pixels are classified now, and by scene construction they
    // match the stripe class they were cut from.
    for (std::size_t i = 0; i < 20; ++i) CHECK(everything.map[i] == (*cube.truth)[400 - 20 + i]);
    // Metrics still only score annotated pixels.
    REQUIRE(everything.report.classification.has_value());
    CHECK(everything.report.classification->oa == 1.0);
}

TEST_CASE("clustering mode labels anchors without ground truth") {
    const HsiCube cube = toy_scene();
    RunConfig config = toy_config();
    config.labeling = LabelingMode::clustering;
    config.m = 16;
    config.c = 0;  // inferred from the truth raster
    config.h = 2;
    config.beta = 10.0;

    const PipelineResult run = run_pipeline_on(cube, config);
    CHECK(run.report.anchors == 16);
    CHECK(run.report.classes == 4);
    REQUIRE(run.report.clustering.has_value());
    CHECK(run.report.clustering->acc == 1.0);
    CHECK(run.report.clustering->nmi == doctest::Approx(1.0));
    CHECK(!run.report.clustering_objective.empty());
    REQUIRE(run.report.clustering_beta.has_value());
    CHECK(*run.report.clustering_beta > 0.0);
    CHECK(run.report.anchor_labels.rows() == 16);
    CHECK(run.report.anchor_labels.cols() == 4);

    SUBCASE("explicit c works without any truth raster") {
        HsiCube blind = cube;
        blind.truth.reset();
        RunConfig cfg = config;
        cfg.c = 4;
        const PipelineResult unsupervised = run_pipeline_on(blind, cfg);
        CHECK(!unsupervised.report.clustering.has_value());  // nothing to score
        CHECK(unsupervised.report.classes == 4);
        // classify_all is implied by the missing raster: all pixels retained.
        CHECK(unsupervised.report.pixels == 400);
        std::size_t labeled = 0;
        for (std::uint16_t v : unsupervised.map) labeled += v != 0;
        CHECK(labeled == 400);
    }
    SUBCASE("no c and no truth is an error") {
        HsiCube blind = cube;
        blind.truth.reset();
        RunConfig cfg = config;
        cfg.c = 0;
        CHECK_THROWS_AS(run_pipeline_on(blind, cfg), Error);
    }
}

TEST_CASE("presets carry the published per-scene defaults") {
    RunConfig config;
    apply_preset(config, "ip");
    CHECK(config.d == 30);
    CHECK(config.theta == 3000);
    CHECK(config.sigma2 == 0.2);
    CHECK(config.k == 1000);
    CHECK(config.m == 80);
    CHECK(config.h == 25);

    apply_preset(config, "salinas");
    CHECK(config.d == 40);
    CHECK(config.theta == 4000);
    CHECK(config.sigma2 == 1.0);
    CHECK(config.k == 500);
    CHECK(config.beta == 35.0);

    apply_preset(config, "pavia");
    CHECK(config.d == 50);
    CHECK(config.sigma2 == 2.0);
    CHECK(config.m == 45);
    CHECK(config.beta == 25.0);
    CHECK(config.h == 110);

    CHECK_THROWS_AS(apply_preset(config, "houston"), Error);
}

TEST_CASE("config files override presets line by line") {
    const std::string path = temp_path("run.cfg");
    write_text(path,
               "# toy run\n"
               "preset = ip\n"
               "sigma2 = 0.05   # sharper kernel\n"
               "theta = 128\n"
               "mode = iterative\n"
               "labeling = clustering\n"
               "beta-adapt = false\n"
               "classify-all = 1\n"
               "noise = impulse\n"
               "noise-scale = 0.2\n"
               "seed = 42\n"
               "out-map = /tmp/xyz.hsl\n");
    RunConfig config;
    load_config_file(config, path);
    CHECK(config.d == 30);  // from the preset
    CHECK(config.sigma2 == 0.05);
    CHECK(config.theta == 128);
    CHECK(config.mode == PropagationMode::iterative);
    CHECK(config.labeling == LabelingMode::clustering);
    CHECK(!config.beta_adapt);
    CHECK(config.classify_all);
    CHECK(config.noise.model == NoiseModel::impulse);
    CHECK(config.noise.scale == 0.2);
    CHECK(config.seed == 42);
    CHECK(config.out_map == "/tmp/xyz.hsl");
    std::remove(path.c_str());
}

TEST_CASE("config file errors carry the file and line") {
    const std::string path = temp_path("bad.cfg");
    RunConfig config;
    SUBCASE("unknown key") {
        write_text(path, "alpha = 0.9\nbogus = 1\n");
        CHECK_THROWS_WITH_AS(load_config_file(config, path), doctest::Contains(":2"), Error);
        CHECK_THROWS_WITH_AS(load_config_file(config, path), doctest::Contains("bogus"), Error);
    }
    SUBCASE("missing equals") {
        write_text(path, "alpha 0.9\n");
        CHECK_THROWS_WITH_AS(load_config_file(config, path),
                             doctest::Contains("expected key = value"), Error);
    }
    SUBCASE("bad numeric value") {
        write_text(path, "\n\nk = banana\n");
        CHECK_THROWS_WITH_AS(load_config_file(config, path), doctest::Contains(":3"), Error);
    }
    SUBCASE("unknown mode") {
        write_text(path, "mode = sideways\n");
        CHECK_THROWS_AS(load_config_file(config, path), Error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_config_file(config, temp_path("nonexistent.cfg")), Error);
    }
    std::remove(path.c_str());
}

TEST_CASE("the run report serializes a stable json schema") {
    const HsiCube cube = toy_scene();
    const PipelineResult run = run_pipeline_on(cube, toy_config());

    const nlohmann::json j = nlohmann::json::parse(run.report.to_json());
    CHECK(j["schema_version"] == 1);
    CHECK(j["pixels"] == 400);
    CHECK(j["anchors"] == 20);
    CHECK(j["classes"] == 4);
    CHECK(j["slices"] == 2);
    CHECK(j["converged"] == true);
    CHECK(std::stod(j["config"]["sigma2"].get<std::string>()) == 0.05);
    CHECK(j["config"]["labeling"].get<std::string>() == "ground-truth");
    CHECK(j.contains("stage_times"));
    CHECK(j["classification"]["oa"] == 1.0);
    CHECK(j["anchor_set"]["features"].size() == 20);
    CHECK(j["anchor_set"]["rows"].size() == 20);
    CHECK(j["anchor_set"]["labels"][0].size() == 4);

    const nlohmann::json lean = nlohmann::json::parse(run.report.to_json(false));
    CHECK(!lean.contains("stage_times"));
    CHECK(lean["classification"]["oa"] == 1.0);
}

TEST_CASE("file-level runs write map, report, and preview artifacts") {
    const HsiCube cube = toy_scene();
    const std::string cube_path = temp_path("scene.hsc");
    const std::string labels_path = temp_path("scene.hsl");
    save_cube(cube, cube_path);
    save_labels(*cube.truth, cube.height, cube.width, labels_path);

    RunConfig config = toy_config();
    config.cube_path = cube_path;
    config.labels_path = labels_path;
    config.out_map = temp_path("map.hsl");
    config.out_report = temp_path("report.json");
    config.out_preview = temp_path("preview.pgm");

    const PipelineResult run = run_pipeline(config);
    CHECK(load_labels(config.out_map, cube.height, cube.width) == run.map);

    std::ifstream report_in(config.out_report);
    REQUIRE(report_in.good());
    const nlohmann::json j = nlohmann::json::parse(report_in);
    CHECK(j["classification"]["oa"] == 1.0);

    std::ifstream preview(config.out_preview, std::ios::binary);
    REQUIRE(preview.good());
    std::string magic(2, '\0');
    preview.read(magic.data(), 2);
    CHECK(magic == "P5");
    CHECK(std::ifstream(config.out_preview + ".palette").good());

    for (const std::string& p : {cube_path, labels_path, config.out_map, config.out_report,
                                 config.out_preview, config.out_preview + ".palette"})
        std::remove(p.c_str());

    SUBCASE("missing cube path") {
        RunConfig empty;
        CHECK_THROWS_AS(run_pipeline(empty), Error);
    }
}

TEST_CASE("bench_run reports median stage times") {
    SynthSpec spec;
    spec.height = 8;
    spec.width = 8;
    spec.bands = 6;
    spec.classes = 2;
    const HsiCube cube = make_blob_cube(spec);
    RunConfig config = toy_config();
    config.theta = 64;
    config.k = 10;
    config.samples_per_class = 3;

    const BenchRow row = bench_run(cube, config, 3, "toy/w1");
    CHECK(row.label == "toy/w1");
    CHECK(row.pixels == 64);
    CHECK(row.workers == 1);
    CHECK(row.total_seconds > 0.0);
    for (const char* stage : {"flatten", "pca", "anchors", "anchor-graph", "pixel-graph",
                              "assemble", "solve", "metrics"})
        CHECK(row.stage_seconds.count(stage) == 1);

    const std::string table = format_bench_table({row});
    CHECK(table.find("toy/w1") != std::string::npos);
    CHECK(table.find("solve") != std::string::npos);
    CHECK(table.find("total_s") != std::string::npos);

    CHECK_THROWS_AS(bench_run(cube, config, 0, "zero"), Error);
}
