// Python module _hsilp: the pipeline and its main building blocks on numpy
// arrays. Cubes cross the boundary as (bands, height, width) float32 arrays,
// which is exactly the BSQ memory layout; label rasters as (height, width)
// uint16 with 0 = unlabeled.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hsilp/anchors.hpp"
#include "hsilp/clustering.hpp"
#include "hsilp/cube.hpp"
#include "hsilp/errors.hpp"
#include "hsilp/metrics.hpp"
#include "hsilp/noise.hpp"
#include "hsilp/pipeline.hpp"
#include "hsilp/sparse_graph.hpp"
#include "hsilp/synth.hpp"

namespace py = pybind11;
using namespace hsilp;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

HsiCube cube_from_arrays(const FloatArray& values, const std::optional<LabelArray>& truth) {
    if (values.ndim() != 3)
        throw Error(ErrorCode::invalid_argument, "cube array must have shape (bands, height, width)");
    HsiCube cube;
    cube.bands = std::uint32_t(values.shape(0));
    cube.height = std::uint32_t(values.shape(1));
    cube.width = std::uint32_t(values.shape(2));
    cube.values.resize(cube.value_count());
    std::memcpy(cube.values.data(), values.data(), cube.value_count() * sizeof(float));
    if (truth) {
        if (truth->ndim() != 2 || std::uint32_t(truth->shape(0)) != cube.height ||
            std::uint32_t(truth->shape(1)) != cube.width)
            throw Error(ErrorCode::invalid_argument, "truth array must have shape (height, width)");
        cube.truth.emplace(truth->data(), truth->data() + cube.pixel_count());
    }
    return cube;
}

py::array values_to_array(const HsiCube& cube) {
    py::array_t<float> out({py::ssize_t(cube.bands), py::ssize_t(cube.height),
                            py::ssize_t(cube.width)});
    std::memcpy(out.mutable_data(), cube.values.data(), cube.value_count() * sizeof(float));
    return out;
}

py::array labels_to_array(const std::vector<std::uint16_t>& labels, std::uint32_t height,
                          std::uint32_t width) {
    py::array_t<std::uint16_t> out({py::ssize_t(height), py::ssize_t(width)});
    std::memcpy(out.mutable_data(), labels.data(), labels.size() * sizeof(std::uint16_t));
    return out;
}

std::vector<std::uint16_t> labels_from_array(const LabelArray& arr) {
    if (arr.ndim() != 2)
        throw Error(ErrorCode::invalid_argument, "label array must have shape (height, width)");
    return std::vector<std::uint16_t>(arr.data(), arr.data() + arr.size());
}

PropagationMode parse_mode(const std::string& value) {
    if (value == "closed-form") return PropagationMode::closed_form;
    if (value == "iterative") return PropagationMode::iterative;
    throw Error(ErrorCode::invalid_argument, "unknown mode '" + value + "'");
}

LabelingMode parse_labeling(const std::string& value) {
    if (value == "ground-truth") return LabelingMode::ground_truth;
    if (value == "clustering") return LabelingMode::clustering;
    throw Error(ErrorCode::invalid_argument, "unknown labeling '" + value + "'");
}

// classify(): pipeline run on in-memory arrays. Every keyword defaults to the
// RunConfig default (after the preset, when one is given).
py::tuple classify(const FloatArray& values, const std::optional<LabelArray>& truth,
                   const std::string& preset, std::optional<Eigen::Index> d,
                   std::optional<std::size_t> theta, std::optional<double> sigma2,
                   std::optional<Eigen::Index> k, std::optional<double> alpha,
                   std::optional<std::string> mode, std::optional<double> tol,
                   std::optional<int> max_iter, std::optional<std::string> labeling,
                   std::optional<int> samples_per_class, std::optional<Eigen::Index> m,
                   std::optional<int> c, std::optional<double> beta, std::optional<int> h,
                   std::optional<int> cluster_max_iter, std::optional<bool> beta_adapt,
                   std::optional<std::string> noise, std::optional<double> noise_scale,
                   std::optional<std::uint64_t> noise_seed, std::optional<std::uint64_t> seed,
                   std::optional<int> workers, std::optional<bool> classify_all) {
    RunConfig config;
    if (!preset.empty()) apply_preset(config, preset);
    if (d) config.d = *d;
    if (theta) config.theta = *theta;
    if (sigma2) config.sigma2 = *sigma2;
    if (k) config.k = *k;
    if (alpha) config.alpha = *alpha;
    if (mode) config.mode = parse_mode(*mode);
    if (tol) config.tol = *tol;
    if (max_iter) config.max_iter = *max_iter;
    if (labeling) config.labeling = parse_labeling(*labeling);
    if (samples_per_class) config.samples_per_class = *samples_per_class;
    if (m) config.m = *m;
    if (c) config.c = *c;
    if (beta) config.beta = *beta;
    if (h) config.h = *h;
    if (cluster_max_iter) config.cluster_max_iter = *cluster_max_iter;
    if (beta_adapt) config.beta_adapt = *beta_adapt;
    if (noise) config.noise.model = parse_noise_model(*noise);
    if (noise_scale) config.noise.scale = *noise_scale;
    if (noise_seed) config.noise.seed = *noise_seed;
    if (seed) config.seed = *seed;
    if (workers) config.workers = *workers;
    if (classify_all) config.classify_all = *classify_all;

    const HsiCube cube = cube_from_arrays(values, truth);
    PipelineResult run;
    {
        py::gil_scoped_release release;
        run = run_pipeline_on(cube, config);
    }
    return py::make_tuple(labels_to_array(run.map, cube.height, cube.width),
                          run.report.to_json());
}

py::tuple make_blob_cube_py(std::uint32_t height, std::uint32_t width, std::uint32_t bands,
                            int classes, double spread, double separation, std::uint64_t seed) {
    SynthSpec spec;
    spec.height = height;
    spec.width = width;
    spec.bands = bands;
    spec.classes = classes;
    spec.spread = spread;
    spec.separation = separation;
    spec.seed = seed;
    const HsiCube cube = make_blob_cube(spec);
    return py::make_tuple(values_to_array(cube), labels_to_array(*cube.truth, height, width));
}

py::array add_noise_py(const FloatArray& values, const std::string& model, double scale,
                       std::uint64_t seed, int workers) {
    NoiseSpec spec;
    spec.model = parse_noise_model(model);
    spec.scale = scale;
    spec.seed = seed;
    const HsiCube cube = cube_from_arrays(values, std::nullopt);
    HsiCube noisy;
    {
        py::gil_scoped_release release;
        noisy = apply_noise(cube, spec, workers);
    }
    return values_to_array(noisy);
}

Eigen::MatrixXd anchor_graph_py(const Eigen::MatrixXd& X, const Eigen::MatrixXd& anchors,
                                double sigma2, int workers) {
    py::gil_scoped_release release;
    return build_anchor_graph(X, anchors, sigma2, workers).Z;
}

py::tuple kmeans_anchors_py(const Eigen::MatrixXd& X, Eigen::Index m, std::uint64_t seed,
                            int max_iter) {
    KmeansOptions opts;
    opts.seed = seed;
    opts.max_iter = max_iter;
    AnchorSet set;
    {
        py::gil_scoped_release release;
        set = kmeans(X, m, opts);
    }
    return py::make_tuple(set.features, set.source_rows);
}

py::dict cluster_anchors_py(const Eigen::MatrixXd& features, int c, double beta, int h,
                            double sigma2, int max_iter, bool beta_adapt, std::uint64_t seed) {
    ClusterConfig config;
    config.c = c;
    config.beta = beta;
    config.h = h > 0 ? h : int(std::min<Eigen::Index>(25, features.rows() - 1));
    config.max_iter = max_iter;
    config.beta_adapt = beta_adapt;
    config.seed = seed;
    ClusteringResult result;
    {
        py::gil_scoped_release release;
        const Eigen::MatrixXd W_ll = anchor_block(features, sigma2);
        result = run_clustering(W_ll, features, config);
    }
    py::dict out;
    out["labels"] = result.labels;
    out["converged"] = result.converged;
    out["repaired"] = result.repaired;
    out["iterations"] = result.iterations;
    out["final_beta"] = result.final_beta;
    out["objective"] = result.objective_trace;
    return out;
}

py::dict score_classification(const LabelArray& pred, const LabelArray& truth) {
    const std::vector<std::uint16_t> p = labels_from_array(pred);
    const std::vector<std::uint16_t> t = labels_from_array(truth);
    if (p.size() != t.size())
        throw Error(ErrorCode::invalid_argument, "prediction and truth shapes differ");

    int num_classes = 0;
    std::vector<int> pred0(p.size(), 0), truth0(p.size(), 0);
    std::vector<std::uint8_t> mask(p.size(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (t[i] == 0 || p[i] == 0) continue;  // unlabeled truth / unclassified output
        mask[i] = 1;
        pred0[i] = int(p[i]) - 1;
        truth0[i] = int(t[i]) - 1;
        num_classes = std::max({num_classes, int(t[i]), int(p[i])});
    }
    const ClassificationMetrics metrics = classification_metrics(pred0, truth0, mask, num_classes);
    py::dict out;
    out["oa"] = metrics.oa;
    out["aa"] = metrics.aa;
    out["kappa"] = metrics.kappa;
    out["per_class"] = metrics.per_class;
    return out;
}

py::tuple load_cube_py(const std::string& path) {
    const HsiCube cube = load_cube(path);
    return py::make_tuple(values_to_array(cube), cube.height, cube.width);
}

void save_cube_py(const FloatArray& values, const std::string& path) {
    save_cube(cube_from_arrays(values, std::nullopt), path);
}

py::array load_labels_py(const std::string& path) {
    const std::vector<std::uint16_t> labels = load_labels(path);
    // HSL1 stores height/width; re-read the header for the shape.
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    std::uint32_t height = 0, width = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&height), 4);
    in.read(reinterpret_cast<char*>(&width), 4);
    return labels_to_array(labels, height, width);
}

void save_labels_py(const LabelArray& labels, const std::string& path) {
    save_labels(labels_from_array(labels), std::uint32_t(labels.shape(0)),
                std::uint32_t(labels.shape(1)), path);
}

}  // namespace

PYBIND11_MODULE(_hsilp, module) {
    module.doc() = "Anchor-graph label propagation for hyperspectral cubes";

    py::register_exception<Error>(module, "HsilpError");

    module.def("classify", &classify, py::arg("values"), py::arg("truth") = py::none(),
               py::arg("preset") = "", py::arg("d") = py::none(), py::arg("theta") = py::none(),
               py::arg("sigma2") = py::none(), py::arg("k") = py::none(),
               py::arg("alpha") = py::none(), py::arg("mode") = py::none(),
               py::arg("tol") = py::none(), py::arg("max_iter") = py::none(),
               py::arg("labeling") = py::none(), py::arg("samples_per_class") = py::none(),
               py::arg("m") = py::none(), py::arg("c") = py::none(), py::arg("beta") = py::none(),
               py::arg("h") = py::none(), py::arg("cluster_max_iter") = py::none(),
               py::arg("beta_adapt") = py::none(), py::arg("noise") = py::none(),
               py::arg("noise_scale") = py::none(), py::arg("noise_seed") = py::none(),
               py::arg("seed") = py::none(), py::arg("workers") = py::none(),
               py::arg("classify_all") = py::none(),
               "Run the full pipeline on a (bands, height, width) cube; returns "
               "(class map, report JSON string)");

    module.def("make_blob_cube", &make_blob_cube_py, py::arg("height") = 32,
               py::arg("width") = 32, py::arg("bands") = 8, py::arg("classes") = 3,
               py::arg("spread") = 0.02, py::arg("separation") = 0.6, py::arg("seed") = 0,
               "Seeded synthetic scene; returns (values, truth)");

    module.def("add_noise", &add_noise_py, py::arg("values"), py::arg("model"), py::arg("scale"),
               py::arg("seed") = 0, py::arg("workers") = 1,
               "Sensor-noise simulation: gaussian / impulse / poisson, [0,1]-clamped");

    module.def("anchor_graph", &anchor_graph_py, py::arg("X"), py::arg("anchors"),
               py::arg("sigma2"), py::arg("workers") = 1,
               "Row-stochastic pixel-to-anchor Gaussian-kernel similarities");

    module.def("kmeans_anchors", &kmeans_anchors_py, py::arg("X"), py::arg("m"),
               py::arg("seed") = 0, py::arg("max_iter") = 100,
               "k-means++ anchors snapped onto dataset rows; returns (features, source_rows)");

    module.def("cluster_anchors", &cluster_anchors_py, py::arg("features"), py::arg("c"),
               py::arg("beta") = 30.0, py::arg("h") = 0, py::arg("sigma2") = 1.0,
               py::arg("max_iter") = 50, py::arg("beta_adapt") = true, py::arg("seed") = 0,
               "Rank-constrained graph clustering of anchor features");

    module.def("score_classification", &score_classification, py::arg("pred"), py::arg("truth"),
               "OA / AA / kappa of a class map against a truth raster (0 = ignored)");

    module.def("load_cube", &load_cube_py, py::arg("path"),
               "Read an HSC1 cube; returns (values, height, width)");
    module.def("save_cube", &save_cube_py, py::arg("values"), py::arg("path"));
    module.def("load_labels", &load_labels_py, py::arg("path"),
               "Read an HSL1 raster as a (height, width) uint16 array");
    module.def("save_labels", &save_labels_py, py::arg("labels"), py::arg("path"));
}
