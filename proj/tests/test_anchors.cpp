#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "hsilp/anchors.hpp"
#include "hsilp/errors.hpp"

using namespace hsilp;

namespace {

Eigen::MatrixXd random_stochastic(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.05, 1.0);
    Eigen::MatrixXd z(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            z(i, j) = dist(rng);
            sum += z(i, j);
        }
        z.row(i) /= sum;
    }
    return z;
}

// Exhaustive best 2-partition by inertia over all 2^n assignments (n small).
double best_two_partition_inertia(const Eigen::MatrixXd& points) {
    const int n = static_cast<int>(points.rows());
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        Eigen::RowVectorXd c0 = Eigen::RowVectorXd::Zero(points.cols());
        Eigen::RowVectorXd c1 = Eigen::RowVectorXd::Zero(points.cols());
        int n0 = 0, n1 = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                c1 += points.row(i);
                ++n1;
            } else {
                c0 += points.row(i);
                ++n0;
            }
        }
        c0 /= double(n0);
        c1 /= double(n1);
        double inertia = 0.0;
        for (int i = 0; i < n; ++i)
            inertia += (mask & (1u << i)) ? (points.row(i) - c1).squaredNorm()
                                          : (points.row(i) - c0).squaredNorm();
        best = std::min(best, inertia);
    }
    return best;
}

double kmeans_inertia(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < centers.rows(); ++j)
            best = std::min(best, (points.row(i) - centers.row(j)).squaredNorm());
        inertia += best;
    }
    return inertia;
}

}  // namespace

TEST_CASE("kmeans with m = n returns every row as its own anchor") {
    Eigen::MatrixXd data(4, 2);
    data << 0, 0, 1, 0, 0, 1, 5, 5;
    KmeansOptions opts;
    const AnchorSet set = kmeans(data, 4, opts);
    REQUIRE(set.count() == 4);
    std::set<Eigen::Index> rows(set.source_rows.begin(), set.source_rows.end());
    CHECK(rows.size() == 4);
    for (Eigen::Index a = 0; a < 4; ++a) {
        const Eigen::Index src = set.source_rows[static_cast<std::size_t>(a)];
        CHECK((set.features.row(a) - data.row(src)).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("kmeans finds the optimal 2-partition of separated blobs") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist(0.0, 0.1);
    Eigen::MatrixXd data(10, 2);
    for (Eigen::Index i = 0; i < 5; ++i) {
        data(i, 0) = dist(rng);
        data(i, 1) = dist(rng);
        data(i + 5, 0) = 8.0 + dist(rng);
        data(i + 5, 1) = 8.0 + dist(rng);
    }
    KmeansOptions opts;
    opts.seed = 1;
    const AnchorSet set = kmeans(data, 2, opts);

    // One anchor per blob.
    const bool a0_left = set.features(0, 0) < 4.0;
    const bool a1_left = set.features(1, 0) < 4.0;
    CHECK(a0_left != a1_left);

    // Inertia of the unsnapped optimum from exhaustive search; snapped anchors
    // can be slightly worse than centroids but must stay in the same basin.
    const double best = best_two_partition_inertia(data);
    CHECK(kmeans_inertia(data, set.features) <= best * 3.0 + 1e-9);
}

TEST_CASE("kmeans anchors always coincide with dataset rows") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd data(40, 3);
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) data(i, j) = dist(rng);
    KmeansOptions opts;
    opts.seed = 9;
    const AnchorSet set = kmeans(data, 7, opts);
    REQUIRE(set.count() == 7);
    std::set<Eigen::Index> distinct(set.source_rows.begin(), set.source_rows.end());
    CHECK(distinct.size() == 7);
    for (Eigen::Index a = 0; a < 7; ++a)
        CHECK((set.features.row(a) -
               data.row(set.source_rows[static_cast<std::size_t>(a)])).norm() == 0.0);
}

TEST_CASE("kmeans is deterministic under seed and sensitive to it") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Random(60, 4);
    KmeansOptions opts;
    opts.seed = 5;
    const AnchorSet a = kmeans(data, 8, opts);
    const AnchorSet b = kmeans(data, 8, opts);
    CHECK(a.source_rows == b.source_rows);
    CHECK((a.features - b.features).norm() == 0.0);
}

TEST_CASE("kmeans rejects m > n and m < 1") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Random(5, 2);
    KmeansOptions opts;
    CHECK_THROWS_AS(kmeans(data, 6, opts), Error);
    CHECK_THROWS_AS(kmeans(data, 0, opts), Error);
}

TEST_CASE("kmeans survives duplicate points (forced empty clusters)") {
    Eigen::MatrixXd data(6, 2);
    data << 1, 1, 1, 1, 1, 1, 9, 9, 9, 9, 2, 2;
    KmeansOptions opts;
    opts.seed = 2;
    const AnchorSet set = kmeans(data, 3, opts);
    REQUIRE(set.count() == 3);
    std::set<Eigen::Index> distinct(set.source_rows.begin(), set.source_rows.end());
    CHECK(distinct.size() == 3);
}

TEST_CASE("anchor graph rows are stochastic and kernel-shaped") {
    Eigen::MatrixXd data(3, 1);
    data << 0.0, 1.0, 10.0;
    Eigen::MatrixXd anchors(2, 1);
    anchors << 0.0, 1.0;

    const AnchorGraph graph = build_anchor_graph(data, anchors, 1.0, 1);
    REQUIRE(graph.Z.rows() == 3);
    REQUIRE(graph.Z.cols() == 2);
    CHECK(graph.row_normalized);
    CHECK(graph.sigma2 == 1.0);
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(graph.Z.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));

    // Hand evaluation: z = exp(-dist^2 / (2 sigma^2)), then normalize.
    // Pixel 0: dists^2 = {0, 1} -> kernels {1, exp(-0.5)}.
    const double k01 = std::exp(-0.5);
    CHECK(graph.Z(0, 0) == doctest::Approx(1.0 / (1.0 + k01)).epsilon(1e-12));
    CHECK(graph.Z(0, 1) == doctest::Approx(k01 / (1.0 + k01)).epsilon(1e-12));
    // Pixel 2: dists^2 = {100, 81} -> kernels {exp(-50), exp(-40.5)}.
    const double k20 = std::exp(-50.0), k21 = std::exp(-40.5);
    CHECK(graph.Z(2, 0) == doctest::Approx(k20 / (k20 + k21)).epsilon(1e-12));
    CHECK(graph.Z(2, 1) == doctest::Approx(k21 / (k20 + k21)).epsilon(1e-12));
}

TEST_CASE("anchor graph: coincident pixel concentrates, equidistant spreads") {
    Eigen::MatrixXd anchors(3, 2);
    anchors << 0, 0, 10, 0, 5, 8;
    SUBCASE("pixel on an anchor") {
        Eigen::MatrixXd pixel(1, 2);
        pixel << 10, 0;
        const AnchorGraph g = build_anchor_graph(pixel, anchors, 0.05, 1);
        CHECK(g.Z(0, 1) > 0.999);
    }
    SUBCASE("pixel equidistant from all anchors") {
        // Circumcenter of the three anchors.
        Eigen::MatrixXd pixel(1, 2);
        pixel << 5.0, 2.4375;
        const AnchorGraph g = build_anchor_graph(pixel, anchors, 1.0, 1);
        for (Eigen::Index j = 0; j < 3; ++j)
            CHECK(g.Z(0, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    }
}

TEST_CASE("anchor graph underflow rows become uniform with a report") {
    Eigen::MatrixXd data(2, 1);
    data << 0.0, 1e6;  // kernel exp(-1e12/2e-4) underflows to zero
    Eigen::MatrixXd anchors(2, 1);
    anchors << 0.0, 1.0;
    const AnchorGraph g = build_anchor_graph(data, anchors, 1e-4, 1);
    REQUIRE(g.underflow_rows == std::vector<Eigen::Index>{1});
    CHECK(g.Z(1, 0) == doctest::Approx(0.5));
    CHECK(g.Z(1, 1) == doctest::Approx(0.5));
    CHECK(g.Z(0, 0) > 0.999);  // unaffected row
}

TEST_CASE("anchor graph worker-count independence") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Random(101, 3);
    Eigen::MatrixXd anchors = data.topRows(7);
    const AnchorGraph g1 = build_anchor_graph(data, anchors, 0.5, 1);
    const AnchorGraph g5 = build_anchor_graph(data, anchors, 0.5, 5);
    const AnchorGraph g8 = build_anchor_graph(data, anchors, 0.5, 8);
    CHECK((g1.Z - g5.Z).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g1.Z - g8.Z).cwiseAbs().maxCoeff() == 0.0);
    CHECK(g1.underflow_rows == g5.underflow_rows);
}

TEST_CASE("anchor graph rejects bad bandwidth and shapes") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Random(4, 2);
    Eigen::MatrixXd anchors = Eigen::MatrixXd::Random(2, 2);
    CHECK_THROWS_AS(build_anchor_graph(data, anchors, 0.0, 1), Error);
    CHECK_THROWS_AS(build_anchor_graph(data, anchors, -1.0, 1), Error);
    Eigen::MatrixXd bad_anchors = Eigen::MatrixXd::Random(2, 3);
    CHECK_THROWS_AS(build_anchor_graph(data, bad_anchors, 1.0, 1), Error);
}

TEST_CASE("one-hot anchor labels") {
    const AnchorLabels labels = AnchorLabels::one_hot({2, 0, 1, 1}, 3);
    REQUIRE(labels.U.rows() == 4);
    REQUIRE(labels.U.cols() == 3);
    CHECK(labels.U(0, 2) == 1.0);
    CHECK(labels.U(1, 0) == 1.0);
    CHECK(labels.U(2, 1) == 1.0);
    CHECK(labels.U(3, 1) == 1.0);
    CHECK(labels.U.sum() == doctest::Approx(4.0));
    CHECK_THROWS_AS(AnchorLabels::one_hot({3}, 3), Error);
    CHECK_THROWS_AS(AnchorLabels::one_hot({-1}, 3), Error);
}

TEST_CASE("initial labels equal a naive triple-loop product") {
    const Eigen::MatrixXd Z = random_stochastic(5, 3, 21);
    Eigen::MatrixXd U(3, 2);
    U << 1, 0, 0, 1, 1, 0;

    AnchorGraph graph;
    graph.Z = Z;
    graph.sigma2 = 1.0;
    graph.row_normalized = true;
    AnchorLabels labels;
    labels.U = U;
    const Eigen::MatrixXd F0 = initial_labels(graph, labels);

    Eigen::MatrixXd naive = Eigen::MatrixXd::Zero(5, 2);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index c = 0; c < 2; ++c)
            for (Eigen::Index j = 0; j < 3; ++j) naive(i, c) += Z(i, j) * U(j, c);
    CHECK((F0 - naive).cwiseAbs().maxCoeff() < 1e-15);
    for (Eigen::Index i = 0; i < 5; ++i)
        CHECK(F0.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("initial labels special rows") {
    Eigen::MatrixXd U(3, 3);
    U << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    AnchorLabels labels;
    labels.U = U;

    AnchorGraph graph;
    graph.sigma2 = 1.0;
    graph.row_normalized = true;
    graph.Z.resize(2, 3);
    graph.Z << 0, 1, 0,                          // one-hot at anchor 1
        1.0 / 3, 1.0 / 3, 1.0 / 3;               // uniform
    const Eigen::MatrixXd F0 = initial_labels(graph, labels);
    CHECK((F0.row(0) - U.row(1)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(F0(1, 0) == doctest::Approx(1.0 / 3));
    CHECK(F0(1, 1) == doctest::Approx(1.0 / 3));
}

TEST_CASE("anchor affinity factored form matches the dense product oracle") {
    const Eigen::MatrixXd Z = random_stochastic(7, 4, 33);
    AnchorGraph graph;
    graph.Z = Z;
    graph.sigma2 = 1.0;
    graph.row_normalized = true;
    const FactoredAffinity wa = anchor_affinity(graph);

    // Dense oracle: W = Z diag(1/colsum) Z^T, computed element by element.
    const Eigen::VectorXd delta = Z.colwise().sum();
    Eigen::MatrixXd oracle(7, 7);
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j) {
            double sum = 0.0;
            for (Eigen::Index a = 0; a < 4; ++a) sum += Z(i, a) * Z(j, a) / delta(a);
            oracle(i, j) = sum;
        }

    CHECK((wa.dense() - oracle).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index i = 0; i < 7; ++i) {
        CHECK((wa.row(i).transpose() - oracle.row(i)).cwiseAbs().maxCoeff() < 1e-12);
    }
    const Eigen::MatrixXd block = wa.row_block(2, 5);
    CHECK((block - oracle.middleRows(2, 3)).cwiseAbs().maxCoeff() < 1e-12);

    // apply = dense * v
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(7, -1.0, 1.0);
    CHECK((wa.apply(v) - oracle * v).cwiseAbs().maxCoeff() < 1e-12);

    // Stochasticity and symmetry of the dense form.
    for (Eigen::Index i = 0; i < 7; ++i)
        CHECK(oracle.row(i).sum() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK((oracle - oracle.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("anchor affinity with identity Z is the identity") {
    AnchorGraph graph;
    graph.Z = Eigen::MatrixXd::Identity(4, 4);
    graph.sigma2 = 1.0;
    graph.row_normalized = true;
    const FactoredAffinity wa = anchor_affinity(graph);
    CHECK((wa.dense() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(wa.dropped_anchors.empty());
}

TEST_CASE("anchor affinity drops unused anchors and keeps rows stochastic") {
    // Column 2 is all zero: an anchor no pixel relates to.
    Eigen::MatrixXd Z(3, 3);
    Z << 0.5, 0.5, 0, 0.25, 0.75, 0, 0.9, 0.1, 0;
    AnchorGraph graph;
    graph.Z = Z;
    graph.sigma2 = 1.0;
    graph.row_normalized = true;
    const FactoredAffinity wa = anchor_affinity(graph);
    CHECK(wa.dropped_anchors == std::vector<Eigen::Index>{2});
    const Eigen::MatrixXd dense = wa.dense();
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(dense.row(i).sum() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("anchor affinity requires a row-normalized graph") {
    AnchorGraph graph;
    graph.Z = Eigen::MatrixXd::Constant(2, 2, 0.7);
    graph.sigma2 = 1.0;
    graph.row_normalized = false;
    CHECK_THROWS_AS(anchor_affinity(graph), Error);
}
