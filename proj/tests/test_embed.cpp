#include <cmath>
#include <set>
#include <vector>

#include "catch2/catch_amalgamated.hpp"

#include "support/oracles.hpp"
#include "support/spaces.hpp"
#include "umetric/embed.hpp"
#include "umetric/gen.hpp"

using umetric::BallTree;
using umetric::EmbeddingTarget;
using umetric::SparseEmbedding;
using umetric::build_tree;

namespace {

umetric::FiniteMetricSpace gen(umetric::GenSpec::Kind kind, std::size_t n, std::uint64_t seed) {
    umetric::GenSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.seed = seed;
    return umetric::generate(spec);
}

double coord(const SparseEmbedding& emb, std::size_t point, int node) {
    for (const auto& [n, v] : emb.vectors[point])
        if (n == node) return v;
    return 0.0;
}

}  // namespace

TEST_CASE("three-point coordinates for p = 2") {
    const SparseEmbedding emb = umetric::embed_lp(build_tree(testsup::triple()), 2.0);
    CHECK(emb.dimension == 4);
    CHECK(emb.nodes == std::vector<int>{1, 2, 3, 4});
    CHECK(coord(emb, 0, 1) == Catch::Approx(std::sqrt(1.5)).margin(1e-12));
    CHECK(coord(emb, 0, 2) == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
    CHECK(coord(emb, 1, 1) == Catch::Approx(std::sqrt(1.5)).margin(1e-12));
    CHECK(coord(emb, 1, 3) == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
    CHECK(coord(emb, 2, 4) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    CHECK(coord(emb, 2, 1) == 0.0);

    CHECK(umetric::embedded_distance(emb, 0, 1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(umetric::embedded_distance(emb, 0, 2) == Catch::Approx(2.0).margin(1e-12));
    CHECK(umetric::embedded_distance(emb, 1, 2) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("three-point coordinates for p = 1") {
    const SparseEmbedding emb = umetric::embed_lp(build_tree(testsup::triple()), 1.0);
    CHECK(coord(emb, 0, 1) == Catch::Approx(0.5).margin(1e-12));
    CHECK(coord(emb, 0, 2) == Catch::Approx(0.5).margin(1e-12));
    CHECK(coord(emb, 1, 1) == Catch::Approx(0.5).margin(1e-12));
    CHECK(coord(emb, 1, 3) == Catch::Approx(0.5).margin(1e-12));
    CHECK(coord(emb, 2, 4) == Catch::Approx(1.0).margin(1e-12));
    CHECK(umetric::embedded_distance(emb, 0, 1) == Catch::Approx(1.0).margin(1e-12));
    CHECK(umetric::embedded_distance(emb, 0, 2) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("three-point coordinates for c0") {
    const SparseEmbedding emb = umetric::embed_c0(build_tree(testsup::triple()));
    CHECK(emb.target.kind == EmbeddingTarget::Kind::c0);
    CHECK(coord(emb, 0, 1) == 2.0);
    CHECK(coord(emb, 0, 2) == 1.0);
    CHECK(coord(emb, 1, 1) == 2.0);
    CHECK(coord(emb, 1, 3) == 1.0);
    CHECK(coord(emb, 2, 4) == 2.0);
    CHECK(umetric::embedded_distance(emb, 0, 1) == 1.0);
    CHECK(umetric::embedded_distance(emb, 0, 2) == 2.0);
    CHECK(umetric::embedded_norm(emb, 0) == 2.0);
}

TEST_CASE("p below 1 is rejected") {
    const BallTree tree = build_tree(testsup::triple());
    CHECK_THROWS_AS(umetric::embed_lp(tree, 0.5), umetric::DomainError);
    CHECK_THROWS_AS(umetric::embed_lp(tree, 0.0), umetric::DomainError);
    CHECK_NOTHROW(umetric::embed_lp(tree, 1.0));
}

TEST_CASE("sparse evaluation matches the dense brute force") {
    const auto space = gen(umetric::GenSpec::Kind::dendrogram, 22, 4);
    const BallTree tree = build_tree(space);
    for (EmbeddingTarget target : {EmbeddingTarget::Lp(1.0), EmbeddingTarget::Lp(2.0),
                                   EmbeddingTarget::Lp(3.0), EmbeddingTarget::C0()}) {
        const SparseEmbedding emb = umetric::make_embedding(tree, target);
        for (std::size_t x = 0; x < space.size(); ++x) {
            CHECK(umetric::embedded_norm(emb, x) ==
                  Catch::Approx(oracles::dense_norm(emb, x)).epsilon(1e-12));
            for (std::size_t y = x + 1; y < space.size(); ++y)
                CHECK(umetric::embedded_distance(emb, x, y) ==
                      Catch::Approx(oracles::dense_distance(emb, x, y)).epsilon(1e-12));
        }
    }
}

TEST_CASE("embedding is an isometry on generated ultrametrics") {
    for (std::uint64_t seed : {1, 2}) {
        for (auto kind : {umetric::GenSpec::Kind::dendrogram, umetric::GenSpec::Kind::padic}) {
            const auto space = gen(kind, 30, seed);
            const BallTree tree = build_tree(space);
            for (double p : {1.0, 1.5, 2.0, 10.0}) {
                const auto check = umetric::isometry_check(space, umetric::embed_lp(tree, p));
                CHECK(check.pass);
                CHECK(check.max_rel_error <= 1e-9);
            }
            const auto check = umetric::isometry_check(space, umetric::embed_c0(tree));
            CHECK(check.pass);
        }
    }
}

TEST_CASE("every point has the same norm") {
    const auto space = gen(umetric::GenSpec::Kind::dendrogram, 28, 8);
    const BallTree tree = build_tree(space);
    const double r0 = tree.node(tree.root).radius;
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const SparseEmbedding emb = umetric::embed_lp(tree, p);
        const double want = std::pow(std::pow(r0, p) / 2.0, 1.0 / p);
        for (std::size_t x = 0; x < space.size(); ++x)
            CHECK(umetric::embedded_norm(emb, x) == Catch::Approx(want).epsilon(1e-9));
    }
    const SparseEmbedding emb = umetric::embed_c0(tree);
    for (std::size_t x = 0; x < space.size(); ++x)
        CHECK(umetric::embedded_norm(emb, x) == r0);
}

TEST_CASE("supports follow the root-to-leaf paths") {
    const auto space = gen(umetric::GenSpec::Kind::padic, 27, 0);
    const BallTree tree = build_tree(space);
    const SparseEmbedding emb = umetric::embed_lp(tree, 2.0);
    CHECK(emb.dimension == tree.nodes.size() - 1);
    for (std::size_t x = 0; x < space.size(); ++x) {
        const auto path = umetric::path_to_leaf(tree, x);
        const std::set<int> allowed(path.begin() + 1, path.end());
        CHECK(emb.vectors[x].size() <= allowed.size());
        int prev = -1;
        for (const auto& [node, value] : emb.vectors[x]) {
            CHECK(allowed.count(node) == 1);
            CHECK(value > 0.0);
            CHECK(node > prev);
            prev = node;
        }
    }
}

TEST_CASE("corrupting one coordinate fails the isometry check") {
    const auto space = testsup::triple();
    SparseEmbedding emb = umetric::embed_lp(build_tree(space), 1.0);
    emb.vectors[0][0].second += 1e-6;
    const auto check = umetric::isometry_check(space, emb);
    CHECK_FALSE(check.pass);
    CHECK(check.max_rel_error > 1e-7);
    const bool involves_a =
        check.worst_pair.first == "a" || check.worst_pair.second == "a";
    CHECK(involves_a);
}

TEST_CASE("isometry check matches points by label") {
    const auto space = testsup::triple();
    const SparseEmbedding emb = umetric::embed_lp(build_tree(space), 2.0);
    // Same labels listed in a different point order.
    const auto relabeled =
        testsup::space_of({"c", "a", "b"}, {{0, 2, 2}, {2, 0, 1}, {2, 1, 0}});
    CHECK(umetric::isometry_check(relabeled, emb).pass);

    const auto foreign = testsup::space_of({"a", "b", "z"}, {{0, 1, 2}, {1, 0, 2}, {2, 2, 0}});
    CHECK_THROWS_AS(umetric::isometry_check(foreign, emb), umetric::DomainError);
    const auto smaller = testsup::space_of({"a", "b"}, {{0, 1}, {1, 0}});
    CHECK_THROWS_AS(umetric::isometry_check(smaller, emb), umetric::DomainError);
}

TEST_CASE("ball restriction keeps the embedding consistent") {
    const auto space = testsup::triple();
    for (EmbeddingTarget target :
         {EmbeddingTarget::Lp(1.0), EmbeddingTarget::Lp(2.0), EmbeddingTarget::C0()}) {
        CHECK(umetric::extend_check(space, 0, 1.0, 2.0, target));
        CHECK(umetric::extend_check(space, 0, 0.0, 2.0, target));
        CHECK(umetric::extend_check(space, 0, 1.0, 1.0, target));
        CHECK(umetric::extend_check(space, 2, 0.0, 2.0, target));
    }
}

TEST_CASE("ball restriction holds across generated spaces") {
    for (std::uint64_t seed : {3, 6}) {
        const auto space = gen(umetric::GenSpec::Kind::dendrogram, 24, seed);
        const auto values = space.distance_values();
        const double lo = values[values.size() / 3];
        const double hi = values[(2 * values.size()) / 3];
        for (std::size_t center : {std::size_t{0}, space.size() / 2}) {
            CHECK(umetric::extend_check(space, center, lo, hi, EmbeddingTarget::Lp(2.0)));
            CHECK(umetric::extend_check(space, center, lo, hi, EmbeddingTarget::Lp(1.0)));
            CHECK(umetric::extend_check(space, center, lo, hi, EmbeddingTarget::C0()));
        }
    }
}

TEST_CASE("extend_check validates its radii") {
    const auto space = testsup::triple();
    CHECK_THROWS_AS(umetric::extend_check(space, 0, -1.0, 2.0, EmbeddingTarget::Lp(2.0)),
                    umetric::DomainError);
    CHECK_THROWS_AS(umetric::extend_check(space, 0, 2.0, 1.0, EmbeddingTarget::Lp(2.0)),
                    umetric::DomainError);
}
