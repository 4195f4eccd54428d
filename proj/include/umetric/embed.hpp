#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "umetric/ball_tree.hpp"
#include "umetric/errors.hpp"
#include "umetric/space.hpp"
#include "umetric/tolerance.hpp"

namespace umetric {

struct EmbeddingTarget {
    enum class Kind { lp, c0 };
    Kind kind = Kind::lp;
    double p = 2.0;  // meaningful only for kind == lp

    static EmbeddingTarget Lp(double p) { return {Kind::lp, p}; }
    static EmbeddingTarget C0() { return {Kind::c0, 0.0}; }
};

// Sparse coordinates, one coordinate per non-root tree node. A point's
// support is the set of nodes on its root-to-leaf path with a nonzero
// value, listed ascending by node id (equivalently by depth).
struct SparseEmbedding {
    EmbeddingTarget target;
    std::size_t dimension = 0;  // number of non-root tree nodes
    std::vector<int> nodes;     // coordinate order
    std::vector<std::string> labels;
    std::vector<std::vector<std::pair<int, double>>> vectors;
    std::string tree_ref;
};

struct IsometryCheck {
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
    std::pair<std::string, std::string> worst_pair;
    bool pass = true;
};

namespace detail {

inline SparseEmbedding embedding_shell(const BallTree& tree, EmbeddingTarget target) {
    SparseEmbedding emb;
    emb.target = target;
    emb.labels = tree.labels;
    emb.tree_ref = tree_fingerprint(tree);
    for (const auto& node : tree.nodes)
        if (node.parent >= 0) emb.nodes.push_back(node.id);
    std::sort(emb.nodes.begin(), emb.nodes.end());
    emb.dimension = emb.nodes.size();
    emb.vectors.resize(tree.point_count());
    return emb;
}

}  // namespace detail

// The isometric l_p embedding: the coordinate of point x at a non-root path
// node v is ((r_parent^p - r_v^p) / 2)^(1/p). Zero coordinates are omitted.
inline SparseEmbedding embed_lp(const BallTree& tree, double p) {
    if (!(p >= 1.0)) throw DomainError("p must be >= 1");
    SparseEmbedding emb = detail::embedding_shell(tree, EmbeddingTarget::Lp(p));

    std::vector<double> radius_pow(tree.nodes.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i)
        radius_pow[i] = std::pow(tree.nodes[i].radius, p);

    for (std::size_t x = 0; x < tree.point_count(); ++x) {
        for (int v : path_to_leaf(tree, x)) {
            const int parent = tree.node(v).parent;
            if (parent < 0) continue;
            // Mathematically >= 0 by the strict radius decrease; clamp float noise.
            const double diff = std::max(
                0.0, radius_pow[static_cast<std::size_t>(parent)] -
                         radius_pow[static_cast<std::size_t>(v)]);
            const double value = std::pow(diff / 2.0, 1.0 / p);
            if (value > 0.0) emb.vectors[x].emplace_back(v, value);
        }
    }
    return emb;
}

// The c_0 embedding: the coordinate of point x at a non-root path node v is
// the radius of v's parent; distances live in the sup norm.
inline SparseEmbedding embed_c0(const BallTree& tree) {
    SparseEmbedding emb = detail::embedding_shell(tree, EmbeddingTarget::C0());
    for (std::size_t x = 0; x < tree.point_count(); ++x) {
        for (int v : path_to_leaf(tree, x)) {
            const int parent = tree.node(v).parent;
            if (parent < 0) continue;
            const double value = tree.node(parent).radius;
            if (value > 0.0) emb.vectors[x].emplace_back(v, value);
        }
    }
    return emb;
}

inline SparseEmbedding make_embedding(const BallTree& tree, EmbeddingTarget target) {
    return target.kind == EmbeddingTarget::Kind::lp ? embed_lp(tree, target.p) : embed_c0(tree);
}

// Norm of the difference of two sparse vectors under the embedding's target.
inline double embedded_distance(const SparseEmbedding& emb, std::size_t i, std::size_t j) {
    const auto& u = emb.vectors[i];
    const auto& v = emb.vectors[j];
    const bool sup = emb.target.kind == EmbeddingTarget::Kind::c0;
    const double p = emb.target.p;
    double acc = 0.0;
    std::size_t a = 0, b = 0;
    auto feed = [&](double delta) {
        delta = std::abs(delta);
        if (sup)
            acc = std::max(acc, delta);
        else
            acc += std::pow(delta, p);
    };
    while (a < u.size() || b < v.size()) {
        if (b == v.size() || (a < u.size() && u[a].first < v[b].first))
            feed(u[a++].second);
        else if (a == u.size() || v[b].first < u[a].first)
            feed(v[b++].second);
        else {
            feed(u[a].second - v[b].second);
            ++a, ++b;
        }
    }
    return sup ? acc : std::pow(acc, 1.0 / p);
}

// p-norm (or sup norm) of one embedded point.
inline double embedded_norm(const SparseEmbedding& emb, std::size_t i) {
    const bool sup = emb.target.kind == EmbeddingTarget::Kind::c0;
    double acc = 0.0;
    for (const auto& [node, value] : emb.vectors[i])
        acc = sup ? std::max(acc, std::abs(value)) : acc + std::pow(std::abs(value), emb.target.p);
    return sup ? acc : std::pow(acc, 1.0 / emb.target.p);
}

// Compares every embedded pair distance against the space. Points are
// matched by label, so the embedding may order them differently.
inline IsometryCheck isometry_check(const FiniteMetricSpace& space, const SparseEmbedding& emb,
                                    Tolerance tol = {}) {
    if (emb.labels.size() != space.size())
        throw DomainError("embedding and space have different point counts");
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < emb.labels.size(); ++i) pos[emb.labels[i]] = i;

    IsometryCheck check;
    const std::size_t n = space.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto it = pos.find(space.label(i));
        if (it == pos.end())
            throw DomainError("embedding is missing point '" + space.label(i) + "'");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double want = space(i, j);
            const double got =
                embedded_distance(emb, pos[space.label(i)], pos[space.label(j)]);
            const double abs_err = std::abs(got - want);
            const double rel_err = want > 0.0 ? abs_err / want : (got == 0.0 ? 0.0 : HUGE_VAL);
            check.max_abs_error = std::max(check.max_abs_error, abs_err);
            if (rel_err > check.max_rel_error) {
                check.max_rel_error = rel_err;
                check.worst_pair = {space.label(i), space.label(j)};
            }
        }
    }
    check.pass = check.max_rel_error <= tol.rel;
    return check;
}

// Consistency of the embedding under ball extension: the embedding of the
// ball B(center, R) must match the embedding of B(center, R') restricted to
// the smaller ball, up to a coordinate correspondence plus a shift on the
// coordinates shared by every point of the smaller ball. Supports are path
// sets ordered by depth, so the correspondence is the positional alignment
// of the deepest |f1-support| coordinates.
inline bool extend_check(const FiniteMetricSpace& space, std::size_t center, double R, double Rp,
                         EmbeddingTarget target, Tolerance tol = {}) {
    if (R < 0.0) throw DomainError("ball is empty: R must be >= 0");
    if (Rp < R) throw DomainError("R' must be >= R");

    const auto small_idx = closed_ball(space, center, R, tol);
    const auto large_idx = closed_ball(space, center, Rp, tol);
    const FiniteMetricSpace small = space.induced(small_idx);
    const FiniteMetricSpace large = space.induced(large_idx);

    const SparseEmbedding f1 = make_embedding(build_tree(small, tol), target);
    const SparseEmbedding f2 = make_embedding(build_tree(large, tol), target);

    std::unordered_map<std::string, std::size_t> pos2;
    for (std::size_t i = 0; i < f2.labels.size(); ++i) pos2[f2.labels[i]] = i;
    std::vector<std::size_t> restrict(small.size());
    for (std::size_t i = 0; i < small.size(); ++i) restrict[i] = pos2.at(small.label(i));

    // (i) pairwise embedded distances agree.
    for (std::size_t i = 0; i < small.size(); ++i)
        for (std::size_t j = i + 1; j < small.size(); ++j)
            if (!tol.close(embedded_distance(f1, i, j),
                           embedded_distance(f2, restrict[i], restrict[j])))
                return false;

    // (ii) coordinate correspondence: per point, align supports by depth;
    // the unmatched prefix of f2 must be the same nodes and values for
    // every point (the shift), and the matched tail must pair equal values
    // through one injective node map (the permutation).
    std::optional<std::vector<std::pair<int, double>>> shared_prefix;
    std::unordered_map<int, int> node_map;
    std::unordered_set<int> used;
    for (std::size_t i = 0; i < small.size(); ++i) {
        const auto& v1 = f1.vectors[i];
        const auto& v2 = f2.vectors[restrict[i]];
        if (v2.size() < v1.size()) return false;
        const std::size_t offset = v2.size() - v1.size();

        std::vector<std::pair<int, double>> prefix(v2.begin(), v2.begin() + offset);
        if (!shared_prefix) {
            shared_prefix = prefix;
        } else {
            if (prefix.size() != shared_prefix->size()) return false;
            for (std::size_t k = 0; k < prefix.size(); ++k)
                if (prefix[k].first != (*shared_prefix)[k].first ||
                    !tol.close(prefix[k].second, (*shared_prefix)[k].second))
                    return false;
        }

        for (std::size_t k = 0; k < v1.size(); ++k) {
            const auto& [n1, val1] = v1[k];
            const auto& [n2, val2] = v2[offset + k];
            if (!tol.close(val1, val2)) return false;
            auto it = node_map.find(n1);
            if (it == node_map.end()) {
                if (!used.insert(n2).second) return false;
                node_map.emplace(n1, n2);
            } else if (it->second != n2) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace umetric
