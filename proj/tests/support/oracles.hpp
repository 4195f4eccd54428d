#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here favours directness over speed: closures instead
// of spanning trees, full enumeration instead of branch and bound.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "umetric/embed.hpp"
#include "umetric/space.hpp"

namespace oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimax path values by Floyd-Warshall over the (min, max) semiring.
inline std::vector<std::vector<double>> minimax_closure(const umetric::FiniteMetricSpace& space) {
    const std::size_t n = space.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = i == j ? 0.0 : space(i, j);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) m[i][j] = std::min(m[i][j], std::max(m[i][k], m[k][j]));
    return m;
}

// Distortion of the identity map onto the minimax closure.
inline double closure_distortion(const umetric::FiniteMetricSpace& space) {
    const auto m = minimax_closure(space);
    double d = 1.0;
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = i + 1; j < space.size(); ++j)
            d = std::max(d, space(i, j) / m[i][j]);
    return d;
}

// Calls fn once per partition of `mask` into at least two blocks.
inline void for_each_proper_partition(
    std::uint32_t mask, const std::function<void(const std::vector<std::uint32_t>&)>& fn) {
    std::vector<std::uint32_t> blocks;
    auto rec = [&](auto&& self, std::uint32_t rest) -> void {
        if (rest == 0) {
            if (blocks.size() >= 2) fn(blocks);
            return;
        }
        const std::uint32_t low = rest & (~rest + 1);
        const std::uint32_t others = rest ^ low;
        // Every submask of `others`, joined with the lowest remaining bit.
        std::uint32_t sub = others;
        while (true) {
            blocks.push_back(low | sub);
            self(self, others ^ sub);
            blocks.pop_back();
            if (sub == 0) break;
            sub = (sub - 1) & others;
        }
    };
    rec(rec, mask);
}

namespace detail {

inline double diam_of_mask(const umetric::FiniteMetricSpace& space, std::uint32_t mask) {
    double d = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!(mask >> i & 1)) continue;
        for (std::size_t j = i + 1; j < space.size(); ++j)
            if (mask >> j & 1) d = std::max(d, space(i, j));
    }
    return d;
}

inline double mincross_of_blocks(const umetric::FiniteMetricSpace& space,
                                 const std::vector<std::uint32_t>& blocks) {
    double m = kInf;
    for (std::size_t a = 0; a < blocks.size(); ++a)
        for (std::size_t b = a + 1; b < blocks.size(); ++b)
            for (std::size_t i = 0; i < space.size(); ++i) {
                if (!(blocks[a] >> i & 1)) continue;
                for (std::size_t j = 0; j < space.size(); ++j)
                    if (blocks[b] >> j & 1) m = std::min(m, space(i, j));
            }
    return m;
}

}  // namespace detail

// Minimal distortion over embeddings into any ultrametric space, by
// recursion over every hierarchy: the best hierarchy splits S into blocks,
// pays diam(S)/mincross(split) at the top and recurses into the blocks.
inline double partition_distortion_oracle(const umetric::FiniteMetricSpace& space) {
    std::map<std::uint32_t, double> memo;
    auto rec = [&](auto&& self, std::uint32_t mask) -> double {
        if (std::popcount(mask) <= 2) return 1.0;
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        const double diam = detail::diam_of_mask(space, mask);
        double best = kInf;
        for_each_proper_partition(mask, [&](const std::vector<std::uint32_t>& blocks) {
            double cost = diam / detail::mincross_of_blocks(space, blocks);
            for (std::uint32_t b : blocks) cost = std::max(cost, self(self, b));
            best = std::min(best, cost);
        });
        memo[mask] = best;
        return best;
    };
    const std::uint32_t full = (space.size() >= 32) ? ~0u : ((1u << space.size()) - 1);
    return rec(rec, full);
}

// A hierarchy as an explicit tree of point masks.
struct Hier {
    std::uint32_t mask = 0;
    std::vector<Hier> children;
};

// Every hierarchy on the points of `mask`. Sizes grow as the total-partition
// numbers (1, 1, 4, 26, 236, 2752, 39208 for n = 1..7).
inline std::vector<Hier> all_hierarchies(std::uint32_t mask) {
    if (std::popcount(mask) == 1) return {Hier{mask, {}}};
    std::vector<Hier> out;
    for_each_proper_partition(mask, [&](const std::vector<std::uint32_t>& blocks) {
        std::vector<std::vector<Hier>> per_block;
        for (std::uint32_t b : blocks) per_block.push_back(all_hierarchies(b));
        std::vector<std::size_t> pick(blocks.size(), 0);
        while (true) {
            Hier h{mask, {}};
            for (std::size_t i = 0; i < blocks.size(); ++i)
                h.children.push_back(per_block[i][pick[i]]);
            out.push_back(std::move(h));
            std::size_t i = 0;
            while (i < pick.size() && ++pick[i] == per_block[i].size()) pick[i++] = 0;
            if (i == pick.size()) break;
        }
    });
    return out;
}

namespace detail {

// u(x, y) for the ultrametric given by per-internal-node values.
inline void fill_ultrametric(const Hier& h, const std::vector<double>& values, std::size_t& next,
                             std::vector<std::vector<double>>& u) {
    if (h.children.empty()) return;
    const double v = values[next++];
    for (std::size_t a = 0; a < h.children.size(); ++a)
        for (std::size_t b = a + 1; b < h.children.size(); ++b)
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (!(h.children[a].mask >> i & 1)) continue;
                for (std::size_t j = 0; j < u.size(); ++j)
                    if (h.children[b].mask >> j & 1) u[i][j] = u[j][i] = v;
            }
    for (const Hier& c : h.children) fill_ultrametric(c, values, next, u);
}

inline std::size_t internal_count(const Hier& h) {
    std::size_t c = h.children.empty() ? 0 : 1;
    for (const Hier& x : h.children) c += internal_count(x);
    return c;
}

inline double distortion_of(const umetric::FiniteMetricSpace& space,
                            const std::vector<std::vector<double>>& u) {
    double expansion = 0.0, contraction = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = i + 1; j < space.size(); ++j) {
            expansion = std::max(expansion, u[i][j] / space(i, j));
            contraction = std::max(contraction, space(i, j) / u[i][j]);
        }
    return expansion * contraction;
}

}  // namespace detail

// Literal search: every hierarchy, every assignment of level values drawn
// from the distance-value set with child <= parent. Exponential; keep n tiny.
inline double literal_distortion_oracle(const umetric::FiniteMetricSpace& space) {
    const std::vector<double> values = space.distance_values();
    const std::uint32_t full = (1u << space.size()) - 1;
    double best = kInf;
    std::vector<std::vector<double>> u(space.size(), std::vector<double>(space.size(), 0.0));
    for (const Hier& h : all_hierarchies(full)) {
        const std::size_t internals = detail::internal_count(h);
        std::vector<double> assignment(internals);
        // Values listed root-first; parents precede children in this order.
        std::vector<const Hier*> order;
        auto flatten = [&](auto&& self, const Hier& node) -> void {
            if (node.children.empty()) return;
            order.push_back(&node);
            for (const Hier& c : node.children) self(self, c);
        };
        flatten(flatten, h);
        std::map<const Hier*, std::size_t> pos;
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        std::vector<std::size_t> parent_pos(internals, 0);
        for (std::size_t i = 0; i < order.size(); ++i)
            for (const Hier& c : order[i]->children)
                if (!c.children.empty()) parent_pos[pos[&c]] = i;

        auto assign = [&](auto&& self, std::size_t at) -> void {
            if (at == internals) {
                std::size_t next = 0;
                // Re-evaluate with the root-first assignment mapped onto the
                // preorder used by fill_ultrametric (identical order).
                detail::fill_ultrametric(h, assignment, next, u);
                best = std::min(best, detail::distortion_of(space, u));
                return;
            }
            const double cap = at == 0 ? kInf : assignment[parent_pos[at]];
            for (double v : values) {
                if (v > cap) continue;
                assignment[at] = v;
                self(self, at + 1);
            }
        };
        assign(assign, 0);
    }
    return best;
}

// Largest subset whose induced minimax closure stays within the distortion
// bound, by scanning all subsets.
inline std::size_t best_subset_size_oracle(const umetric::FiniteMetricSpace& space, double bound) {
    const std::size_t n = space.size();
    std::size_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        const std::size_t size = static_cast<std::size_t>(std::popcount(mask));
        if (size <= best) continue;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1) idx.push_back(i);
        double d = 1.0;
        if (size >= 3) d = closure_distortion(space.induced(idx));
        if (d <= bound + std::max(1e-12, 1e-9 * d)) best = size;
    }
    return best;
}

// True when no ultrametric dominated by the space exceeds `sub` anywhere.
// Checks the maximal value assignment of every hierarchy: each node gets the
// smallest crossing distance, clamped by its parent.
inline bool subdominant_is_maximal(const umetric::FiniteMetricSpace& space,
                                   const std::vector<std::vector<double>>& sub) {
    const std::uint32_t full = (1u << space.size()) - 1;
    std::vector<std::vector<double>> u(space.size(), std::vector<double>(space.size(), 0.0));
    for (const Hier& h : all_hierarchies(full)) {
        auto fill_max = [&](auto&& self, const Hier& node, double cap) -> void {
            if (node.children.empty()) return;
            std::vector<std::uint32_t> blocks;
            for (const Hier& c : node.children) blocks.push_back(c.mask);
            const double v = std::min(cap, detail::mincross_of_blocks(space, blocks));
            for (std::size_t a = 0; a < blocks.size(); ++a)
                for (std::size_t b = a + 1; b < blocks.size(); ++b)
                    for (std::size_t i = 0; i < space.size(); ++i) {
                        if (!(blocks[a] >> i & 1)) continue;
                        for (std::size_t j = 0; j < space.size(); ++j)
                            if (blocks[b] >> j & 1) u[i][j] = u[j][i] = v;
                    }
            for (const Hier& c : node.children) self(self, c, v);
        };
        fill_max(fill_max, h, kInf);
        for (std::size_t i = 0; i < space.size(); ++i)
            for (std::size_t j = i + 1; j < space.size(); ++j)
                if (u[i][j] > sub[i][j] + 1e-12) return false;
    }
    return true;
}

// Dense view of a sparse embedding, padded in coordinate order.
inline std::vector<double> dense_vector(const umetric::SparseEmbedding& emb, std::size_t point) {
    std::vector<double> v(emb.nodes.size(), 0.0);
    for (std::size_t k = 0; k < emb.nodes.size(); ++k)
        for (const auto& [node, value] : emb.vectors[point])
            if (node == emb.nodes[k]) v[k] = value;
    return v;
}

// Norm of f(x) - f(y) computed from dense vectors and plain std::pow.
inline double dense_distance(const umetric::SparseEmbedding& emb, std::size_t x, std::size_t y) {
    const auto u = dense_vector(emb, x);
    const auto v = dense_vector(emb, y);
    if (emb.target.kind == umetric::EmbeddingTarget::Kind::c0) {
        double m = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) m = std::max(m, std::abs(u[k] - v[k]));
        return m;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += std::pow(std::abs(u[k] - v[k]), emb.target.p);
    return std::pow(s, 1.0 / emb.target.p);
}

inline double dense_norm(const umetric::SparseEmbedding& emb, std::size_t x) {
    const auto u = dense_vector(emb, x);
    if (emb.target.kind == umetric::EmbeddingTarget::Kind::c0) {
        double m = 0.0;
        for (double c : u) m = std::max(m, std::abs(c));
        return m;
    }
    double s = 0.0;
    for (double c : u) s += std::pow(std::abs(c), emb.target.p);
    return std::pow(s, 1.0 / emb.target.p);
}

}  // namespace oracles
