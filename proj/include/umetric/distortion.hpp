#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "umetric/errors.hpp"
#include "umetric/space.hpp"
#include "umetric/tolerance.hpp"

namespace umetric {

// Label-to-label assignment between two spaces. Must be total on the source
// and injective.
using PointMap = std::map<std::string, std::string>;

struct DistortionReport {
    double expansion = 1.0;    // max d_dst(f x, f y) / d_src(x, y)
    double contraction = 1.0;  // max d_src(x, y) / d_dst(f x, f y)
    double distortion = 1.0;   // expansion * contraction
    double scale = 1.0;        // 1 / contraction
    std::pair<std::string, std::string> worst_expansion_pair;
    std::pair<std::string, std::string> worst_contraction_pair;
};

struct UltrametricFit {
    FiniteMetricSpace base;
    std::vector<std::vector<double>> sub;  // subdominant ultrametric, sub <= base entrywise
    double distortion = 1.0;               // max over pairs base / sub

    FiniteMetricSpace sub_space() const {
        const std::size_t n = base.size();
        std::vector<double> flat(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) flat[i * n + j] = sub[i][j];
        return FiniteMetricSpace(base.labels(), std::move(flat), base.name() + ":subdominant");
    }
};

inline DistortionReport map_distortion(const FiniteMetricSpace& src, const FiniteMetricSpace& dst,
                                       const PointMap& map) {
    if (src.size() < 2) throw DomainError("map_distortion needs at least 2 source points");

    std::vector<std::size_t> image(src.size());
    std::map<std::string, std::string> seen;  // target label -> source label
    for (std::size_t i = 0; i < src.size(); ++i) {
        auto it = map.find(src.label(i));
        if (it == map.end())
            throw DomainError("map does not cover source point '" + src.label(i) + "'");
        auto pos = dst.index_of(it->second);
        if (!pos)
            throw DomainError("map target '" + it->second + "' is not a point of the target space");
        auto [prev, fresh] = seen.emplace(it->second, src.label(i));
        if (!fresh)
            throw DomainError("map is not injective: '" + prev->second + "' and '" + src.label(i) +
                              "' both map to '" + it->second + "'");
        image[i] = *pos;
    }

    DistortionReport report;
    report.expansion = 0.0;
    report.contraction = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        for (std::size_t j = i + 1; j < src.size(); ++j) {
            const double a = src(i, j);
            const double b = dst(image[i], image[j]);
            if (b == 0.0)
                throw DomainError("map collapses '" + src.label(i) + "' and '" + src.label(j) +
                                  "'");
            if (b / a > report.expansion) {
                report.expansion = b / a;
                report.worst_expansion_pair = {src.label(i), src.label(j)};
            }
            if (a / b > report.contraction) {
                report.contraction = a / b;
                report.worst_contraction_pair = {src.label(i), src.label(j)};
            }
        }
    }
    report.distortion = report.expansion * report.contraction;
    report.scale = 1.0 / report.contraction;
    return report;
}

// Largest ultrametric pointwise below the input metric: sub[x][y] is the
// minimax path value, i.e. the bottleneck edge of the x-y path in a minimum
// spanning tree of the distance graph. Every sub entry is an entry of the
// input matrix, so no floating arithmetic enters the values.
inline UltrametricFit subdominant_ultrametric(const FiniteMetricSpace& space) {
    const std::size_t n = space.size();
    UltrametricFit fit{space, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)),
                       1.0};
    if (n < 2) return fit;

    // Prim, O(n^2): adj[v] lists the MST neighbours of v.
    std::vector<std::vector<std::size_t>> adj(n);
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> best_from(n, 0);
    in_tree[0] = true;
    for (std::size_t v = 1; v < n; ++v) {
        best[v] = space(0, v);
    }
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t pick = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!in_tree[v] && (pick == n || best[v] < best[pick])) pick = v;
        in_tree[pick] = true;
        adj[pick].push_back(best_from[pick]);
        adj[best_from[pick]].push_back(pick);
        for (std::size_t v = 0; v < n; ++v) {
            if (!in_tree[v] && space(pick, v) < best[v]) {
                best[v] = space(pick, v);
                best_from[v] = pick;
            }
        }
    }

    // Bottleneck values by DFS from each source along the tree.
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
        stack.assign(1, s);
        std::vector<bool> visited(n, false);
        visited[s] = true;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w : adj[v]) {
                if (visited[w]) continue;
                visited[w] = true;
                fit.sub[s][w] = std::max(fit.sub[s][v], space(v, w));
                stack.push_back(w);
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            fit.distortion = std::max(fit.distortion, space(i, j) / fit.sub[i][j]);
    return fit;
}

// Minimal distortion over all embeddings into any ultrametric space. The
// subdominant fit realizes it; optimality is pinned down by the exhaustive
// small-n oracle in the tests.
inline double ultrametric_distortion(const FiniteMetricSpace& space) {
    return subdominant_ultrametric(space).distortion;
}

}  // namespace umetric
