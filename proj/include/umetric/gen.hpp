#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "umetric/errors.hpp"
#include "umetric/prng.hpp"
#include "umetric/space.hpp"

namespace umetric {

struct GenSpec {
    enum class Kind { dendrogram, padic, erdos_renyi, random_metric };

    Kind kind = Kind::dendrogram;
    std::size_t n = 1;
    std::uint64_t seed = 0;

    // padic
    std::uint64_t p_base = 2;
    std::size_t depth = 3;

    // dendrogram
    std::size_t branch_min = 2;
    std::size_t branch_max = 4;
    double decay_min = 0.3;
    double decay_max = 0.7;

    // erdos-renyi
    double edge_prob = 0.5;

    // random-metric
    double dist_min = 1.0;
    double dist_max = 2.0;
};

inline const char* kind_name(GenSpec::Kind kind) {
    switch (kind) {
        case GenSpec::Kind::dendrogram: return "dendrogram";
        case GenSpec::Kind::padic: return "padic";
        case GenSpec::Kind::erdos_renyi: return "erdos-renyi";
        case GenSpec::Kind::random_metric: return "random-metric";
    }
    return "";
}

inline GenSpec::Kind kind_from_string(const std::string& s) {
    if (s == "dendrogram") return GenSpec::Kind::dendrogram;
    if (s == "padic") return GenSpec::Kind::padic;
    if (s == "erdos-renyi") return GenSpec::Kind::erdos_renyi;
    if (s == "random-metric") return GenSpec::Kind::random_metric;
    throw InvalidSpecError("unknown generator kind '" + s + "'");
}

inline bool is_prime(std::uint64_t v) {
    if (v < 2) return false;
    for (std::uint64_t d = 2; d * d <= v; ++d)
        if (v % d == 0) return false;
    return true;
}

namespace detail {

inline std::vector<std::string> point_labels(std::size_t n) {
    std::size_t width = 1;
    for (std::size_t tens = 10; n > tens; tens *= 10) ++width;
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string digits = std::to_string(i);
        labels[i] = "p" + std::string(width - digits.size(), '0') + digits;
    }
    return labels;
}

inline std::string space_name(const GenSpec& spec) {
    return std::string(kind_name(spec.kind)) + "-n" + std::to_string(spec.n) + "-s" +
           std::to_string(spec.seed);
}

struct DenseMatrix {
    std::size_t n;
    std::vector<double> d;

    explicit DenseMatrix(std::size_t n) : n(n), d(n * n, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }
    void set(std::size_t i, std::size_t j, double v) { at(i, j) = at(j, i) = v; }
};

// Splits [lo, hi) into k parts of size >= 1 and assigns cross-part distance
// r; each part recurses with a freshly drawn shrunken radius.
inline void dendrogram_fill(DenseMatrix& d, std::size_t lo, std::size_t hi, double r,
                            const GenSpec& spec, SplitMix64& rng) {
    const std::size_t size = hi - lo;
    if (size < 2) return;
    const std::size_t k_max = std::min(spec.branch_max, size);
    const std::size_t k_min = std::min(spec.branch_min, k_max);
    const std::size_t k = k_min + rng.below(k_max - k_min + 1);

    // k - 1 distinct interior cut points via a partial shuffle.
    std::vector<std::size_t> gaps(size - 1);
    for (std::size_t i = 0; i < gaps.size(); ++i) gaps[i] = lo + i + 1;
    for (std::size_t i = 0; i + 1 < k; ++i)
        std::swap(gaps[i], gaps[i + rng.below(gaps.size() - i)]);
    std::vector<std::size_t> cuts(gaps.begin(), gaps.begin() + (k - 1));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(hi);

    std::size_t start = lo;
    for (std::size_t cut : cuts) {
        for (std::size_t i = start; i < cut; ++i)
            for (std::size_t j = cut; j < hi; ++j) d.set(i, j, r);
        start = cut;
    }
    start = lo;
    for (std::size_t cut : cuts) {
        dendrogram_fill(d, start, cut, r * rng.uniform(spec.decay_min, spec.decay_max), spec, rng);
        start = cut;
    }
}

inline FiniteMetricSpace gen_dendrogram(const GenSpec& spec) {
    if (spec.branch_min < 2 || spec.branch_max < spec.branch_min)
        throw InvalidSpecError("branching range must satisfy 2 <= branch_min <= branch_max");
    if (!(0.0 < spec.decay_min && spec.decay_min <= spec.decay_max && spec.decay_max < 1.0))
        throw InvalidSpecError("decay range must satisfy 0 < decay_min <= decay_max < 1");
    DenseMatrix d(spec.n);
    SplitMix64 rng(spec.seed);
    dendrogram_fill(d, 0, spec.n, 1.0, spec, rng);
    return FiniteMetricSpace(point_labels(spec.n), std::move(d.d), space_name(spec));
}

inline FiniteMetricSpace gen_padic(const GenSpec& spec) {
    if (spec.depth < 1) throw InvalidSpecError("depth must be >= 1");
    if (spec.p_base < 2) throw InvalidSpecError("p_base must be >= 2");

    // Deepen until p_base^depth holds n distinct digit strings.
    std::size_t depth = spec.depth;
    std::uint64_t capacity = 1;
    for (std::size_t i = 0; i < depth; ++i) {
        if (capacity >= spec.n) break;
        capacity *= spec.p_base;
    }
    while (capacity < spec.n) {
        capacity *= spec.p_base;
        ++depth;
    }

    // Point i is the base-p_base string of i, most significant digit first.
    std::vector<std::vector<std::uint64_t>> digits(spec.n,
                                                   std::vector<std::uint64_t>(depth, 0));
    for (std::size_t i = 0; i < spec.n; ++i) {
        std::uint64_t v = i;
        for (std::size_t pos = depth; pos-- > 0;) {
            digits[i][pos] = v % spec.p_base;
            v /= spec.p_base;
        }
    }

    // value[c] = p_base^(-c) by repeated division, one shared table so equal
    // prefix lengths give bitwise-equal distances.
    std::vector<double> value(depth + 1);
    value[0] = 1.0;
    for (std::size_t c = 1; c <= depth; ++c)
        value[c] = value[c - 1] / static_cast<double>(spec.p_base);

    std::vector<std::vector<std::size_t>> prefix(spec.n, std::vector<std::size_t>(spec.n, 0));
    std::size_t min_prefix = depth;
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t j = i + 1; j < spec.n; ++j) {
            std::size_t c = 0;
            while (c < depth && digits[i][c] == digits[j][c]) ++c;
            prefix[i][j] = prefix[j][i] = c;
            min_prefix = std::min(min_prefix, c);
        }
    }

    // Normalize to diameter 1; same-table division keeps level values shared.
    std::vector<double> scaled(depth + 1, 0.0);
    for (std::size_t c = 0; c <= depth; ++c) scaled[c] = value[c] / value[min_prefix];

    DenseMatrix d(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = i + 1; j < spec.n; ++j) d.set(i, j, scaled[prefix[i][j]]);
    return FiniteMetricSpace(point_labels(spec.n), std::move(d.d), space_name(spec));
}

inline FiniteMetricSpace gen_erdos_renyi(const GenSpec& spec) {
    if (!(0.0 <= spec.edge_prob && spec.edge_prob <= 1.0))
        throw InvalidSpecError("edge_prob must lie in [0, 1]");
    SplitMix64 rng(spec.seed);
    DenseMatrix d(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = i + 1; j < spec.n; ++j)
            d.set(i, j, rng.uniform() < spec.edge_prob ? 1.0 : 2.0);
    return FiniteMetricSpace(point_labels(spec.n), std::move(d.d), space_name(spec));
}

inline FiniteMetricSpace gen_random_metric(const GenSpec& spec) {
    if (!(0.0 < spec.dist_min && spec.dist_min <= spec.dist_max))
        throw InvalidSpecError("distance range must satisfy 0 < dist_min <= dist_max");
    SplitMix64 rng(spec.seed);
    DenseMatrix d(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = i + 1; j < spec.n; ++j)
            d.set(i, j, rng.uniform(spec.dist_min, spec.dist_max));

    // Shortest-path closure repairs any triangle violations from wide ranges.
    for (std::size_t k = 0; k < spec.n; ++k)
        for (std::size_t i = 0; i < spec.n; ++i)
            for (std::size_t j = 0; j < spec.n; ++j)
                if (i != j) d.at(i, j) = std::min(d.at(i, j), d.at(i, k) + d.at(k, j));
    return FiniteMetricSpace(point_labels(spec.n), std::move(d.d), space_name(spec));
}

}  // namespace detail

inline FiniteMetricSpace generate(const GenSpec& spec) {
    if (spec.n < 1) throw InvalidSpecError("n must be >= 1");
    switch (spec.kind) {
        case GenSpec::Kind::dendrogram: return detail::gen_dendrogram(spec);
        case GenSpec::Kind::padic: return detail::gen_padic(spec);
        case GenSpec::Kind::erdos_renyi: return detail::gen_erdos_renyi(spec);
        case GenSpec::Kind::random_metric: return detail::gen_random_metric(spec);
    }
    throw InvalidSpecError("unknown generator kind");
}

}  // namespace umetric
