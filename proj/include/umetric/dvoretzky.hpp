#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "umetric/ball_tree.hpp"
#include "umetric/distortion.hpp"
#include "umetric/embed.hpp"
#include "umetric/errors.hpp"
#include "umetric/gen.hpp"
#include "umetric/space.hpp"
#include "umetric/tolerance.hpp"

namespace umetric {

inline constexpr std::size_t kExactSubsetCap = 22;

enum class GreedyStrategy { farthest_first, peel_worst };

inline GreedyStrategy strategy_from_string(const std::string& s) {
    if (s == "farthest-first") return GreedyStrategy::farthest_first;
    if (s == "peel-worst") return GreedyStrategy::peel_worst;
    throw InvalidSpecError("unknown strategy '" + s + "'");
}

struct SubsetCertificate {
    std::vector<std::string> subset;
    UltrametricFit fitted;
    double achieved_distortion = 1.0;
    std::optional<SparseEmbedding> lp_coordinates;
    std::string method;
};

struct ExperimentRecord {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::size_t largest_exact = 0;
    std::size_t largest_greedy = 0;
    bool exact = false;
    double elapsed_sec = 0.0;
};

namespace detail {

inline std::vector<std::size_t> label_ranks(const FiniteMetricSpace& space) {
    std::vector<std::size_t> order(space.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return space.label(a) < space.label(b); });
    return order;
}

// Maximum-cardinality subset of {0,..,n-1} under a hereditary (downward
// closed) feasibility predicate. feasible(s, p) decides whether the feasible
// set s stays feasible with p appended; p exceeds every element of s. Among
// optima, returns the lexicographically smallest: include-first DFS visits
// equal-size subsets in lexicographic order.
template <typename Feasible>
std::vector<std::size_t> max_hereditary_subset(std::size_t n, Feasible&& feasible) {
    std::vector<std::size_t> current;
    std::size_t best_size = 0;
    auto size_pass = [&](auto&& self, std::size_t next) -> void {
        best_size = std::max(best_size, current.size());
        for (std::size_t p = next; p < n; ++p) {
            if (current.size() + (n - p) <= best_size) return;
            if (!feasible(current, p)) continue;
            current.push_back(p);
            self(self, p + 1);
            current.pop_back();
        }
    };
    size_pass(size_pass, 0);

    std::vector<std::size_t> best;
    auto lex_pass = [&](auto&& self, std::size_t next) -> bool {
        if (current.size() == best_size) {
            best = current;
            return true;
        }
        for (std::size_t p = next; p < n; ++p) {
            if (current.size() + (n - p) < best_size) return false;
            if (!feasible(current, p)) continue;
            current.push_back(p);
            if (self(self, p + 1)) return true;
            current.pop_back();
        }
        return false;
    };
    lex_pass(lex_pass, 0);
    return best;
}

inline bool one_two_valued(const FiniteMetricSpace& space) {
    for (double v : space.distance_values())
        if (v != 1.0 && v != 2.0) return false;
    return true;
}

inline SubsetCertificate make_certificate(const FiniteMetricSpace& space,
                                          std::vector<std::size_t> indices, std::string method,
                                          std::optional<double> lp_p, Tolerance tol) {
    const FiniteMetricSpace induced = space.induced(indices);
    SubsetCertificate cert{induced.labels(), subdominant_ultrametric(induced), 1.0, std::nullopt,
                           std::move(method)};
    cert.achieved_distortion = cert.fitted.distortion;
    if (lp_p) cert.lp_coordinates = embed_lp(build_tree(cert.fitted.sub_space(), tol), *lp_p);
    return cert;
}

}  // namespace detail

// Maximum-cardinality subset whose induced subspace embeds into an
// ultrametric with distortion at most max_distortion; ties go to the
// lexicographically smallest label list. For {1,2}-valued spaces and bounds
// below 2 the feasible subsets are exactly those whose distance-1 graph is a
// union of cliques, which gives a much cheaper branch test.
inline SubsetCertificate best_subset_exact(const FiniteMetricSpace& space, double max_distortion,
                                           std::optional<double> lp_p = std::nullopt,
                                           std::size_t exact_cap = kExactSubsetCap,
                                           Tolerance tol = {}) {
    if (max_distortion < 1.0) throw DomainError("max_distortion must be >= 1");
    if (space.size() > exact_cap)
        throw CapExceededError("exact search is capped at " + std::to_string(exact_cap) +
                               " points; use the greedy search");

    const std::vector<std::size_t> order = detail::label_ranks(space);
    std::vector<std::size_t> scratch;
    auto generic = [&](const std::vector<std::size_t>& s, std::size_t p) {
        if (s.size() < 2) return true;
        scratch.clear();
        for (std::size_t r : s) scratch.push_back(order[r]);
        scratch.push_back(order[p]);
        return tol.leq(ultrametric_distortion(space.induced(scratch)), max_distortion);
    };
    auto cluster = [&](const std::vector<std::size_t>& s, std::size_t p) {
        const std::size_t x = order[p];
        auto one = [&](std::size_t a, std::size_t b) { return space(a, b) == 1.0; };
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::size_t a = order[s[i]];
            for (std::size_t j = i + 1; j < s.size(); ++j) {
                const std::size_t b = order[s[j]];
                if (one(x, a) && one(x, b) && !one(a, b)) return false;
                if (one(x, a) != one(x, b) && one(a, b)) return false;
            }
        }
        return true;
    };

    std::vector<std::size_t> ranks;
    if (detail::one_two_valued(space) && tol.leq(2.0, max_distortion)) {
        ranks.resize(space.size());
        std::iota(ranks.begin(), ranks.end(), std::size_t{0});
    } else if (detail::one_two_valued(space)) {
        ranks = detail::max_hereditary_subset(space.size(), cluster);
    } else {
        ranks = detail::max_hereditary_subset(space.size(), generic);
    }

    std::vector<std::size_t> indices(ranks.size());
    for (std::size_t k = 0; k < ranks.size(); ++k) indices[k] = order[ranks[k]];
    return detail::make_certificate(space, std::move(indices), "exact", lp_p, tol);
}

inline SubsetCertificate best_subset_greedy(const FiniteMetricSpace& space, double max_distortion,
                                            GreedyStrategy strategy, std::uint64_t seed,
                                            std::optional<double> lp_p = std::nullopt,
                                            Tolerance tol = {}) {
    if (max_distortion < 1.0) throw DomainError("max_distortion must be >= 1");
    const std::size_t n = space.size();

    auto feasible_with = [&](std::vector<std::size_t> s, std::size_t p) {
        s.push_back(p);
        if (s.size() < 3) return true;
        return tol.leq(ultrametric_distortion(space.induced(s)), max_distortion);
    };

    std::vector<std::size_t> chosen;
    if (strategy == GreedyStrategy::farthest_first) {
        // Grow from a seed point; each round proposes the point farthest from
        // the current set and drops it for good if it breaks the bound.
        std::vector<int> state(n, 0);  // 0 candidate, 1 chosen, -1 rejected
        const std::size_t start = static_cast<std::size_t>(seed % n);
        chosen.push_back(start);
        state[start] = 1;
        std::vector<double> dist_to_set(n);
        for (std::size_t v = 0; v < n; ++v) dist_to_set[v] = space(start, v);
        for (;;) {
            std::size_t pick = n;
            for (std::size_t v = 0; v < n; ++v)
                if (state[v] == 0 && (pick == n || dist_to_set[v] > dist_to_set[pick])) pick = v;
            if (pick == n) break;
            if (feasible_with(chosen, pick)) {
                chosen.push_back(pick);
                state[pick] = 1;
                for (std::size_t v = 0; v < n; ++v)
                    dist_to_set[v] = std::min(dist_to_set[v], space(pick, v));
            } else {
                state[pick] = -1;
            }
        }
        std::sort(chosen.begin(), chosen.end());
    } else {
        // Start from everything; while the bound fails, drop the point in the
        // most infeasible triples (largest side > bound * second side). When
        // no triple certifies the failure, fall back to counting bound-
        // breaking pairs of the current fit.
        chosen.resize(n);
        std::iota(chosen.begin(), chosen.end(), std::size_t{0});
        for (;;) {
            const FiniteMetricSpace cur = space.induced(chosen);
            const UltrametricFit fit = subdominant_ultrametric(cur);
            if (tol.leq(fit.distortion, max_distortion)) break;
            const std::size_t k = chosen.size();
            std::vector<std::size_t> count(k, 0);
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = a + 1; b < k; ++b)
                    for (std::size_t c = b + 1; c < k; ++c) {
                        double side[3] = {cur(a, b), cur(a, c), cur(b, c)};
                        std::sort(side, side + 3);
                        if (!tol.leq(side[2], max_distortion * side[1])) {
                            ++count[a];
                            ++count[b];
                            ++count[c];
                        }
                    }
            if (*std::max_element(count.begin(), count.end()) == 0)
                for (std::size_t a = 0; a < k; ++a)
                    for (std::size_t b = a + 1; b < k; ++b)
                        if (!tol.leq(cur(a, b) / fit.sub[a][b], max_distortion)) {
                            ++count[a];
                            ++count[b];
                        }
            const std::size_t drop = static_cast<std::size_t>(
                std::max_element(count.begin(), count.end()) - count.begin());
            chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(drop));
        }
    }
    return detail::make_certificate(space, std::move(chosen), "greedy", lp_p, tol);
}

// The impossibility experiment: per trial, build the {1,2} metric of a
// G(n,1/2) graph and record the largest subset with distortion strictly
// below 2. On such spaces distortion is exactly 1 or 2, so the strict regime
// coincides with the bound-1 search.
inline std::vector<ExperimentRecord> wn_experiment(std::size_t n, std::size_t trials,
                                                   std::uint64_t seed,
                                                   std::size_t exact_cap = kExactSubsetCap) {
    if (n < 2) throw DomainError("n must be >= 2");
    if (trials < 1) throw DomainError("trials must be >= 1");
    std::vector<ExperimentRecord> records;
    records.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        GenSpec spec;
        spec.kind = GenSpec::Kind::erdos_renyi;
        spec.n = n;
        spec.seed = seed + t;
        const FiniteMetricSpace w = generate(spec);

        ExperimentRecord rec;
        rec.n = n;
        rec.seed = spec.seed;
        const auto t0 = std::chrono::steady_clock::now();
        rec.largest_greedy =
            best_subset_greedy(w, 1.0, GreedyStrategy::farthest_first, spec.seed).subset.size();
        if (n <= exact_cap) {
            rec.largest_exact = best_subset_exact(w, 1.0, std::nullopt, exact_cap).subset.size();
            rec.exact = true;
        } else {
            rec.largest_exact = rec.largest_greedy;
            rec.exact = false;
        }
        rec.elapsed_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        records.push_back(rec);
    }
    return records;
}

}  // namespace umetric
