#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <iterator>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "umetric/errors.hpp"
#include "umetric/tolerance.hpp"

namespace umetric {

// A finite metric space: point labels plus a symmetric distance matrix.
// Structural invariants (square shape, exact symmetry, zero diagonal,
// positive off-diagonal entries, unique labels) are enforced on
// construction; the triangle inequalities are not, see validate().
class FiniteMetricSpace {
  public:
    FiniteMetricSpace(std::vector<std::string> labels, std::vector<double> dist,
                      std::string name = "")
        : name_(std::move(name)), labels_(std::move(labels)), dist_(std::move(dist)) {
        const std::size_t n = labels_.size();
        if (n < 1) throw ShapeError("a space needs at least one point");
        if (dist_.size() != n * n)
            throw ShapeError("distance matrix is not " + std::to_string(n) + "x" +
                             std::to_string(n));
        std::set<std::string_view> seen;
        for (const auto& l : labels_)
            if (!seen.insert(l).second) throw ShapeError("duplicate label '" + l + "'");
        for (std::size_t i = 0; i < n; ++i) {
            if (dist_[i * n + i] != 0.0)
                throw ShapeError("nonzero diagonal at '" + labels_[i] + "'");
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = dist_[i * n + j];
                if (!std::isfinite(d) || d < 0.0)
                    throw ShapeError("invalid distance between '" + labels_[i] + "' and '" +
                                     labels_[j] + "'");
                if (d == 0.0)
                    throw ShapeError("zero distance between distinct points '" + labels_[i] +
                                     "' and '" + labels_[j] + "'");
                if (d != dist_[j * n + i])
                    throw ShapeError("asymmetric entries for '" + labels_[i] + "' and '" +
                                     labels_[j] + "'");
            }
        }
        for (std::size_t i = 0; i < n; ++i) index_[labels_[i]] = i;
    }

    std::size_t size() const { return labels_.size(); }

    double operator()(std::size_t i, std::size_t j) const {
        return dist_[i * size() + j];
    }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    const std::vector<double>& matrix() const { return dist_; }
    const std::string& name() const { return name_; }

    std::optional<std::size_t> index_of(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // Maximum entry of the matrix, exactly; 0 for a singleton.
    double diameter() const {
        double d = 0.0;
        for (double v : dist_) d = std::max(d, v);
        return d;
    }

    // Sorted distinct off-diagonal values.
    std::vector<double> distance_values() const {
        std::set<double> vals;
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) vals.insert(dist_[i * n + j]);
        return {vals.begin(), vals.end()};
    }

    // Subspace induced by the given point indices, labels preserved.
    FiniteMetricSpace induced(std::span<const std::size_t> idx) const {
        const std::size_t m = idx.size();
        std::vector<std::string> labels(m);
        std::vector<double> dist(m * m);
        for (std::size_t a = 0; a < m; ++a) {
            labels[a] = labels_[idx[a]];
            for (std::size_t b = 0; b < m; ++b) dist[a * m + b] = (*this)(idx[a], idx[b]);
        }
        return FiniteMetricSpace(std::move(labels), std::move(dist), name_);
    }

  private:
    std::string name_;
    std::vector<std::string> labels_;
    std::vector<double> dist_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Content hash of labels plus matrix bits, for golden-file checks.
inline std::string space_fingerprint(const FiniteMetricSpace& space) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto mix_byte = [&h](unsigned char b) {
        h ^= b;
        h *= 0x100000001B3ULL;
    };
    auto mix64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
    };
    mix64(space.size());
    for (const auto& label : space.labels()) {
        for (char c : label) mix_byte(static_cast<unsigned char>(c));
        mix_byte(0);
    }
    for (double v : space.matrix()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        mix64(bits);
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[i] = hex[(h >> (60 - 4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf);
}

// One failed triangle: d(i,j) as lhs against the bound rhs through k.
struct Violation {
    std::size_t i = 0, j = 0, k = 0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct ValidationReport {
    bool is_metric = true;
    bool is_ultrametric = true;
    std::vector<Violation> metric_violations;
    std::vector<Violation> ultrametric_violations;
};

namespace detail {

// Worst offenders first (by lhs - rhs), capped.
class ViolationCollector {
  public:
    explicit ViolationCollector(std::size_t cap) : cap_(cap) {}

    void add(std::size_t i, std::size_t j, std::size_t k, double lhs, double rhs) {
        entries_.emplace(rhs - lhs, i, j, k, lhs, rhs);
        if (entries_.size() > cap_) entries_.erase(std::prev(entries_.end()));
    }

    std::vector<Violation> take() const {
        std::vector<Violation> out;
        out.reserve(entries_.size());
        for (const auto& [neg, i, j, k, lhs, rhs] : entries_)
            out.push_back(Violation{i, j, k, lhs, rhs});
        return out;
    }

  private:
    std::size_t cap_;
    // Keyed by negated magnitude so begin() is the worst violation.
    std::set<std::tuple<double, std::size_t, std::size_t, std::size_t, double, double>> entries_;
};

}  // namespace detail

inline constexpr std::size_t kViolationCap = 100;

// Checks both triangle inequalities over all triples. A triple (i,j,k)
// violates when d(i,j) > bound + slack(d(i,j)), with bound = d(i,k)+d(k,j)
// for the metric check and max(d(i,k), d(k,j)) for the ultrametric one.
inline ValidationReport validate(const FiniteMetricSpace& space, Tolerance tol = {}) {
    const std::size_t n = space.size();
    detail::ViolationCollector metric(kViolationCap), ultra(kViolationCap);
    ValidationReport report;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dij = space(i, j);
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                const double dik = space(i, k), dkj = space(k, j);
                const double sum = dik + dkj;
                const double mx = std::max(dik, dkj);
                if (!tol.leq(dij, sum)) {
                    report.is_metric = false;
                    metric.add(i, j, k, dij, sum);
                }
                if (!tol.leq(dij, mx)) {
                    report.is_ultrametric = false;
                    ultra.add(i, j, k, dij, mx);
                }
            }
        }
    }
    report.metric_violations = metric.take();
    report.ultrametric_violations = ultra.take();
    return report;
}

// Closed ball {y : d(center, y) <= r within tolerance}, indices ascending.
inline std::vector<std::size_t> closed_ball(const FiniteMetricSpace& space, std::size_t center,
                                            double r, Tolerance tol = {}) {
    if (r < 0.0) throw DomainError("closed ball radius must be >= 0");
    std::vector<std::size_t> out;
    for (std::size_t y = 0; y < space.size(); ++y)
        if (tol.leq(space(center, y), r)) out.push_back(y);
    return out;
}

}  // namespace umetric
