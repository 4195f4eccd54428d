#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "umetric/ball_tree.hpp"
#include "umetric/distortion.hpp"
#include "umetric/dvoretzky.hpp"
#include "umetric/embed.hpp"
#include "umetric/errors.hpp"
#include "umetric/space.hpp"

namespace umetric {

enum class FileFormat { json, csv };

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(what + ": " + e.what());
    }
}

inline double parse_number(std::string_view field, const std::string& what) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError(what + ": bad number '" + std::string(field) + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() &&
               (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        fields.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

inline std::vector<std::string> non_empty_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace detail

inline nlohmann::json space_to_json(const FiniteMetricSpace& space) {
    nlohmann::json j;
    if (!space.name().empty()) j["name"] = space.name();
    j["points"] = space.labels();
    const std::size_t n = space.size();
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        auto row = nlohmann::json::array();
        for (std::size_t j2 = 0; j2 < n; ++j2) row.push_back(space(i, j2));
        rows.push_back(std::move(row));
    }
    j["distances"] = std::move(rows);
    return j;
}

inline FiniteMetricSpace space_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("points") || !j.contains("distances"))
        throw ParseError("space JSON needs \"points\" and \"distances\"");
    try {
        std::vector<std::string> labels = j.at("points").get<std::vector<std::string>>();
        const auto& rows = j.at("distances");
        if (!rows.is_array()) throw ParseError("\"distances\" must be an array of rows");
        const std::size_t n = labels.size();
        if (rows.size() != n) throw ShapeError("distance matrix is not square");
        std::vector<double> dist;
        dist.reserve(n * n);
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != n)
                throw ShapeError("distance matrix is not square");
            for (const auto& v : row) dist.push_back(v.get<double>());
        }
        std::string name = j.value("name", std::string{});
        return FiniteMetricSpace(std::move(labels), std::move(dist), std::move(name));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("space JSON: ") + e.what());
    }
}

inline std::string space_to_csv(const FiniteMetricSpace& space) {
    std::string out;
    const std::size_t n = space.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ',';
        out += space.label(i);
    }
    out += '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out += space.label(i);
        for (std::size_t j = 0; j < n; ++j) {
            out += ',';
            out += format_double(space(i, j));
        }
        out += '\n';
    }
    return out;
}

inline FiniteMetricSpace space_from_csv(const std::string& text, const std::string& name = "") {
    const auto lines = detail::non_empty_lines(text);
    if (lines.empty()) throw ParseError("space CSV is empty");
    auto header = detail::split_csv_line(lines[0]);
    if (!header.empty() && header.front().empty()) header.erase(header.begin());
    const std::size_t n = header.size();
    if (n == 0) throw ParseError("space CSV header has no labels");
    if (lines.size() != n + 1)
        throw ShapeError("space CSV needs one row per header label");
    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto fields = detail::split_csv_line(lines[i + 1]);
        if (fields.size() != n + 1)
            throw ShapeError("space CSV row for '" + header[i] + "' needs a label plus " +
                             std::to_string(n) + " numbers");
        if (fields[0] != header[i])
            throw ShapeError("space CSV row label '" + fields[0] + "' does not match header");
        for (std::size_t j = 0; j < n; ++j)
            dist[i * n + j] = detail::parse_number(fields[j + 1], "space CSV");
    }
    return FiniteMetricSpace(std::move(header), std::move(dist), name);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << content;
}

inline FileFormat format_from_path(const std::string& path, FileFormat fallback) {
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) return fallback;
    const std::string ext = path.substr(dot + 1);
    if (ext == "json" || ext == "jsonl") return FileFormat::json;
    if (ext == "csv") return FileFormat::csv;
    return fallback;
}

inline FiniteMetricSpace load_space(const std::string& path,
                                    FileFormat format = FileFormat::json) {
    const std::string text = read_file(path);
    if (format_from_path(path, format) == FileFormat::csv) return space_from_csv(text);
    return space_from_json(detail::parse_json(text, "space JSON"));
}

inline nlohmann::json validation_to_json(const ValidationReport& report) {
    auto violations = [](const std::vector<Violation>& v) {
        auto arr = nlohmann::json::array();
        for (const auto& x : v)
            arr.push_back({{"i", x.i}, {"j", x.j}, {"k", x.k}, {"lhs", x.lhs}, {"rhs", x.rhs}});
        return arr;
    };
    return {{"is_metric", report.is_metric},
            {"is_ultrametric", report.is_ultrametric},
            {"metric_violations", violations(report.metric_violations)},
            {"ultrametric_violations", violations(report.ultrametric_violations)}};
}

inline nlohmann::json tree_to_json(const BallTree& tree) {
    nlohmann::json j;
    j["root"] = tree.root;
    j["depth"] = tree.depth;
    j["level_sizes"] = tree.level_sizes;
    auto nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
        nlohmann::json nj;
        nj["id"] = node.id;
        if (node.parent >= 0)
            nj["parent"] = node.parent;
        else
            nj["parent"] = nullptr;
        auto members = nlohmann::json::array();
        for (std::size_t m : node.members) members.push_back(tree.labels[m]);
        nj["members"] = std::move(members);
        nj["radius"] = node.radius;
        nj["representative"] = tree.labels[node.representative];
        nj["children"] = node.children;
        nodes.push_back(std::move(nj));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

inline nlohmann::json target_to_json(EmbeddingTarget target) {
    if (target.kind == EmbeddingTarget::Kind::lp)
        return {{"kind", "lp"}, {"p", target.p}};
    return {{"kind", "c0"}};
}

inline EmbeddingTarget target_from_json(const nlohmann::json& j) {
    const std::string kind = j.value("kind", std::string{});
    if (kind == "lp") {
        if (!j.contains("p")) throw ParseError("lp target needs \"p\"");
        return EmbeddingTarget::Lp(j.at("p").get<double>());
    }
    if (kind == "c0") return EmbeddingTarget::C0();
    throw ParseError("embedding target kind must be \"lp\" or \"c0\"");
}

inline nlohmann::json embedding_to_json(const SparseEmbedding& emb) {
    nlohmann::json j;
    j["target"] = target_to_json(emb.target);
    j["dimension"] = emb.dimension;
    j["nodes"] = emb.nodes;
    j["tree_ref"] = emb.tree_ref;
    nlohmann::json vectors = nlohmann::json::object();
    for (std::size_t i = 0; i < emb.labels.size(); ++i) {
        nlohmann::json vec = nlohmann::json::object();
        for (const auto& [node, value] : emb.vectors[i]) vec[std::to_string(node)] = value;
        vectors[emb.labels[i]] = std::move(vec);
    }
    j["vectors"] = std::move(vectors);
    return j;
}

inline SparseEmbedding embedding_from_json(const nlohmann::json& j) {
    try {
        SparseEmbedding emb;
        emb.target = target_from_json(j.at("target"));
        emb.dimension = j.at("dimension").get<std::size_t>();
        emb.nodes = j.at("nodes").get<std::vector<int>>();
        emb.tree_ref = j.value("tree_ref", std::string{});
        for (const auto& [label, vec] : j.at("vectors").items()) {
            emb.labels.push_back(label);
            std::vector<std::pair<int, double>> entries;
            for (const auto& [key, value] : vec.items()) {
                int node = 0;
                auto res = std::from_chars(key.data(), key.data() + key.size(), node);
                if (res.ec != std::errc{} || res.ptr != key.data() + key.size())
                    throw ParseError("embedding JSON: bad node id '" + key + "'");
                entries.emplace_back(node, value.get<double>());
            }
            std::sort(entries.begin(), entries.end());
            emb.vectors.push_back(std::move(entries));
        }
        return emb;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("embedding JSON: ") + e.what());
    }
}

// Dense matrix export: header = node ids, one row of padded coordinates per
// point label.
inline std::string embedding_to_dense_csv(const SparseEmbedding& emb) {
    std::string out = "point";
    for (int node : emb.nodes) {
        out += ',';
        out += std::to_string(node);
    }
    out += '\n';
    for (std::size_t i = 0; i < emb.labels.size(); ++i) {
        out += emb.labels[i];
        auto it = emb.vectors[i].begin();
        for (int node : emb.nodes) {
            double value = 0.0;
            if (it != emb.vectors[i].end() && it->first == node) value = (it++)->second;
            out += ',';
            out += format_double(value);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json isometry_to_json(const IsometryCheck& check) {
    return {{"max_abs_error", check.max_abs_error},
            {"max_rel_error", check.max_rel_error},
            {"worst_pair", {check.worst_pair.first, check.worst_pair.second}},
            {"pass", check.pass}};
}

inline nlohmann::json distortion_to_json(const DistortionReport& report) {
    return {{"expansion", report.expansion},
            {"contraction", report.contraction},
            {"distortion", report.distortion},
            {"scale", report.scale},
            {"worst_expansion_pair",
             {report.worst_expansion_pair.first, report.worst_expansion_pair.second}},
            {"worst_contraction_pair",
             {report.worst_contraction_pair.first, report.worst_contraction_pair.second}}};
}

inline nlohmann::json fit_to_json(const UltrametricFit& fit) {
    nlohmann::json j = space_to_json(fit.sub_space());
    j["distortion"] = fit.distortion;
    return j;
}

inline nlohmann::json certificate_to_json(const SubsetCertificate& cert) {
    nlohmann::json j;
    j["subset"] = cert.subset;
    j["method"] = cert.method;
    j["achieved_distortion"] = cert.achieved_distortion;
    j["fitted"] = fit_to_json(cert.fitted);
    if (cert.lp_coordinates) j["lp_coordinates"] = embedding_to_json(*cert.lp_coordinates);
    return j;
}

// elapsed_sec stays off the wire: identical flags must produce identical
// bytes, and the timing would break that.
inline nlohmann::json record_to_json(const ExperimentRecord& rec) {
    return {{"n", rec.n},
            {"seed", rec.seed},
            {"largest_exact", rec.largest_exact},
            {"largest_greedy", rec.largest_greedy},
            {"exact", rec.exact}};
}

inline ExperimentRecord record_from_json(const nlohmann::json& j) {
    try {
        ExperimentRecord rec;
        rec.n = j.at("n").get<std::size_t>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.largest_exact = j.at("largest_exact").get<std::size_t>();
        rec.largest_greedy = j.at("largest_greedy").get<std::size_t>();
        rec.exact = j.at("exact").get<bool>();
        rec.elapsed_sec = j.value("elapsed_sec", 0.0);
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("experiment record: ") + e.what());
    }
}

}  // namespace umetric
