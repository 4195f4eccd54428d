#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "umetric/umetric.hpp"

using namespace umetric;

namespace {

struct Options {
    Tolerance tol;
    std::string output;
    std::string format;  // "", "json" or "csv"
    std::uint64_t seed = 0;
    bool verbose = false;
};

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void emit(const Options& opt, const std::string& content) {
    if (opt.output.empty())
        std::cout << content;
    else
        write_file(opt.output, content);
}

FileFormat pick_format(const Options& opt) {
    if (opt.format == "json") return FileFormat::json;
    if (opt.format == "csv") return FileFormat::csv;
    if (!opt.output.empty()) return format_from_path(opt.output, FileFormat::json);
    return FileFormat::json;
}

FiniteMetricSpace load(const Options& opt, const std::string& path) {
    FiniteMetricSpace space = load_space(path);
    if (opt.verbose)
        std::cerr << "loaded " << path << ": " << space.size() << " points\n";
    return space;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[i] = digits[(v >> (60 - 4 * i)) & 0xF];
    buf[16] = '\0';
    return std::string(buf);
}

// Frozen reference outputs. Any change to the PRNG, the generators or the
// serialization order shows up here first.
constexpr std::uint64_t kPrngSeed0[3] = {0xE220A8397B1DCDAFULL, 0x6E789E6AA1B965F4ULL,
                                         0x06C45D188009454FULL};

struct GoldenSpace {
    const char* label;
    GenSpec spec;
    const char* fingerprint;
    bool ultrametric;
};

std::vector<GoldenSpace> golden_spaces() {
    std::vector<GoldenSpace> gs;
    {
        GenSpec s;
        s.kind = GenSpec::Kind::dendrogram;
        s.n = 16;
        s.seed = 7;
        gs.push_back({"gen.dendrogram.n16s7", s, "5d5612b42eb37a49", true});
    }
    {
        GenSpec s;
        s.kind = GenSpec::Kind::padic;
        s.n = 27;
        s.seed = 1;
        s.p_base = 3;
        s.depth = 3;
        gs.push_back({"gen.padic.n27b3d3", s, "01d31930d038078f", true});
    }
    {
        GenSpec s;
        s.kind = GenSpec::Kind::erdos_renyi;
        s.n = 12;
        s.seed = 3;
        gs.push_back({"gen.erdos-renyi.n12s3", s, "98d09e56385e0a79", false});
    }
    {
        GenSpec s;
        s.kind = GenSpec::Kind::random_metric;
        s.n = 10;
        s.seed = 5;
        gs.push_back({"gen.random-metric.n10s5", s, "43ed3a03d0b7da02", false});
    }
    return gs;
}

FiniteMetricSpace golden_triple() {
    return FiniteMetricSpace({"a", "b", "c"}, {0, 1, 2, 1, 0, 2, 2, 2, 0}, "triple");
}

int run_selftest(std::ostream& out) {
    int checks = 0, failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
        ++checks;
        if (ok) {
            out << "ok " << name << "\n";
        } else {
            out << "FAIL " << name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
            ++failures;
        }
    };

    {
        SplitMix64 rng(0);
        const std::uint64_t got[3] = {rng.next(), rng.next(), rng.next()};
        check("prng.seed0",
              got[0] == kPrngSeed0[0] && got[1] == kPrngSeed0[1] && got[2] == kPrngSeed0[2],
              "got " + hex64(got[0]) + " " + hex64(got[1]) + " " + hex64(got[2]));
    }

    for (const auto& g : golden_spaces()) {
        const FiniteMetricSpace space = generate(g.spec);
        const std::string fp = space_fingerprint(space);
        check(std::string(g.label) + ".fingerprint", fp == g.fingerprint, "got " + fp);
        const ValidationReport report = validate(space);
        check(std::string(g.label) + ".metric", report.is_metric);
        if (g.ultrametric) check(std::string(g.label) + ".ultrametric", report.is_ultrametric);
    }

    {
        const FiniteMetricSpace space = golden_triple();
        const BallTree tree = build_tree(space);
        check("triple.tree.shape", tree.nodes.size() == 5 && tree.depth == 2);

        auto coord = [](const SparseEmbedding& emb, std::size_t point, int node) {
            for (const auto& [n, v] : emb.vectors[point])
                if (n == node) return v;
            return 0.0;
        };
        auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };

        const SparseEmbedding f2 = embed_lp(tree, 2.0);
        check("triple.lp2.coords", near(coord(f2, 0, 1), std::sqrt(1.5)) &&
                                       near(coord(f2, 0, 2), std::sqrt(0.5)) &&
                                       near(coord(f2, 1, 1), std::sqrt(1.5)) &&
                                       near(coord(f2, 1, 3), std::sqrt(0.5)) &&
                                       near(coord(f2, 2, 4), std::sqrt(2.0)));
        check("triple.lp2.distances", near(embedded_distance(f2, 0, 1), 1.0) &&
                                          near(embedded_distance(f2, 0, 2), 2.0) &&
                                          near(embedded_distance(f2, 1, 2), 2.0));

        const SparseEmbedding f1 = embed_lp(tree, 1.0);
        check("triple.lp1.coords", near(coord(f1, 0, 1), 0.5) && near(coord(f1, 0, 2), 0.5) &&
                                       near(coord(f1, 2, 4), 1.0));
        check("triple.lp1.distances", near(embedded_distance(f1, 0, 1), 1.0) &&
                                          near(embedded_distance(f1, 0, 2), 2.0));

        const SparseEmbedding g = embed_c0(tree);
        check("triple.c0.coords", near(coord(g, 0, 1), 2.0) && near(coord(g, 0, 2), 1.0) &&
                                      near(coord(g, 1, 3), 1.0) && near(coord(g, 2, 4), 2.0));
        check("triple.c0.distances", near(embedded_distance(g, 0, 1), 1.0) &&
                                         near(embedded_distance(g, 0, 2), 2.0));
    }

    {
        struct Case {
            GenSpec::Kind kind;
            std::size_t n;
            std::uint64_t seed;
        };
        const Case cases[] = {{GenSpec::Kind::dendrogram, 40, 11},
                              {GenSpec::Kind::padic, 40, 12}};
        const double ps[] = {1.0, 2.0, 10.0};
        for (const auto& c : cases) {
            GenSpec s;
            s.kind = c.kind;
            s.n = c.n;
            s.seed = c.seed;
            const FiniteMetricSpace space = generate(s);
            const BallTree tree = build_tree(space);
            const std::string base =
                std::string("roundtrip.") + kind_name(c.kind) + ".n" + std::to_string(c.n);
            for (double p : ps) {
                const IsometryCheck ic = isometry_check(space, embed_lp(tree, p));
                check(base + ".lp" + format_double(p), ic.pass,
                      "max_rel_error " + format_double(ic.max_rel_error));
            }
            const IsometryCheck ic = isometry_check(space, embed_c0(tree));
            check(base + ".c0", ic.pass, "max_rel_error " + format_double(ic.max_rel_error));
        }
    }

    {
        const FiniteMetricSpace path({"a", "b", "c"}, {0, 1, 2, 1, 0, 1, 2, 1, 0}, "path");
        const UltrametricFit fit = subdominant_ultrametric(path);
        check("subdominant.path", fit.distortion == 2.0 && fit.sub[0][2] == 1.0);

        GenSpec s;
        s.kind = GenSpec::Kind::erdos_renyi;
        s.n = 8;
        s.seed = 2;
        const FiniteMetricSpace w = generate(s);
        SplitMix64 rng(99);
        bool dichotomy = true;
        for (int trial = 0; trial < 100 && dichotomy; ++trial) {
            std::vector<std::size_t> subset;
            for (std::size_t i = 0; i < w.size(); ++i)
                if (rng.next() & 1) subset.push_back(i);
            if (subset.size() < 2) continue;
            const double d = ultrametric_distortion(w.induced(subset));
            dichotomy = (d == 1.0 || d == 2.0);
        }
        check("wn.dichotomy.n8", dichotomy);
    }

    {
        const FiniteMetricSpace space = golden_triple();
        const FiniteMetricSpace back = space_from_json(space_to_json(space));
        check("io.space.json", space_fingerprint(back) == space_fingerprint(space));
        const FiniteMetricSpace csv = space_from_csv(space_to_csv(space), space.name());
        check("io.space.csv", space_fingerprint(csv) == space_fingerprint(space));

        const SparseEmbedding emb = embed_lp(build_tree(space), 2.0);
        const SparseEmbedding round = embedding_from_json(embedding_to_json(emb));
        check("io.embedding.json", round.vectors == emb.vectors && round.nodes == emb.nodes &&
                                       round.labels == emb.labels &&
                                       round.tree_ref == emb.tree_ref);
    }

    out << "selftest: " << checks << " checks, " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
}

PointMap map_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("point map must be a JSON object of label pairs");
    PointMap map;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) throw ParseError("point map values must be labels");
        map[key] = value.get<std::string>();
    }
    return map;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact embeddings of finite ultrametric spaces into l_p and c_0,\n"
                 "subdominant ultrametrics, and low-distortion subset search"};
    app.require_subcommand(1);
    app.set_config("--config", "", "file with default values for the flags");

    Options opt;
    app.add_option("--tolerance-rel", opt.tol.rel, "relative comparison tolerance")
        ->capture_default_str();
    app.add_option("--tolerance-abs", opt.tol.abs, "absolute comparison tolerance")
        ->capture_default_str();
    app.add_option("--seed", opt.seed, "seed for randomized commands")->capture_default_str();
    app.add_option("-o,--output", opt.output, "write results to this file instead of stdout");
    app.add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("-v,--verbose", opt.verbose, "progress notes on stderr");

    int rc = 0;

    // validate
    std::string validate_in;
    auto* cmd_validate =
        app.add_subcommand("validate", "check the metric and strong triangle inequalities");
    cmd_validate->fallthrough();
    cmd_validate->add_option("space", validate_in, "space file (JSON or CSV)")->required();
    cmd_validate->callback([&] {
        const FiniteMetricSpace space = load(opt, validate_in);
        const ValidationReport report = validate(space, opt.tol);
        emit(opt, dump(validation_to_json(report)));
        if (!report.is_ultrametric) {
            std::cerr << "space is not ultrametric\n";
            rc = 1;
        }
    });

    // tree
    std::string tree_in;
    auto* cmd_tree = app.add_subcommand("tree", "build the nested ball-partition tree");
    cmd_tree->fallthrough();
    cmd_tree->add_option("space", tree_in, "ultrametric space file")->required();
    cmd_tree->callback([&] {
        const FiniteMetricSpace space = load(opt, tree_in);
        emit(opt, dump(tree_to_json(build_tree(space, opt.tol))));
    });

    // embed
    std::string embed_in, embed_target = "lp";
    double embed_p = 0.0;
    auto* cmd_embed = app.add_subcommand("embed", "compute the isometric embedding");
    cmd_embed->fallthrough();
    cmd_embed->add_option("space", embed_in, "ultrametric space file")->required();
    cmd_embed->add_option("--target", embed_target, "embedding target")
        ->check(CLI::IsMember({"lp", "c0"}))
        ->capture_default_str();
    auto* embed_p_opt = cmd_embed->add_option("--p", embed_p, "exponent for the lp target");
    cmd_embed->callback([&] {
        const FiniteMetricSpace space = load(opt, embed_in);
        const BallTree tree = build_tree(space, opt.tol);
        SparseEmbedding emb = [&] {
            if (embed_target == "c0") return embed_c0(tree);
            if (embed_p_opt->count() == 0) throw ParseError("--p is required for the lp target");
            if (embed_p < 1.0) throw ParseError("p must be >= 1");
            return embed_lp(tree, embed_p);
        }();
        if (pick_format(opt) == FileFormat::csv)
            emit(opt, embedding_to_dense_csv(emb));
        else
            emit(opt, dump(embedding_to_json(emb)));
    });

    // check
    std::string check_space_in, check_emb_in;
    auto* cmd_check = app.add_subcommand("check", "verify an embedding against its space");
    cmd_check->fallthrough();
    cmd_check->add_option("space", check_space_in, "space file")->required();
    cmd_check->add_option("embedding", check_emb_in, "embedding JSON")->required();
    cmd_check->callback([&] {
        const FiniteMetricSpace space = load(opt, check_space_in);
        const SparseEmbedding emb =
            embedding_from_json(detail::parse_json(read_file(check_emb_in), "embedding JSON"));
        const IsometryCheck result = isometry_check(space, emb, opt.tol);
        emit(opt, dump(isometry_to_json(result)));
        if (!result.pass) {
            std::cerr << "isometry check failed: max relative error "
                      << format_double(result.max_rel_error) << "\n";
            rc = 1;
        }
    });

    // extendcheck
    std::string ext_in, ext_center, ext_target = "lp";
    double ext_r = 0.0, ext_rp = 0.0, ext_p = 2.0;
    auto* cmd_ext = app.add_subcommand(
        "extendcheck", "verify ball-restriction consistency of the embedding");
    cmd_ext->fallthrough();
    cmd_ext->add_option("space", ext_in, "ultrametric space file")->required();
    cmd_ext->add_option("--center", ext_center, "center point label")->required();
    cmd_ext->add_option("--r", ext_r, "small ball radius")->required();
    cmd_ext->add_option("--rp", ext_rp, "large ball radius")->required();
    cmd_ext->add_option("--target", ext_target, "embedding target")
        ->check(CLI::IsMember({"lp", "c0"}))
        ->capture_default_str();
    cmd_ext->add_option("--p", ext_p, "exponent for the lp target")->capture_default_str();
    cmd_ext->callback([&] {
        const FiniteMetricSpace space = load(opt, ext_in);
        const auto center = space.index_of(ext_center);
        if (!center) throw DomainError("unknown point '" + ext_center + "'");
        if (ext_target == "lp" && ext_p < 1.0) throw ParseError("p must be >= 1");
        const EmbeddingTarget target =
            ext_target == "c0" ? EmbeddingTarget::C0() : EmbeddingTarget::Lp(ext_p);
        const bool pass = extend_check(space, *center, ext_r, ext_rp, target, opt.tol);
        emit(opt, dump(nlohmann::json{{"pass", pass}}));
        if (!pass) {
            std::cerr << "extension check failed\n";
            rc = 1;
        }
    });

    // distortion
    std::string dist_src, dist_dst, dist_map;
    auto* cmd_dist = app.add_subcommand("distortion", "distortion of a label map between spaces");
    cmd_dist->fallthrough();
    cmd_dist->add_option("--src", dist_src, "source space file")->required();
    cmd_dist->add_option("--dst", dist_dst, "target space file")->required();
    cmd_dist->add_option("--map", dist_map, "JSON object mapping source to target labels")
        ->required();
    cmd_dist->callback([&] {
        const FiniteMetricSpace src = load(opt, dist_src);
        const FiniteMetricSpace dst = load(opt, dist_dst);
        const PointMap map = map_from_json(detail::parse_json(read_file(dist_map), "point map"));
        emit(opt, dump(distortion_to_json(map_distortion(src, dst, map))));
    });

    // subdominant
    std::string subdom_in;
    auto* cmd_subdom =
        app.add_subcommand("subdominant", "largest ultrametric below the given metric");
    cmd_subdom->fallthrough();
    cmd_subdom->add_option("space", subdom_in, "space file")->required();
    cmd_subdom->callback([&] {
        const UltrametricFit fit = subdominant_ultrametric(load(opt, subdom_in));
        if (pick_format(opt) == FileFormat::csv)
            emit(opt, space_to_csv(fit.sub_space()));
        else
            emit(opt, dump(fit_to_json(fit)));
    });

    // dvoretzky
    std::string dv_in, dv_method = "exact", dv_strategy = "farthest-first";
    double dv_bound = 2.0;
    std::size_t dv_cap = kExactSubsetCap;
    double dv_lp_p = 0.0;
    auto* cmd_dv = app.add_subcommand(
        "dvoretzky", "largest subset embeddable into an ultrametric within a distortion bound");
    cmd_dv->fallthrough();
    cmd_dv->add_option("--space", dv_in, "space file")->required();
    cmd_dv->add_option("--distortion", dv_bound, "distortion bound (>= 1)")->required();
    cmd_dv->add_option("--method", dv_method, "search method")
        ->check(CLI::IsMember({"exact", "greedy"}))
        ->capture_default_str();
    cmd_dv->add_option("--strategy", dv_strategy, "greedy strategy")
        ->check(CLI::IsMember({"farthest-first", "peel-worst"}))
        ->capture_default_str();
    cmd_dv->add_option("--exact-cap", dv_cap, "point-count cap for the exact method")
        ->capture_default_str();
    auto* dv_lp_opt =
        cmd_dv->add_option("--lp-p", dv_lp_p, "also emit lp coordinates for this exponent");
    cmd_dv->callback([&] {
        const FiniteMetricSpace space = load(opt, dv_in);
        std::optional<double> lp_p;
        if (dv_lp_opt->count()) {
            if (dv_lp_p < 1.0) throw ParseError("p must be >= 1");
            lp_p = dv_lp_p;
        }
        const SubsetCertificate cert =
            dv_method == "exact"
                ? best_subset_exact(space, dv_bound, lp_p, dv_cap, opt.tol)
                : best_subset_greedy(space, dv_bound, strategy_from_string(dv_strategy),
                                     opt.seed, lp_p, opt.tol);
        emit(opt, dump(certificate_to_json(cert)));
    });

    // wn
    std::size_t wn_n = 0, wn_trials = 1, wn_cap = kExactSubsetCap;
    auto* cmd_wn = app.add_subcommand(
        "wn", "largest low-distortion subsets of random {1,2} graph metrics");
    cmd_wn->fallthrough();
    cmd_wn->add_option("--n", wn_n, "points per instance")->required();
    cmd_wn->add_option("--trials", wn_trials, "instances to run")->capture_default_str();
    cmd_wn->add_option("--exact-cap", wn_cap, "largest n searched exactly")
        ->capture_default_str();
    cmd_wn->callback([&] {
        std::string lines;
        for (const ExperimentRecord& rec : wn_experiment(wn_n, wn_trials, opt.seed, wn_cap))
            lines += record_to_json(rec).dump() + "\n";
        emit(opt, lines);
    });

    // plot
    std::string plot_in;
    auto* cmd_plot =
        app.add_subcommand("plot", "summarize experiment records as (n, mean, max) CSV");
    cmd_plot->fallthrough();
    cmd_plot->add_option("records", plot_in, "JSONL file of experiment records")->required();
    cmd_plot->callback([&] {
        std::map<std::size_t, std::vector<std::size_t>> sizes;
        std::istringstream in(read_file(plot_in));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const ExperimentRecord rec =
                record_from_json(detail::parse_json(line, "experiment record"));
            sizes[rec.n].push_back(rec.largest_exact);
        }
        std::string csv = "n,mean_size,max_size\n";
        for (const auto& [n, v] : sizes) {
            double mean = 0.0;
            std::size_t max = 0;
            for (std::size_t s : v) {
                mean += static_cast<double>(s);
                max = std::max(max, s);
            }
            mean /= static_cast<double>(v.size());
            csv += std::to_string(n) + "," + format_double(mean) + "," + std::to_string(max) +
                   "\n";
        }
        emit(opt, csv);
    });

    // gen
    GenSpec gen_spec;
    std::string gen_kind;
    auto* cmd_gen = app.add_subcommand("gen", "generate a seeded test space");
    cmd_gen->fallthrough();
    cmd_gen->add_option("--kind", gen_kind, "generator kind")
        ->check(CLI::IsMember({"dendrogram", "padic", "erdos-renyi", "random-metric"}))
        ->required();
    cmd_gen->add_option("--n", gen_spec.n, "number of points")->required();
    cmd_gen->add_option("--p-base", gen_spec.p_base, "digit base for padic")
        ->capture_default_str();
    cmd_gen->add_option("--depth", gen_spec.depth, "string length for padic")
        ->capture_default_str();
    cmd_gen->add_option("--branch-min", gen_spec.branch_min, "dendrogram minimum branching")
        ->capture_default_str();
    cmd_gen->add_option("--branch-max", gen_spec.branch_max, "dendrogram maximum branching")
        ->capture_default_str();
    cmd_gen->add_option("--decay-min", gen_spec.decay_min, "dendrogram radius decay lower bound")
        ->capture_default_str();
    cmd_gen->add_option("--decay-max", gen_spec.decay_max, "dendrogram radius decay upper bound")
        ->capture_default_str();
    cmd_gen->add_option("--edge-prob", gen_spec.edge_prob, "erdos-renyi edge probability")
        ->capture_default_str();
    cmd_gen->add_option("--dist-min", gen_spec.dist_min, "random-metric entry lower bound")
        ->capture_default_str();
    cmd_gen->add_option("--dist-max", gen_spec.dist_max, "random-metric entry upper bound")
        ->capture_default_str();
    cmd_gen->callback([&] {
        gen_spec.kind = kind_from_string(gen_kind);
        gen_spec.seed = opt.seed;
        if (gen_spec.kind == GenSpec::Kind::padic && !is_prime(gen_spec.p_base))
            std::cerr << "warning: p_base " << gen_spec.p_base << " is not prime\n";
        const FiniteMetricSpace space = generate(gen_spec);
        if (pick_format(opt) == FileFormat::csv)
            emit(opt, space_to_csv(space));
        else
            emit(opt, dump(space_to_json(space)));
    });

    // selftest
    auto* cmd_selftest =
        app.add_subcommand("selftest", "run the bundled deterministic golden suite");
    cmd_selftest->fallthrough();
    cmd_selftest->callback([&] { rc = run_selftest(std::cout); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
