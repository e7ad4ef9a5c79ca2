// Command-line front end: build, query, bench, gen-adversarial, gen-synthetic.

#include <CLI11.hpp>

#include <hyperann/hyperann.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace hyperann;

namespace {

struct IndexOptions {
    std::string oracle = "kdtree";
    std::size_t tables = 5;
    std::size_t hyperplanes = 15;
    double granularity = 2.0 / 3.0;
    int probe_radius = 1;
    std::uint64_t seed = 1;
};

void add_lsh_flags(CLI::App* cmd, IndexOptions& o) {
    cmd->add_option("--tables", o.tables, "LSH tables")->check(CLI::PositiveNumber);
    cmd->add_option("--hyperplanes", o.hyperplanes, "LSH hyperplanes per table")->check(CLI::PositiveNumber);
    cmd->add_option("--granularity", o.granularity, "LSH segment width");
    cmd->add_option("--probe-radius", o.probe_radius, "LSH multiprobe offset")->check(CLI::NonNegativeNumber);
}

LshParams lsh_params(IndexOptions const& o) {
    LshParams p;
    p.num_tables = o.tables;
    p.hyperplanes_per_table = o.hyperplanes;
    p.granularity = o.granularity;
    p.probe_radius = o.probe_radius;
    p.seed = o.seed;
    return p;
}

AnyIndex build_index(Dataset data, IndexOptions const& o) {
    switch (oracle_from_string(o.oracle)) {
    case OracleKind::brute: return BruteForceOracle(std::move(data));
    case OracleKind::kdtree: return KdTree(std::move(data));
    case OracleKind::lsh: return LshIndex(std::move(data), lsh_params(o));
    }
    throw std::invalid_argument("unknown oracle");
}

Dataset const& index_data(AnyIndex const& index) {
    return std::visit([](auto const& i) -> Dataset const& { return i.data(); }, index);
}

Point parse_point(std::string const& text) {
    std::vector<double> coords;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (std::exception const&) {
            throw std::invalid_argument("bad coordinate '" + tok + "' in --point");
        }
        if (used != tok.size()) throw std::invalid_argument("bad coordinate '" + tok + "' in --point");
        coords.push_back(v);
    }
    return Point(std::move(coords));
}

void print_result(std::ostream& out, std::string const& label, SearchResult const& r) {
    out << label;
    out << std::setprecision(17);
    for (std::size_t j = 0; j < r.neighbor_ids.size(); ++j) out << ' ' << r.neighbor_ids[j] << ':' << r.hyper_distances[j];
    out << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nearest-neighbor search in the Poincare ball"};
    app.require_subcommand(1);

    // build
    IndexOptions build_opts;
    std::string build_dataset;
    std::string build_out;
    auto* build = app.add_subcommand("build", "Build and persist an index over a dataset");
    build->add_option("--dataset", build_dataset, "Dataset text file")->required();
    build->add_option("--oracle", build_opts.oracle, "brute | kdtree | lsh");
    build->add_option("--seed", build_opts.seed, "LSH hyperplane seed");
    build->add_option("--out", build_out, "Index file")->required();
    add_lsh_flags(build, build_opts);

    // query
    IndexOptions query_opts;
    std::string query_index;
    std::string query_dataset;
    std::string query_queries;
    std::vector<std::string> query_points;
    std::string query_algo = "recentering";
    std::size_t query_k = 1;
    double query_c = 2.0;
    double query_w = 3.0;
    int query_bands = 25;
    double query_eps = 0.0;
    bool query_tracking = false;
    std::string query_out;
    auto* query = app.add_subcommand("query", "Search a persisted index (or a dataset built in memory)");
    auto* qi = query->add_option("--index", query_index, "Index file from `build`");
    auto* qd = query->add_option("--dataset", query_dataset, "Dataset text file, indexed in memory");
    qi->excludes(qd);
    query->add_option("--point", query_points, "Query coordinates, comma separated (repeatable)");
    query->add_option("--queries", query_queries, "Query dataset text file");
    query->add_option("--algo", query_algo, "recentering | binary_search | shell | randomized_shell | brute");
    query->add_option("--oracle", query_opts.oracle, "Oracle for --dataset: brute | kdtree | lsh");
    query->add_option("--k", query_k, "Neighbors to return")->check(CLI::PositiveNumber);
    query->add_option("--c", query_c, "Binary-search approximation factor");
    query->add_option("--w", query_w, "Shell width");
    query->add_option("--bands", query_bands, "Shell band count");
    query->add_option("--epsilon", query_eps, "Declared oracle slack (randomized shell)");
    query->add_option("--seed", query_opts.seed, "Seed (LSH hyperplanes, randomized order)");
    query->add_flag("--track-hyperbolic", query_tracking, "kd-tree: keep the hyperbolically closest examined point");
    query->add_option("--out", query_out, "Write results here instead of stdout");
    add_lsh_flags(query, query_opts);

    // bench
    IndexOptions bench_opts;
    std::string bench_dataset;
    std::string bench_queries;
    std::size_t bench_num_queries = 0;
    std::vector<std::string> bench_budgets;
    std::string bench_algo = "recentering";
    std::size_t bench_k = 1;
    double bench_c = 2.0;
    double bench_w = 3.0;
    int bench_bands = 25;
    double bench_eps = 0.0;
    std::size_t bench_threads = 0;
    bool bench_tracking = false;
    bool bench_no_clock = false;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Budgeted recall / ratio evaluation");
    app.set_config("--config", "", "Read options from an INI/TOML file; bench keys go under [bench]");
    bench->fallthrough();
    bench->add_option("--dataset", bench_dataset, "Dataset text file")->required();
    bench->add_option("--queries", bench_queries, "Query dataset text file");
    bench->add_option("--num-queries", bench_num_queries, "Withhold this many dataset points as queries");
    bench->add_option("--budget", bench_budgets, "Points-examined budget, or 'unlimited' (repeatable)");
    bench->add_option("--algo", bench_algo, "recentering | binary_search | shell | randomized_shell | brute");
    bench->add_option("--oracle", bench_opts.oracle, "brute | kdtree | lsh");
    bench->add_option("--k", bench_k, "Neighbors per query")->check(CLI::PositiveNumber);
    bench->add_option("--c", bench_c, "Binary-search approximation factor");
    bench->add_option("--w", bench_w, "Shell width");
    bench->add_option("--bands", bench_bands, "Shell band count");
    bench->add_option("--epsilon", bench_eps, "Declared oracle slack (randomized shell)");
    bench->add_option("--seed", bench_opts.seed, "Seed for splits, hyperplanes and random orders");
    bench->add_option("--threads", bench_threads, "Worker threads (0 = all cores)");
    bench->add_flag("--track-hyperbolic", bench_tracking, "kd-tree: keep the hyperbolically closest examined point");
    bench->add_flag("--no-wall-clock", bench_no_clock, "Write wall_seconds as 0 for reproducible output");
    bench->add_option("--out", bench_out, "Write JSON lines here (default: stdout after the table)");
    add_lsh_flags(bench, bench_opts);
    auto* bench_gran = bench->get_option("--granularity");

    // gen-adversarial
    std::string gen_kind;
    int gen_k = 5;
    double gen_qnorm = 0.0;
    double gen_s = 20.0;
    double gen_delta = 0.01;
    double gen_eps = 0.5;
    double gen_S = 400.0;
    double gen_c = 2.0;
    std::size_t gen_dim = 2;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-adversarial", "Write a worst-case construction and its expectations");
    gen->add_option("kind", gen_kind,
                    "recentering-worstcase | recentering-bestcase | rl-ratio | recentering-approx-failure | "
                    "binary-search-approx-failure | shell-exact-counterexample")
        ->required();
    auto* gen_qnorm_opt = gen->add_option("--q-norm", gen_qnorm, "Query norm (recentering-worstcase)");
    gen->add_option("--k", gen_k, "Hyperbolic rank of the Euclidean nearest neighbor");
    gen->add_option("--s", gen_s, "Ratio parameter s");
    gen->add_option("--delta", gen_delta, "delta");
    gen->add_option("--epsilon", gen_eps, "Oracle slack");
    gen->add_option("--S", gen_S, "Target ratio (binary-search failure)");
    gen->add_option("--c", gen_c, "Binary-search approximation factor");
    gen->add_option("--dim", gen_dim, "Ambient dimension");
    gen->add_option("--out", gen_out, "Dataset path; writes <out>.queries and <out>.json alongside")->required();

    // gen-synthetic
    std::size_t syn_n = 5000;
    std::size_t syn_dim = 10;
    std::uint64_t syn_seed = 1;
    double syn_max_norm = 0.9999;
    std::string syn_kind = "hierarchical";
    std::string syn_out;
    auto* syn = app.add_subcommand("gen-synthetic", "Write a synthetic dataset");
    syn->add_option("--n", syn_n, "Point count");
    syn->add_option("--dim", syn_dim, "Dimension")->check(CLI::PositiveNumber);
    syn->add_option("--seed", syn_seed, "Seed");
    syn->add_option("--max-norm", syn_max_norm, "Largest norm");
    syn->add_option("--kind", syn_kind, "hierarchical | uniform");
    syn->add_option("--out", syn_out, "Dataset path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build) {
            AnyIndex index = build_index(load_dataset(build_dataset), build_opts);
            save_index(build_out, index);
            std::cout << "indexed " << index_data(index).size() << " points -> " << build_out << '\n';
            return 0;
        }

        if (*query) {
            if (query_index.empty() && query_dataset.empty()) throw std::invalid_argument("query needs --index or --dataset");
            AnyIndex index = query_index.empty() ? build_index(load_dataset(query_dataset), query_opts)
                                                 : load_index(query_index);
            Dataset const& data = index_data(index);
            Dataset queries(data.dim());
            if (!query_queries.empty()) queries = load_dataset(query_queries);
            for (std::size_t i = 0; i < query_points.size(); ++i)
                queries.add(-static_cast<point_id_t>(i) - 1, parse_point(query_points[i]));
            if (queries.empty()) throw std::invalid_argument("query needs --point or --queries");
            require_dimension(data, queries.dim());

            EvalConfig cfg;
            cfg.algorithm = algorithm_from_string(query_algo);
            cfg.oracle = static_cast<OracleKind>(index.index());
            cfg.k = query_k;
            cfg.c = query_c;
            cfg.width = query_w;
            cfg.num_bands = query_bands;
            cfg.epsilon = query_eps;
            cfg.seed = query_opts.seed;
            cfg.hyperbolic_tracking = query_tracking;
            if (auto const* lsh = std::get_if<LshIndex>(&index)) {
                cfg.lsh = lsh->params();
                cfg.per_band_granularity = false;
            }
            cfg.validate();

            QueryRunner runner;
            SearchOptions options;
            options.hyperbolic_tracking = query_tracking;
            if (cfg.algorithm == Algorithm::recentering || cfg.algorithm == Algorithm::binary_search) {
                // Search the loaded index itself.
                runner = std::visit(
                    [&](auto const& idx) -> QueryRunner {
                        using T = std::decay_t<decltype(idx)>;
                        if constexpr (std::is_same_v<T, LshIndex>) {
                            throw std::invalid_argument(query_algo + " needs an exact index (brute or kdtree)");
                        } else {
                            auto shared = std::make_shared<const T>(idx);
                            std::size_t const k = cfg.k;
                            double const c = cfg.c;
                            bool const binary = cfg.algorithm == Algorithm::binary_search;
                            return [shared, k, c, binary](Point const& q, std::size_t, SearchOptions const& o) {
                                if (binary) return binary_search_nn(q, *shared, c, o);
                                return k == 1 ? recentering_nn(q, *shared, o) : recentering_knn(q, *shared, k, o);
                            };
                        }
                    },
                    index);
            } else {
                runner = make_runner(cfg, data);
            }

            std::ofstream file;
            if (!query_out.empty()) {
                file.open(query_out);
                if (!file) throw std::runtime_error("cannot open '" + query_out + "' for writing");
            }
            std::ostream& out = query_out.empty() ? std::cout : file;
            for (std::size_t i = 0; i < queries.size(); ++i) {
                auto const r = runner(queries.point(i), i, options);
                print_result(out, std::to_string(queries.id(i)), r);
            }
            return 0;
        }

        if (*bench) {
            Dataset data = load_dataset(bench_dataset);
            Dataset queries(data.dim());
            if (!bench_queries.empty()) {
                if (bench_num_queries > 0) throw std::invalid_argument("use either --queries or --num-queries");
                queries = load_dataset(bench_queries);
            } else {
                if (bench_num_queries == 0) throw std::invalid_argument("bench needs --queries or --num-queries");
                auto split = split_queries(data, bench_num_queries, bench_opts.seed);
                data = std::move(split.first);
                queries = std::move(split.second);
            }
            EvalConfig cfg;
            cfg.algorithm = algorithm_from_string(bench_algo);
            cfg.oracle = oracle_from_string(bench_opts.oracle);
            cfg.k = bench_k;
            cfg.budgets.clear();
            if (bench_budgets.empty()) bench_budgets.push_back("unlimited");
            for (auto const& b : bench_budgets) cfg.budgets.push_back(parse_budget(b));
            cfg.c = bench_c;
            cfg.width = bench_w;
            cfg.num_bands = bench_bands;
            cfg.lsh = lsh_params(bench_opts);
            cfg.per_band_granularity = bench_gran->count() == 0;
            cfg.epsilon = bench_eps;
            cfg.hyperbolic_tracking = bench_tracking;
            cfg.seed = bench_opts.seed;
            cfg.threads = bench_threads;

            EvalReport const report = evaluate(cfg, data, queries);
            write_report_table(std::cout, report);
            if (bench_out.empty()) {
                write_report_jsonl(std::cout, report, !bench_no_clock);
            } else {
                std::ofstream out(bench_out);
                if (!out) throw std::runtime_error("cannot open '" + bench_out + "' for writing");
                write_report_jsonl(out, report, !bench_no_clock);
            }
            return 0;
        }

        if (*gen) {
            Construction c = [&] {
                switch (construction_kind_from_string(gen_kind)) {
                case ConstructionKind::recentering_worstcase:
                    return gen_recentering_worstcase(gen_k, gen_qnorm_opt->count() ? std::optional<double>(gen_qnorm)
                                                                                   : std::nullopt,
                                                     std::max<std::size_t>(gen_dim, 1));
                case ConstructionKind::recentering_bestcase: return gen_recentering_bestcase(gen_k, gen_dim);
                case ConstructionKind::rl_ratio: return gen_rl_ratio_instance(gen_s, gen_delta, gen_dim);
                case ConstructionKind::recentering_approx_failure:
                    return gen_recentering_approx_failure(gen_eps, 40.0, 10.0, gen_dim);
                case ConstructionKind::binary_search_approx_failure:
                    return gen_binary_search_approx_failure(gen_eps, gen_S, gen_c, gen_dim);
                case ConstructionKind::shell_exact_counterexample: return shell_exact_counterexample();
                }
                throw std::invalid_argument("unknown construction");
            }();
            Dataset queries(c.query.dim());
            queries.add(-1, c.query);
            {
                std::ostringstream data_text;
                std::ostringstream query_text;
                write_dataset_text(data_text, c.data);
                write_dataset_text(query_text, queries);
                std::ofstream(gen_out) << data_text.str();
                std::ofstream(gen_out + ".queries") << query_text.str();
            }
            std::ofstream(gen_out + ".json") << construction_sidecar(c).dump(2) << '\n';
            std::cout << "wrote " << gen_out << ", " << gen_out << ".queries, " << gen_out << ".json\n";
            return 0;
        }

        if (*syn) {
            Dataset d = syn_kind == "uniform" ? random_ball_dataset(syn_n, syn_dim, syn_max_norm, syn_seed)
                      : syn_kind == "hierarchical"
                          ? synthetic_hierarchical_dataset(syn_n, syn_dim, syn_seed, syn_max_norm)
                          : throw std::invalid_argument("unknown synthetic kind '" + syn_kind + "'");
            save_dataset(syn_out, d);
            std::cout << "wrote " << d.size() << " points -> " << syn_out << '\n';
            return 0;
        }
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
