#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "adversarial.hpp"
#include "dataset.hpp"
#include "geometry.hpp"
#include "kdtree.hpp"
#include "lsh.hpp"
#include "oracles.hpp"
#include "search.hpp"
#include "shell.hpp"

namespace hyperann {

// ---------------------------------------------------------------------------
// Dataset text format
// ---------------------------------------------------------------------------

/// Parses "n dim" then n rows of "id v_1 .. v_dim".
inline Dataset read_dataset_text(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };
    auto fail = [&](std::string const& what) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
    };

    if (!next_line()) throw std::runtime_error("line 1: missing header \"n dim\"");
    long long n = -1;
    long long dim = -1;
    {
        std::istringstream hs(line);
        std::string extra;
        if (!(hs >> n >> dim) || (hs >> extra)) fail("header must be \"n dim\"");
        if (n < 0) fail("negative point count");
        if (dim < 1) fail("dimension must be >= 1");
    }
    Dataset data(static_cast<std::size_t>(dim));
    for (long long row = 0; row < n; ++row) {
        if (!next_line()) throw std::runtime_error("line " + std::to_string(line_no + 1) + ": expected " +
                                                   std::to_string(n) + " rows, found " + std::to_string(row));
        std::istringstream rs(line);
        std::string tok;
        std::vector<std::string> tokens;
        while (rs >> tok) tokens.push_back(tok);
        if (tokens.size() != static_cast<std::size_t>(dim) + 1)
            fail("expected id and " + std::to_string(dim) + " coordinates, got " + std::to_string(tokens.size()) +
                 " fields");
        point_id_t id = 0;
        std::vector<double> coords(static_cast<std::size_t>(dim));
        try {
            std::size_t used = 0;
            id = std::stoll(tokens[0], &used);
            if (used != tokens[0].size()) throw std::invalid_argument("id");
            for (std::size_t d = 0; d < coords.size(); ++d) {
                coords[d] = std::stod(tokens[d + 1], &used);
                if (used != tokens[d + 1].size()) throw std::invalid_argument("coordinate");
            }
        } catch (std::exception const&) {
            fail("malformed number");
        }
        if (data.contains(id)) fail("duplicate id " + std::to_string(id));
        try {
            data.add(id, Point(std::move(coords)));
        } catch (std::domain_error const&) {
            fail("point " + std::to_string(id) + " has norm >= 1");
        } catch (std::invalid_argument const& e) {
            fail("point " + std::to_string(id) + ": " + e.what());
        }
    }
    if (next_line()) fail("unexpected data after " + std::to_string(n) + " rows");
    return data;
}

inline Dataset load_dataset(std::string const& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
    try {
        return read_dataset_text(in);
    } catch (std::runtime_error const& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

/// Whether the coordinates alone reproduce the point's boundary gap closely enough for text storage.
inline bool representable_as_text(Point const& p) {
    double const implied = 1.0 - squared_norm(p.coords());
    if (!(implied > 0.0)) return false;
    return std::abs(implied - p.boundary_gap()) <= 1e-6 * p.boundary_gap();
}

inline void write_dataset_text(std::ostream& out, Dataset const& data) {
    out << data.size() << ' ' << data.dim() << '\n';
    out << std::setprecision(17);
    for (std::size_t p = 0; p < data.size(); ++p) {
        if (!representable_as_text(data.point(p)))
            throw std::domain_error("point " + std::to_string(data.id(p)) +
                                    " lies too close to the boundary for the text format");
        out << data.id(p);
        for (double v : data.coords(p)) out << ' ' << v;
        out << '\n';
    }
}

inline void save_dataset(std::string const& path, Dataset const& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_dataset_text(out, data);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

/// Withholds `num_queries` points chosen uniformly by `seed`; both parts keep input order.
inline std::pair<Dataset, Dataset> split_queries(Dataset const& data, std::size_t num_queries, std::uint64_t seed) {
    if (num_queries >= data.size() && num_queries > 0)
        throw std::invalid_argument("num_queries (" + std::to_string(num_queries) + ") must be smaller than |D| (" +
                                    std::to_string(data.size()) + ")");
    std::vector<std::size_t> positions(data.size());
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(positions.begin(), positions.end(), rng);
    std::vector<bool> withheld(data.size(), false);
    for (std::size_t i = 0; i < num_queries; ++i) withheld[positions[i]] = true;
    Dataset rest(data.dim());
    Dataset queries(data.dim());
    for (std::size_t p = 0; p < data.size(); ++p) (withheld[p] ? queries : rest).add(data.id(p), data.point(p));
    return {std::move(rest), std::move(queries)};
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

inline std::vector<double> random_unit_vector(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(dim);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (auto& x : v) {
            x = gauss(rng);
            sq += x * x;
        }
    } while (sq == 0.0);
    double const inv = 1.0 / std::sqrt(sq);
    for (auto& x : v) x *= inv;
    return v;
}

/// Points with uniform random direction and hyperbolic radius uniform in [0, d_H(0, max_norm)].
inline Dataset random_ball_dataset(std::size_t n, std::size_t dim, double max_norm, std::uint64_t seed,
                                   point_id_t first_id = 0) {
    if (!(max_norm > 0.0 && max_norm < 1.0)) throw std::invalid_argument("max_norm must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    double const rho_max = 2.0 * std::atanh(max_norm);
    std::uniform_real_distribution<double> radius(0.0, rho_max);
    Dataset data(dim);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = random_unit_vector(dim, rng);
        double const r = std::tanh(radius(rng) / 2.0);
        for (auto& x : v) x *= r;
        data.add(first_id + static_cast<point_id_t>(i), Point(std::move(v)));
    }
    return data;
}

/// Möbius addition `x (+) y` in the Poincaré ball.
inline std::vector<double> mobius_add(std::span<const double> x, std::span<const double> y) {
    double const xy = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
    double const xx = squared_norm(x);
    double const yy = squared_norm(y);
    double const a = 1.0 + 2.0 * xy + yy;
    double const b = 1.0 - xx;
    double const den = 1.0 + 2.0 * xy + xx * yy;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (a * x[i] + b * y[i]) / den;
    return out;
}

/**
 *  Tree-shaped cloud: each point is a random earlier point (or the origin)
 *  translated by a short hyperbolic step that leans away from the origin.
 *  Produces the deep, boundary-hugging fan-out typical of taxonomy embeddings.
 */
inline Dataset synthetic_hierarchical_dataset(std::size_t n, std::size_t dim, std::uint64_t seed,
                                              double max_norm = 0.9999, std::size_t roots = 8) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(max_norm > 0.0 && max_norm < 1.0)) throw std::invalid_argument("max_norm must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> step(0.4, 1.6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> nodes;
    std::vector<double> const origin(dim, 0.0);
    Dataset data(dim);
    std::size_t attempts = 0;
    while (data.size() < n) {
        if (++attempts > 100 * n + 1000) throw std::runtime_error("hierarchical generator could not place points");
        std::vector<double> const* parent = &origin;
        if (nodes.size() >= roots) parent = &nodes[std::uniform_int_distribution<std::size_t>(0, nodes.size() - 1)(rng)];
        auto dir = random_unit_vector(dim, rng);
        double const pn = std::sqrt(squared_norm(*parent));
        if (pn > 0.0) {
            double const lean = 0.6 * unit(rng);
            double sq = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                dir[i] = (1.0 - lean) * dir[i] + lean * (*parent)[i] / pn;
                sq += dir[i] * dir[i];
            }
            double const inv = 1.0 / std::sqrt(sq);
            for (auto& x : dir) x *= inv;
        }
        double const r = std::tanh((nodes.size() < roots ? 1.5 : step(rng)) / 2.0);
        for (auto& x : dir) x *= r;
        auto child = mobius_add(*parent, dir);
        double const cn = squared_norm(child);
        if (!(cn < max_norm * max_norm)) continue;
        data.add(static_cast<point_id_t>(data.size()), Point(child));
        nodes.push_back(std::move(child));
    }
    return data;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

enum class Algorithm { recentering, binary_search, shell, randomized_shell, brute };
enum class OracleKind { brute, kdtree, lsh };

inline std::string to_string(Algorithm a) {
    switch (a) {
    case Algorithm::recentering: return "recentering";
    case Algorithm::binary_search: return "binary_search";
    case Algorithm::shell: return "shell";
    case Algorithm::randomized_shell: return "randomized_shell";
    case Algorithm::brute: return "brute";
    }
    return "unknown";
}

inline std::string to_string(OracleKind o) {
    switch (o) {
    case OracleKind::brute: return "brute";
    case OracleKind::kdtree: return "kdtree";
    case OracleKind::lsh: return "lsh";
    }
    return "unknown";
}

inline Algorithm algorithm_from_string(std::string const& s) {
    for (auto a : {Algorithm::recentering, Algorithm::binary_search, Algorithm::shell, Algorithm::randomized_shell,
                   Algorithm::brute})
        if (to_string(a) == s) return a;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

inline OracleKind oracle_from_string(std::string const& s) {
    if (s == "kd" || s == "kd-tree") return OracleKind::kdtree;
    for (auto o : {OracleKind::brute, OracleKind::kdtree, OracleKind::lsh})
        if (to_string(o) == s) return o;
    throw std::invalid_argument("unknown oracle '" + s + "'");
}

inline constexpr std::size_t kUnlimitedBudget = std::numeric_limits<std::size_t>::max();

inline std::size_t parse_budget(std::string const& s) {
    if (s == "inf" || s == "unlimited") return kUnlimitedBudget;
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("budget '" + s + "' is not a positive integer or 'unlimited'");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (std::exception const&) {
        throw std::invalid_argument("budget '" + s + "' is not a positive integer or 'unlimited'");
    }
    if (used != s.size() || v == 0) throw std::invalid_argument("budget '" + s + "' is not a positive integer or 'unlimited'");
    return static_cast<std::size_t>(v);
}

inline std::string budget_label(std::size_t b) { return b == kUnlimitedBudget ? "unlimited" : std::to_string(b); }

struct EvalConfig {
    Algorithm algorithm = Algorithm::recentering;
    OracleKind oracle = OracleKind::kdtree;
    std::size_t k = 1;
    std::vector<std::size_t> budgets{kUnlimitedBudget};
    double c = 2.0;
    double width = 3.0;
    int num_bands = 25;
    LshParams lsh{};
    /// Per-band LSH segment width `2 / min(w^b, 10000)` instead of `lsh.granularity`.
    bool per_band_granularity = true;
    /// Declared oracle slack for the randomized variant's decision threshold.
    double epsilon = 0.0;
    bool hyperbolic_tracking = false;
    std::uint64_t seed = 1;
    /// 0 picks the hardware concurrency.
    std::size_t threads = 0;

    void validate() const {
        if (k == 0) throw std::invalid_argument("k must be >= 1");
        if (budgets.empty()) throw std::invalid_argument("at least one budget is required");
        for (std::size_t i = 0; i < budgets.size(); ++i) {
            if (budgets[i] == 0) throw std::invalid_argument("budgets must be positive");
            if (i > 0 && budgets[i] <= budgets[i - 1]) throw std::invalid_argument("budgets must be strictly ascending");
        }
        if (algorithm == Algorithm::binary_search && !(c > 1.0)) throw std::invalid_argument("c must be > 1");
        if ((algorithm == Algorithm::recentering || algorithm == Algorithm::binary_search) && oracle == OracleKind::lsh)
            throw std::invalid_argument(to_string(algorithm) + " needs an exact oracle (brute or kdtree), not lsh");
        if (k > 1 && (algorithm == Algorithm::binary_search || algorithm == Algorithm::randomized_shell))
            throw std::invalid_argument(to_string(algorithm) + " supports k = 1 only");
        if (!(width > 1.0)) throw std::invalid_argument("shell width must be > 1");
        if (num_bands < 1) throw std::invalid_argument("band count must be >= 1");
        if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
        if (oracle == OracleKind::lsh) lsh.validate();
    }
};

struct EvalRow {
    std::size_t budget = kUnlimitedBudget;
    double recall = 0.0;
    double avg_ratio = 1.0;
    double avg_max_ratio = 1.0;
    double mean_oracle_calls = 0.0;
    double sd_oracle_calls = 0.0;
    std::size_t min_oracle_calls = 0;
    std::size_t max_oracle_calls = 0;
    double mean_points_examined = 0.0;
    std::size_t terminated_early = 0;
    double wall_seconds = 0.0;
};

struct EvalReport {
    std::string algorithm;
    std::string oracle;
    std::size_t k = 1;
    std::size_t num_queries = 0;
    std::vector<EvalRow> rows;
};

/// Quality of one query's answer against its ground truth.
struct QueryScore {
    double recall = 0.0;
    std::vector<double> ratios;
};

/// Recall `|found ∩ truth| / K` and pointwise ratios. A zero true distance scores 1 only when
/// matched exactly; otherwise that rank is left out of the ratios.
inline QueryScore score_query(SearchResult const& found, SearchResult const& truth) {
    QueryScore s;
    std::size_t const K = truth.neighbor_ids.size();
    if (K == 0) return s;
    std::unordered_set<point_id_t> const truth_ids(truth.neighbor_ids.begin(), truth.neighbor_ids.end());
    std::size_t hits = 0;
    for (auto id : found.neighbor_ids) hits += truth_ids.count(id);
    s.recall = static_cast<double>(hits) / static_cast<double>(K);
    std::size_t const ranks = std::min(K, found.hyper_distances.size());
    for (std::size_t j = 0; j < ranks; ++j) {
        double const got = found.hyper_distances[j];
        double const best = truth.hyper_distances[j];
        if (best == 0.0) {
            if (got == 0.0) s.ratios.push_back(1.0);
            continue;
        }
        s.ratios.push_back(got / best);
    }
    return s;
}

using QueryRunner = std::function<SearchResult(Point const&, std::size_t query_index, SearchOptions const&)>;

namespace detail {

template <EuclideanOracle O>
QueryRunner make_shell_runner(Dataset const& data, EvalConfig const& cfg,
                              typename ShellPartition<O>::Factory const& factory) {
    auto params = ShellParams::from_band_count(cfg.width, cfg.num_bands);
    auto partition = std::make_shared<ShellPartition<O>>(data, params, factory);
    if (cfg.algorithm == Algorithm::randomized_shell) {
        double const eps = cfg.epsilon;
        std::uint64_t const seed = cfg.seed;
        return [partition, eps, seed](Point const& q, std::size_t i, SearchOptions const& o) {
            return randomized_shell_nn(q, *partition, eps, seed + 0x9e3779b97f4a7c15ull * (i + 1), o);
        };
    }
    std::size_t const k = cfg.k;
    return [partition, k](Point const& q, std::size_t, SearchOptions const& o) { return shell_knn(q, *partition, k, o); };
}

template <EuclideanKOracle O>
QueryRunner make_recentering_runner(std::shared_ptr<const O> oracle, EvalConfig const& cfg) {
    std::size_t const k = cfg.k;
    if (cfg.algorithm == Algorithm::binary_search) {
        double const c = cfg.c;
        return [oracle, c](Point const& q, std::size_t, SearchOptions const& o) { return binary_search_nn(q, *oracle, c, o); };
    }
    return [oracle, k](Point const& q, std::size_t, SearchOptions const& o) {
        return k == 1 ? recentering_nn(q, *oracle, o) : recentering_knn(q, *oracle, k, o);
    };
}

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F const& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace detail

/// Builds the configured index over `data` once and returns a per-query runner.
inline QueryRunner make_runner(EvalConfig const& cfg, Dataset const& data) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
    switch (cfg.algorithm) {
    case Algorithm::brute: {
        auto shared = std::make_shared<const Dataset>(data);
        std::size_t const k = cfg.k;
        return [shared, k](Point const& q, std::size_t, SearchOptions const& o) {
            return brute_force_hyper_knn(q, *shared, k, o);
        };
    }
    case Algorithm::recentering:
    case Algorithm::binary_search:
        if (cfg.oracle == OracleKind::kdtree) {
            auto tree = std::make_shared<const KdTree>(data);
            return detail::make_recentering_runner<KdTree>(tree, cfg);
        } else {
            auto brute = std::make_shared<const BruteForceOracle>(data);
            return detail::make_recentering_runner<BruteForceOracle>(brute, cfg);
        }
    case Algorithm::shell:
    case Algorithm::randomized_shell:
        switch (cfg.oracle) {
        case OracleKind::brute:
            return detail::make_shell_runner<BruteForceOracle>(data, cfg,
                                                               [](Dataset d, int) { return BruteForceOracle(std::move(d)); });
        case OracleKind::kdtree:
            return detail::make_shell_runner<KdTree>(data, cfg, [](Dataset d, int) { return KdTree(std::move(d)); });
        case OracleKind::lsh: {
            auto params = ShellParams::from_band_count(cfg.width, cfg.num_bands);
            return detail::make_shell_runner<LshIndex>(
                data, cfg, band_lsh_factory(params, cfg.lsh, data.dim(), cfg.per_band_granularity));
        }
        }
    }
    throw std::invalid_argument("unsupported configuration");
}

/// Runs every query at every budget and aggregates against brute-force ground truth.
inline EvalReport evaluate(EvalConfig const& cfg, Dataset const& data, Dataset const& queries) {
    cfg.validate();
    if (cfg.k > data.size()) throw std::invalid_argument("k exceeds dataset size");
    require_dimension(data, queries.dim());
    QueryRunner const runner = make_runner(cfg, data);
    std::size_t const nq = queries.size();

    std::vector<SearchResult> truth(nq);
    detail::parallel_for(nq, cfg.threads,
                         [&](std::size_t i) { truth[i] = brute_force_hyper_knn(queries.point(i), data, cfg.k); });

    EvalReport report;
    report.algorithm = to_string(cfg.algorithm);
    report.oracle = cfg.algorithm == Algorithm::brute ? "none" : to_string(cfg.oracle);
    report.k = cfg.k;
    report.num_queries = nq;

    for (std::size_t budget : cfg.budgets) {
        SearchOptions options;
        if (budget != kUnlimitedBudget) options.budget = budget;
        options.hyperbolic_tracking = cfg.hyperbolic_tracking;
        std::vector<SearchResult> results(nq);
        auto const start = std::chrono::steady_clock::now();
        detail::parallel_for(nq, cfg.threads, [&](std::size_t i) { results[i] = runner(queries.point(i), i, options); });
        auto const stop = std::chrono::steady_clock::now();

        EvalRow row;
        row.budget = budget;
        row.wall_seconds = std::chrono::duration<double>(stop - start).count();
        double recall_sum = 0.0;
        double ratio_sum = 0.0;
        std::size_t ratio_count = 0;
        double max_sum = 0.0;
        std::size_t max_count = 0;
        std::vector<double> calls;
        double examined = 0.0;
        for (std::size_t i = 0; i < nq; ++i) {
            auto const s = score_query(results[i], truth[i]);
            recall_sum += s.recall;
            for (double r : s.ratios) ratio_sum += r;
            ratio_count += s.ratios.size();
            if (!s.ratios.empty()) {
                max_sum += *std::max_element(s.ratios.begin(), s.ratios.end());
                ++max_count;
            }
            auto const& st = results[i].stats;
            calls.push_back(static_cast<double>(st.oracle_calls));
            examined += static_cast<double>(st.points_examined);
            row.terminated_early += results[i].terminated_early ? 1 : 0;
        }
        if (nq > 0) {
            row.recall = recall_sum / static_cast<double>(nq);
            double const mean = std::accumulate(calls.begin(), calls.end(), 0.0) / static_cast<double>(nq);
            double var = 0.0;
            for (double c : calls) var += (c - mean) * (c - mean);
            row.mean_oracle_calls = mean;
            row.sd_oracle_calls = nq > 1 ? std::sqrt(var / static_cast<double>(nq - 1)) : 0.0;
            row.min_oracle_calls = static_cast<std::size_t>(*std::min_element(calls.begin(), calls.end()));
            row.max_oracle_calls = static_cast<std::size_t>(*std::max_element(calls.begin(), calls.end()));
            row.mean_points_examined = examined / static_cast<double>(nq);
        }
        if (ratio_count > 0) row.avg_ratio = ratio_sum / static_cast<double>(ratio_count);
        if (max_count > 0) row.avg_max_ratio = max_sum / static_cast<double>(max_count);
        report.rows.push_back(row);
    }
    return report;
}

inline void write_report_table(std::ostream& out, EvalReport const& report) {
    out << "algorithm=" << report.algorithm << " oracle=" << report.oracle << " k=" << report.k
        << " queries=" << report.num_queries << '\n';
    out << std::left << std::setw(10) << "budget" << std::right << std::setw(9) << "recall" << std::setw(11)
        << "avg_ratio" << std::setw(11) << "max_ratio" << std::setw(11) << "calls" << std::setw(9) << "sd"
        << std::setw(6) << "min" << std::setw(6) << "max" << std::setw(12) << "examined" << std::setw(8) << "early"
        << std::setw(10) << "seconds" << '\n';
    for (auto const& r : report.rows) {
        out << std::left << std::setw(10) << budget_label(r.budget) << std::right << std::fixed << std::setprecision(4)
            << std::setw(9) << r.recall << std::setw(11) << r.avg_ratio << std::setw(11) << r.avg_max_ratio
            << std::setprecision(3) << std::setw(11) << r.mean_oracle_calls << std::setw(9) << r.sd_oracle_calls
            << std::setw(6) << r.min_oracle_calls << std::setw(6) << r.max_oracle_calls << std::setprecision(1)
            << std::setw(12) << r.mean_points_examined << std::setw(8) << r.terminated_early << std::setprecision(3)
            << std::setw(10) << r.wall_seconds << '\n';
        out.unsetf(std::ios::fixed);
    }
}

inline nlohmann::ordered_json report_row_json(EvalRow const& r, bool include_timing = true) {
    nlohmann::ordered_json j;
    if (r.budget == kUnlimitedBudget)
        j["budget"] = "unlimited";
    else
        j["budget"] = r.budget;
    j["recall"] = r.recall;
    j["avg_ratio"] = r.avg_ratio;
    j["avg_max_ratio"] = r.avg_max_ratio;
    j["mean_oracle_calls"] = r.mean_oracle_calls;
    j["wall_seconds"] = include_timing ? r.wall_seconds : 0.0;
    return j;
}

/// One JSON object per budget row.
inline void write_report_jsonl(std::ostream& out, EvalReport const& report, bool include_timing = true) {
    for (auto const& r : report.rows) out << report_row_json(r, include_timing).dump() << '\n';
}

/// Expected-assertion sidecar for a generated construction.
inline nlohmann::ordered_json construction_sidecar(Construction const& c) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(c.kind);
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (auto const& [k, v] : c.params) params[k] = v;
    j["params"] = params;
    nlohmann::ordered_json query = nlohmann::ordered_json::array();
    for (double v : c.query.coords()) query.push_back(v);
    j["query"] = query;
    nlohmann::ordered_json expected = nlohmann::ordered_json::object();
    auto const& e = c.expected;
    if (e.oracle_calls) expected["oracle_calls"] = *e.oracle_calls;
    if (e.ratio_lower_bound) expected["ratio_lower_bound"] = *e.ratio_lower_bound;
    if (e.measured_ratio) expected["measured_ratio"] = *e.measured_ratio;
    if (e.nearest_id) expected["nearest_id"] = *e.nearest_id;
    if (e.misleading_id) expected["misleading_id"] = *e.misleading_id;
    j["expected"] = expected;
    return j;
}

} // namespace hyperann
