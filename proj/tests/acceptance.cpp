// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <hyperann/hyperann.hpp>

#include "reference.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace hyperann;

namespace {

int failures = 0;

void report(int id, bool ok, std::string const& what, std::string const& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

template <class F>
void run(int id, std::string const& what, F&& body) {
    try {
        std::ostringstream detail;
        bool const ok = body(detail);
        report(id, ok, what, detail.str());
    } catch (std::exception const& e) {
        report(id, false, what, std::string("exception: ") + e.what());
    }
}

std::vector<ref::Neighbor> truth(Dataset const& data, Point const& q, std::size_t k) { return ref::knn(data, q.coords(), k); }

double ratio(double got, double best) {
    if (best == 0.0) return got == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return got / best;
}

/// Small random instance for the many-instance guarantees: dataset plus query.
struct Instance {
    Dataset data;
    Point query;
};

Instance random_instance(std::mt19937_64& rng, std::size_t n, double max_norm) {
    std::size_t const dim = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    Dataset data = random_ball_dataset(n, dim, max_norm, rng());
    Dataset q = random_ball_dataset(1, dim, max_norm, rng());
    return {std::move(data), q.point(0)};
}

// Criterion 1 / 4 shared setup.
struct RandomSplit {
    Dataset points;
    Dataset queries;
};

RandomSplit const& criterion1_data() {
    static RandomSplit const s = [] {
        auto all = random_ball_dataset(2000, 10, 0.9999, 20240601);
        auto [p, q] = split_queries(all, 200, 17);
        return RandomSplit{std::move(p), std::move(q)};
    }();
    return s;
}

} // namespace

int main() {
    std::cout.setf(std::ios::fixed);

    run(1, "recentering exact on 2000x10-d, 200 queries (K=1, K=5)", [](std::ostream& out) {
        auto const& s = criterion1_data();
        KdTree tree(s.points);
        std::size_t hit1 = 0, hit5 = 0;
        for (std::size_t i = 0; i < s.queries.size(); ++i) {
            Point const& q = s.queries.point(i);
            auto const t = truth(s.points, q, 5);
            auto const r1 = recentering_nn(q, tree);
            hit1 += (r1.neighbor_ids.at(0) == t[0].id);
            auto const r5 = recentering_knn(q, tree, 5);
            for (std::size_t j = 0; j < 5; ++j)
                for (auto id : r5.neighbor_ids) hit5 += (id == t[j].id);
        }
        double const recall1 = hit1 / double(s.queries.size());
        double const recall5 = hit5 / double(5 * s.queries.size());
        out << "recall@1=" << recall1 << " recall@5=" << recall5;
        return recall1 == 1.0 && recall5 == 1.0;
    });

    run(2, "worst-case construction takes exactly k+1 calls (k=5,10,20)", [](std::ostream& out) {
        bool ok = true;
        for (int k : {5, 10, 20}) {
            auto c = gen_recentering_worstcase(k);
            BruteForceOracle oracle(c.data);
            auto const r = recentering_nn(c.query, oracle);
            // rank of the Euclidean nearest among hyperbolic neighbors, from the reference oracle
            auto const all = truth(c.data, c.query, c.data.size());
            point_id_t e_id = -1;
            double best = 1e300;
            for (std::size_t p = 0; p < c.data.size(); ++p) {
                double const d = ref::euclid(c.query.coords(), c.data.coords(p));
                if (d < best) best = d, e_id = c.data.id(p);
            }
            int rank = 0;
            for (std::size_t j = 0; j < all.size(); ++j)
                if (all[j].id == e_id) rank = int(j) + 1;
            out << "k=" << k << ":calls=" << r.stats.oracle_calls << ",rank=" << rank << " ";
            ok &= r.stats.oracle_calls == std::size_t(k) + 1 && rank == k && r.neighbor_ids[0] == all[0].id;
        }
        return ok;
    });

    run(3, "best-case configuration finishes in 3 calls (k=5,20)", [](std::ostream& out) {
        bool ok = true;
        for (int k : {5, 20}) {
            auto c = gen_recentering_bestcase(k);
            BruteForceOracle oracle(c.data);
            auto const r = recentering_nn(c.query, oracle);
            auto const t = truth(c.data, c.query, c.data.size());
            std::size_t e_rank = 0;
            for (std::size_t j = 0; j < t.size(); ++j)
                if (t[j].id == 0) e_rank = j + 1;
            out << "k=" << k << ":calls=" << r.stats.oracle_calls << ",nn=" << r.neighbor_ids[0] << ",rank(n_E)=" << e_rank
                << " ";
            ok &= r.stats.oracle_calls == 3 && r.neighbor_ids[0] == t[0].id;
        }
        return ok;
    });

    run(4, "recentering oracle calls on the criterion-1 data: mean <= 4, max <= 10", [](std::ostream& out) {
        auto const& s = criterion1_data();
        KdTree tree(s.points);
        double sum = 0;
        std::size_t mx = 0;
        for (std::size_t i = 0; i < s.queries.size(); ++i) {
            auto const r = recentering_nn(s.queries.point(i), tree);
            sum += double(r.stats.oracle_calls);
            mx = std::max(mx, r.stats.oracle_calls);
        }
        double const mean = sum / double(s.queries.size());
        out << "mean=" << mean << " max=" << mx;
        return mean <= 4.0 && mx <= 10;
    });

    run(5, "binary search ratio <= c and round bound, 1000 instances, c in {1.1, 2}", [](std::ostream& out) {
        std::mt19937_64 rng(5150);
        bool ok = true;
        for (double c : {1.1, 2.0}) {
            double worst = 1.0;
            std::size_t round_violations = 0, max_rounds = 0;
            for (int t = 0; t < 1000; ++t) {
                auto inst = random_instance(rng, 150, 0.9999);
                BruteForceOracle oracle(inst.data);
                BinarySearchTrace trace;
                auto const r = binary_search_nn(inst.query, oracle, c, {}, &trace);
                double const best = truth(inst.data, inst.query, 1)[0].d;
                worst = std::max(worst, ratio(r.hyper_distances[0], best));
                double const R = trace.initial.upper, L = trace.initial.lower;
                std::size_t bound = 0;
                if (L > 0 && R > c * L) bound = std::size_t(std::ceil(std::log2(std::log(R / L) / std::log(c)))) + 1;
                round_violations += trace.rounds.size() > bound;
                max_rounds = std::max(max_rounds, trace.rounds.size());
            }
            out << "c=" << c << ":max_ratio=" << worst << ",max_rounds=" << max_rounds
                << ",round_violations=" << round_violations << " ";
            ok &= worst <= c * (1 + 1e-12) && round_violations == 0;
        }
        return ok;
    });

    run(6, "initial bound ratio R/L >= (s-1)/2 - 1 (s=20,50)", [](std::ostream& out) {
        bool ok = true;
        for (double s : {20.0, 50.0}) {
            double const delta = 0.01;
            auto c = gen_rl_ratio_instance(s, delta);
            BruteForceOracle oracle(c.data);
            BinarySearchTrace trace;
            binary_search_nn(c.query, oracle, 2.0, {}, &trace);
            double const rl = trace.initial.upper / trace.initial.lower;
            // reference: R = d(q, n_E) from deficits, L from the point on the far side of q at the same Euclidean gap
            double const gamma = std::pow(delta, s + 0.5);
            double const qd = (gamma + delta) / 2.0;
            double const R = ref::axis_hdist(qd, gamma);
            double const L = ref::axis_hdist(qd, qd + (qd - gamma));
            out << "s=" << s << ":R/L=" << rl << "(ref " << R / L << "),bound=" << (s - 1) / 2 - 1 << " ";
            ok &= rl >= (s - 1) / 2 - 1 && std::abs(rl - R / L) <= 1e-6 * (R / L);
        }
        return ok;
    });

    run(7, "shell ratio <= sqrt(3) exact, <= sqrt(3)(1+eps) adversarial, K=1 and K=5", [](std::ostream& out) {
        std::mt19937_64 rng(777);
        double const w = 3.0;
        double const max_norm = 0.9999;
        auto params = ShellParams::from_max_norm(w, max_norm);
        double worst_exact = 1.0, worst_exact5 = 1.0;
        double worst_adv[2] = {1.0, 1.0}, worst_adv5[2] = {1.0, 1.0};
        double const eps_list[2] = {0.2, 1.0};
        for (int t = 0; t < 1000; ++t) {
            auto inst = random_instance(rng, 120, max_norm);
            auto const tr = truth(inst.data, inst.query, 5);
            auto pointwise = [&](SearchResult const& r, std::size_t k) {
                double m = 1.0;
                for (std::size_t j = 0; j < k; ++j) m = std::max(m, ratio(r.hyper_distances.at(j), tr[j].d));
                return m;
            };
            ShellPartition<BruteForceOracle> exact(inst.data, params, [](Dataset d, int) { return BruteForceOracle(std::move(d)); });
            worst_exact = std::max(worst_exact, pointwise(shell_nn(inst.query, exact), 1));
            worst_exact5 = std::max(worst_exact5, pointwise(shell_knn(inst.query, exact, 5), 5));
            for (int e = 0; e < 2; ++e) {
                double const eps = eps_list[e];
                ShellPartition<AdversarialOracle> adv(inst.data, params,
                                                      [eps](Dataset d, int) { return AdversarialOracle(std::move(d), eps); });
                worst_adv[e] = std::max(worst_adv[e], pointwise(shell_nn(inst.query, adv), 1));
                worst_adv5[e] = std::max(worst_adv5[e], pointwise(shell_knn(inst.query, adv, 5), 5));
            }
        }
        double const s3 = std::sqrt(w);
        out << "exact K1=" << worst_exact << " K5=" << worst_exact5;
        bool ok = worst_exact <= s3 && worst_exact5 <= s3;
        for (int e = 0; e < 2; ++e) {
            out << "; eps=" << eps_list[e] << " K1=" << worst_adv[e] << " K5=" << worst_adv5[e];
            ok &= worst_adv[e] <= s3 * (1 + eps_list[e]) && worst_adv5[e] <= s3 * (1 + eps_list[e]);
        }
        out << " (bound " << s3 << ")";
        return ok;
    });

    run(8, "shell counterexample returns (0.15,0.55); quoted constants within 1e-2", [](std::ostream& out) {
        auto c = shell_exact_counterexample();
        auto params = ShellParams::from_max_norm(3.0, 0.99);
        ShellPartition<BruteForceOracle> part(c.data, params, [](Dataset d, int) { return BruteForceOracle(std::move(d)); });
        auto const r = shell_nn(c.query, part);
        std::vector<double> const q{0.0, 0.99}, ns{0.0, 0.5}, ne{0.15, 0.55};
        double const got[6] = {ref::hdist(q, ns), ref::hdist(q, ne), ref::euclid(q, ne), ref::euclid(q, ns),
                               1.0 / (1.0 - ref::norm2(ns)), 1.0 / (1.0 - ref::norm2(ne))};
        double const quoted[6] = {4.19, 4.384, 0.464, 0.49, 1.33, 1.48};
        bool ok = r.neighbor_ids.at(0) == 1 && c.data.coords(c.data.position_of(1))[0] == 0.15;
        out << "returned id " << r.neighbor_ids[0] << "; constants";
        for (int i = 0; i < 6; ++i) {
            out << ' ' << got[i];
            ok &= std::abs(got[i] - quoted[i]) <= 1e-2;
        }
        return ok;
    });

    run(9, "euclidean center of the best-case ball has y = 0.9551260 +- 1e-5", [](std::ostream& out) {
        Point const q({0.0, 0.99});
        Point const ne({0.0, 0.998});
        auto const ball = euclidean_center_of_hyperbolic_ball(q, ref::hdist(q.coords(), ne.coords()));
        out << "y=" << std::setprecision(7) << ball.center[1] << " x=" << ball.center[0];
        return std::abs(ball.center[1] - 0.9551260) <= 1e-5 && std::abs(ball.center[0]) <= 1e-12;
    });

    run(10, "shell probe counts match b1-b2+1 / b1 on 500 queries", [](std::ostream& out) {
        double const w = 3.0;
        auto params = ShellParams::from_max_norm(w, 0.9999);
        int const B = params.num_bands;
        auto data = random_ball_dataset(3000, 5, 0.9999, 99);
        auto queries = random_ball_dataset(500, 5, 0.9999, 100, 1000000);
        ShellPartition<KdTree> part(data, params, [](Dataset d, int) { return KdTree(std::move(d)); });
        std::size_t match = 0, over = 0, under = 0;
        for (std::size_t i = 0; i < queries.size(); ++i) {
            Point const& q = queries.point(i);
            auto const r = shell_nn(q, part);
            double const d = r.hyper_distances.at(0);
            double const nq = std::sqrt(ref::norm2({q.coords().begin(), q.coords().end()}));
            double const d0 = 2.0 * std::atanh(nq);
            double const th = std::tanh(d / 2.0);
            double const far = (nq + th) / (1.0 + nq * th);
            int const b1 = int(std::ceil(-std::log(1.0 - far * far) / std::log(w)));
            std::size_t expected = 0;
            if (d0 > d) {
                double const near = (nq - th) / (1.0 - nq * th);
                int const b2 = int(std::floor(-std::log(1.0 - near * near) / std::log(w)));
                expected = std::size_t(std::max(0, std::min(b1, B) - std::max(b2, 1) + 1));
            } else {
                expected = std::size_t(std::min(b1, B));
            }
            if (r.bands_probed == expected)
                ++match;
            else if (r.bands_probed > expected)
                ++over;
            else
                ++under;
        }
        out << "match=" << match << "/500 more=" << over << " fewer=" << under;
        return match == queries.size();
    });

    run(11, "randomized shell over 64 bands: mean full probes = H64 +- 0.5", [](std::ostream& out) {
        double const w = 1.3;
        int const N = 64;
        auto params = ShellParams::from_band_count(w, N);
        Dataset data(2);
        std::mt19937_64 rng(64);
        for (int b = 1; b <= N; ++b) {
            double const inv_gap = std::pow(w, b - 0.5);
            double const r = std::sqrt(1.0 - 1.0 / inv_gap);
            double const a = std::uniform_real_distribution<double>(0, 2 * M_PI)(rng);
            data.add(b, {r * std::cos(a), r * std::sin(a)});
        }
        ShellPartition<BruteForceOracle> part(data, params, [](Dataset d, int) { return BruteForceOracle(std::move(d)); });
        if (part.nonempty_bands().size() != std::size_t(N)) {
            out << "only " << part.nonempty_bands().size() << " nonempty bands";
            return false;
        }
        Point const q({0.0, 0.0});
        double const best = truth(data, q, 1)[0].d;
        double H = 0;
        for (int i = 1; i <= N; ++i) H += 1.0 / i;
        double sum = 0, worst = 1.0;
        for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
            auto const r = randomized_shell_nn(q, part, 0.0, seed);
            sum += double(r.full_probes);
            worst = std::max(worst, ratio(r.hyper_distances.at(0), best));
        }
        double const mean = sum / 1000.0;
        out << "mean=" << mean << " H64=" << H << " worst_ratio=" << worst;
        return std::abs(mean - H) <= 0.5 && worst <= std::sqrt(3.0) && worst <= std::sqrt(w);
    });

    run(12, "hostile (1+eps) oracle misleads recentering and binary search (ratio > 10)", [](std::ostream& out) {
        bool ok = true;
        for (double eps : {0.2, 1.0}) {
            auto c = gen_recentering_approx_failure(eps);
            double const delta = c.param("delta"), gamma = c.param("gamma"), shift = c.param("shift");
            double const qd = (gamma + delta) / 2.0 + shift;
            double const rt = ref::axis_hdist(qd, gamma) / ref::axis_hdist(qd, delta);
            AdversarialOracle hostile(c.data, eps);
            BruteForceOracle exact(c.data);
            auto const bad = recentering_nn(c.query, hostile);
            auto const good = recentering_nn(c.query, exact);
            out << "recentering eps=" << eps << ":got=" << bad.neighbor_ids[0] << ",ratio=" << rt
                << ",exact=" << good.neighbor_ids[0] << "; ";
            ok &= bad.neighbor_ids[0] == 1 && good.neighbor_ids[0] == 0 && rt > 10;
        }
        for (double eps : {0.5, 1.0}) {
            double const cc = 2.0;
            auto c = gen_binary_search_approx_failure(eps, 400.0, cc);
            double const delta = c.param("delta"), gamma = c.param("gamma"), shift = c.param("shift");
            double const qd = (gamma + delta) / 2.0 + shift;
            double const rt = ref::axis_hdist(qd, gamma) / ref::axis_hdist(qd, delta);
            AdversarialOracle hostile(c.data, eps);
            BruteForceOracle exact(c.data);
            auto const bad = binary_search_nn(c.query, hostile, cc);
            auto const good = binary_search_nn(c.query, exact, cc);
            double const good_ratio = good.hyper_distances[0] / ref::axis_hdist(qd, delta);
            out << "binary eps=" << eps << ":got=" << bad.neighbor_ids[0] << ",ratio=" << rt
                << ",exact=" << good.neighbor_ids[0] << "; ";
            ok &= bad.neighbor_ids[0] == 1 && rt > 10 && good_ratio <= cc * (1 + 1e-9) && good.neighbor_ids[0] == 0;
        }
        return ok;
    });

    run(13, "5000-point hierarchical data: recall monotone in budget, shell+lsh, ratio bounds", [](std::ostream& out) {
        auto all = synthetic_hierarchical_dataset(5000, 10, 2718);
        auto [data, queries] = split_queries(all, 200, 31);
        std::vector<std::size_t> const budgets{100, 300, 1000, 3000, kUnlimitedBudget};
        struct Setup {
            Algorithm algo;
            OracleKind oracle;
            std::size_t k;
        };
        std::vector<Setup> const setups{
            {Algorithm::brute, OracleKind::brute, 1},          {Algorithm::recentering, OracleKind::kdtree, 1},
            {Algorithm::recentering, OracleKind::kdtree, 5},   {Algorithm::binary_search, OracleKind::kdtree, 1},
            {Algorithm::shell, OracleKind::kdtree, 1},         {Algorithm::shell, OracleKind::kdtree, 5},
            {Algorithm::shell, OracleKind::lsh, 1},            {Algorithm::shell, OracleKind::lsh, 5},
            {Algorithm::randomized_shell, OracleKind::kdtree, 1},
        };
        bool ok = true;
        for (auto const& s : setups) {
            EvalConfig cfg;
            cfg.algorithm = s.algo;
            cfg.oracle = s.oracle;
            cfg.k = s.k;
            cfg.budgets = budgets;
            cfg.seed = 5;
            auto const rep = evaluate(cfg, data, queries);
            bool mono = true;
            for (std::size_t i = 1; i < rep.rows.size(); ++i) mono &= rep.rows[i].recall >= rep.rows[i - 1].recall;
            out << rep.algorithm << '/' << rep.oracle << "/K" << s.k << ":";
            for (auto const& row : rep.rows) out << std::setprecision(3) << row.recall << ',';
            ok &= mono;
            if (s.algo == Algorithm::shell && s.oracle == OracleKind::lsh)
                ok &= rep.rows.back().recall >= rep.rows[2].recall;
            // worst pointwise ratio at unlimited budget, from the reference oracle
            if (s.oracle != OracleKind::lsh && s.algo != Algorithm::brute) {
                auto runner = make_runner(cfg, data);
                double worst = 1.0;
                for (std::size_t i = 0; i < queries.size(); ++i) {
                    auto const r = runner(queries.point(i), i, {});
                    auto const t = truth(data, queries.point(i), s.k);
                    for (std::size_t j = 0; j < s.k; ++j) worst = std::max(worst, ratio(r.hyper_distances[j], t[j].d));
                }
                double const bound = s.algo == Algorithm::binary_search ? cfg.c
                                   : s.algo == Algorithm::recentering  ? 1.0
                                                                       : std::sqrt(cfg.width);
                out << "max_ratio=" << std::setprecision(4) << worst << (worst <= bound * (1 + 1e-12) ? "" : "(!)");
                ok &= worst <= bound * (1 + 1e-12);
            }
            out << (mono ? "" : "(non-monotone)") << ' ';
        }
        return ok;
    });

    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
