#include <gtest/gtest.h>

#include <hyperann/hyperann.hpp>

#include "reference.hpp"

#include <set>
#include <sstream>

using namespace hyperann;

namespace {

Dataset parse(std::string const& text) {
    std::istringstream in(text);
    return read_dataset_text(in);
}

std::string error_of(std::string const& text) {
    try {
        parse(text);
    } catch (std::exception const& e) {
        return e.what();
    }
    return "";
}

SearchResult result(std::vector<point_id_t> ids, std::vector<double> d) {
    SearchResult r;
    r.neighbor_ids = std::move(ids);
    r.hyper_distances = std::move(d);
    return r;
}

} // namespace

TEST(DatasetText, ParsesWellFormedFile) {
    auto d = parse("2 2\n10 0.1 0.2\n-3 0 -0.5\n");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.dim(), 2u);
    EXPECT_EQ(d.id(1), -3);
    EXPECT_DOUBLE_EQ(d.coords(0)[1], 0.2);
}

TEST(DatasetText, ErrorsCarryLineAndId) {
    EXPECT_NE(error_of("2 2\n1 0.1 0.2\n2 1.0 0\n").find("line 3"), std::string::npos);
    EXPECT_NE(error_of("2 2\n1 0.1 0.2\n77 1.0 0\n").find("77"), std::string::npos);
    EXPECT_NE(error_of("2 2\n1 0.1 0.2\n1 0.3 0\n").find("duplicate id 1"), std::string::npos);
    EXPECT_NE(error_of("1 2\n1 0.1\n").find("line 2"), std::string::npos);
    EXPECT_NE(error_of("1 2\n1 0.1 x\n").find("malformed"), std::string::npos);
    EXPECT_NE(error_of("2 2\n1 0.1 0.1\n").find("expected 2 rows"), std::string::npos);
    EXPECT_NE(error_of("").find("header"), std::string::npos);
    EXPECT_NE(error_of("1 2\n1 0.1 0.1\n2 0.1 0.1\n").find("unexpected"), std::string::npos);
    EXPECT_THROW(load_dataset("/nonexistent/file"), std::runtime_error);
}

TEST(DatasetText, RoundTripIsLossless) {
    auto d = random_ball_dataset(500, 7, 0.99999, 71, -250);
    std::stringstream s;
    write_dataset_text(s, d);
    auto back = read_dataset_text(s);
    ASSERT_EQ(back.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(back.id(i), d.id(i));
        for (std::size_t j = 0; j < d.dim(); ++j) EXPECT_EQ(back.coords(i)[j], d.coords(i)[j]);
    }
}

TEST(DatasetText, RefusesPointsThatCannotRoundTrip) {
    auto c = gen_rl_ratio_instance(20, 0.01);
    std::stringstream s;
    EXPECT_THROW(write_dataset_text(s, c.data), std::domain_error);
}

TEST(Split, DeterministicDisjointAndComplete) {
    auto d = random_ball_dataset(300, 3, 0.99, 72);
    auto [a, q] = split_queries(d, 40, 9);
    auto [a2, q2] = split_queries(d, 40, 9);
    EXPECT_EQ(std::vector<point_id_t>(q.ids().begin(), q.ids().end()), std::vector<point_id_t>(q2.ids().begin(), q2.ids().end()));
    EXPECT_EQ(q.size(), 40u);
    EXPECT_EQ(a.size(), 260u);
    std::set<point_id_t> all;
    for (auto id : a.ids()) all.insert(id);
    for (auto id : q.ids()) EXPECT_TRUE(all.insert(id).second);
    EXPECT_EQ(all.size(), d.size());
    auto [same, none] = split_queries(d, 0, 1);
    EXPECT_EQ(same.size(), d.size());
    EXPECT_TRUE(none.empty());
    EXPECT_THROW(split_queries(d, 300, 1), std::invalid_argument);
}

TEST(Scoring, HandBuiltCases) {
    // truth: ids 1,2,3 at 1,2,4
    auto truth = result({1, 2, 3}, {1.0, 2.0, 4.0});
    auto s = score_query(result({1, 3, 9}, {1.0, 4.0, 6.0}), truth);
    EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3.0);
    ASSERT_EQ(s.ratios.size(), 3u);
    EXPECT_DOUBLE_EQ(s.ratios[0], 1.0);
    EXPECT_DOUBLE_EQ(s.ratios[1], 2.0);
    EXPECT_DOUBLE_EQ(s.ratios[2], 1.5);
    // exact-match query: 0/0 counts as 1
    auto zero = score_query(result({5}, {0.0}), result({5}, {0.0}));
    EXPECT_DOUBLE_EQ(zero.recall, 1.0);
    EXPECT_EQ(zero.ratios, std::vector<double>{1.0});
    auto miss = score_query(result({6}, {0.3}), result({5}, {0.0}));
    EXPECT_DOUBLE_EQ(miss.recall, 0.0);
    EXPECT_TRUE(miss.ratios.empty());
}

TEST(Budget, Parsing) {
    EXPECT_EQ(parse_budget("100"), 100u);
    EXPECT_EQ(parse_budget("unlimited"), kUnlimitedBudget);
    EXPECT_THROW(parse_budget("0"), std::invalid_argument);
    EXPECT_THROW(parse_budget("12x"), std::invalid_argument);
    EXPECT_THROW(parse_budget("-4"), std::invalid_argument);
    EXPECT_EQ(budget_label(kUnlimitedBudget), "unlimited");
}

TEST(Config, Validation) {
    EvalConfig c;
    c.budgets = {100, 50};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.oracle = OracleKind::lsh;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.algorithm = Algorithm::binary_search;
    c.k = 5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.k = 1;
    c.c = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.algorithm = Algorithm::shell;
    c.oracle = OracleKind::lsh;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(algorithm_from_string("randomized_shell"), Algorithm::randomized_shell);
    EXPECT_THROW(algorithm_from_string("vamana"), std::invalid_argument);
    EXPECT_THROW(oracle_from_string("hnsw"), std::invalid_argument);
}

TEST(Evaluate, BruteAndRecenteringAreExact) {
    auto all = random_ball_dataset(800, 4, 0.999, 73);
    auto [d, q] = split_queries(all, 60, 3);
    for (auto algo : {Algorithm::brute, Algorithm::recentering}) {
        EvalConfig c;
        c.algorithm = algo;
        c.k = 5;
        c.budgets = {1000, kUnlimitedBudget};
        auto rep = evaluate(c, d, q);
        ASSERT_EQ(rep.rows.size(), 2u);
        EXPECT_DOUBLE_EQ(rep.rows.back().recall, 1.0);
        EXPECT_DOUBLE_EQ(rep.rows.back().avg_ratio, 1.0);
        EXPECT_DOUBLE_EQ(rep.rows.back().avg_max_ratio, 1.0);
    }
}

TEST(Evaluate, RecallMonotoneInBudget) {
    auto all = synthetic_hierarchical_dataset(1500, 5, 74);
    auto [d, q] = split_queries(all, 80, 4);
    for (auto algo : {Algorithm::brute, Algorithm::recentering, Algorithm::shell, Algorithm::randomized_shell,
                      Algorithm::binary_search}) {
        EvalConfig c;
        c.algorithm = algo;
        c.budgets = {10, 50, 200, 1000, kUnlimitedBudget};
        auto rep = evaluate(c, d, q);
        for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_GE(rep.rows[i].recall, rep.rows[i - 1].recall) << rep.algorithm;
        for (auto const& row : rep.rows) {
            EXPECT_GE(row.avg_ratio, 1.0);
            EXPECT_LE(row.min_oracle_calls, row.max_oracle_calls);
        }
    }
}

TEST(Report, KeysAndDeterminism) {
    auto all = random_ball_dataset(600, 3, 0.999, 75);
    auto [d, q] = split_queries(all, 40, 5);
    EvalConfig c;
    c.algorithm = Algorithm::shell;
    c.oracle = OracleKind::lsh;
    c.budgets = {50, kUnlimitedBudget};
    std::ostringstream a, b;
    write_report_jsonl(a, evaluate(c, d, q), false);
    write_report_jsonl(b, evaluate(c, d, q), false);
    EXPECT_EQ(a.str(), b.str());
    std::istringstream lines(a.str());
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        auto j = nlohmann::json::parse(line);
        std::vector<std::string> keys;
        for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
        std::sort(keys.begin(), keys.end());
        EXPECT_EQ(keys, (std::vector<std::string>{"avg_max_ratio", "avg_ratio", "budget", "mean_oracle_calls", "recall",
                                                  "wall_seconds"}));
        ++n;
    }
    EXPECT_EQ(n, 2);
    EXPECT_EQ(nlohmann::json::parse(a.str().substr(a.str().rfind('{')))["budget"], "unlimited");
}

TEST(Report, CounterexampleRecallIsZero) {
    auto c = shell_exact_counterexample();
    Dataset q(2);
    q.add(-1, c.query);
    EvalConfig cfg;
    cfg.algorithm = Algorithm::shell;
    cfg.oracle = OracleKind::brute;
    auto rep = evaluate(cfg, c.data, q);
    EXPECT_DOUBLE_EQ(rep.rows[0].recall, 0.0);
    EXPECT_GT(rep.rows[0].avg_ratio, 1.0);
}

TEST(Sidecar, CarriesExpectations) {
    auto j = construction_sidecar(gen_recentering_worstcase(5));
    EXPECT_EQ(j["kind"], "recentering-worstcase");
    EXPECT_EQ(j["expected"]["oracle_calls"], 6);
    EXPECT_EQ(j["query"].size(), 1u);
}
