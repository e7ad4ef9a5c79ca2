#include <hyperann/hyperann.hpp>

#include <iostream>

using namespace hyperann;

int main() {
    Dataset data = synthetic_hierarchical_dataset(2000, 5, 7);
    auto [points, queries] = split_queries(data, 3, 7);

    KdTree tree(points);
    auto params = ShellParams::from_band_count(3.0, 25);
    ShellPartition<KdTree> shells(points, params, [](Dataset d, int) { return KdTree(std::move(d)); });

    for (std::size_t i = 0; i < queries.size(); ++i) {
        Point const& q = queries.point(i);
        auto exact = brute_force_hyper_knn(q, points, 1);
        auto rec = recentering_nn(q, tree);
        auto shell = shell_nn(q, shells);
        std::cout << "query " << queries.id(i) << " (|q| = " << std::sqrt(q.squared_norm()) << ")\n"
                  << "  brute       " << exact.neighbor_ids[0] << "  d=" << exact.hyper_distances[0] << '\n'
                  << "  recentering " << rec.neighbor_ids[0] << "  d=" << rec.hyper_distances[0]
                  << "  calls=" << rec.stats.oracle_calls << '\n'
                  << "  shell       " << shell.neighbor_ids[0] << "  d=" << shell.hyper_distances[0]
                  << "  bands=" << shell.bands_probed << '\n';
    }

    // Budget of 200 examined points.
    SearchOptions capped;
    capped.budget = 200;
    auto r = recentering_nn(queries.point(0), tree, capped);
    std::cout << "capped: examined " << r.stats.points_examined << (r.terminated_early ? " (stopped early)" : "") << '\n';
}
