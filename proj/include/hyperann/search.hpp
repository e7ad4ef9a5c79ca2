#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

namespace hyperann {

/// Returned neighbors (ascending hyperbolic distance) plus instrumentation.
struct SearchResult {
    std::vector<point_id_t> neighbor_ids;
    std::vector<double> hyper_distances;
    OracleStats stats;
    /// Budget exhausted before natural termination.
    bool terminated_early = false;
    /// Shell searches only: band indices visited, and visits that ran the full oracle.
    std::size_t bands_probed = 0;
    std::size_t full_probes = 0;

    bool empty() const noexcept { return neighbor_ids.empty(); }
};

struct SearchOptions {
    /// Cap on points examined; checked before each oracle call, so one call may overshoot it.
    std::optional<std::size_t> budget;
    /// Recentering with a kd-tree oracle: take the hyperbolically closest examined point
    /// of each call instead of the Euclidean nearest.
    bool hyperbolic_tracking = false;
};

/// Bounds of one binary-search round (for instrumentation and tests).
struct BinarySearchBounds {
    double lower = 0.0;
    double upper = 0.0;
};

struct BinarySearchTrace {
    BinarySearchBounds initial;
    std::vector<BinarySearchBounds> rounds;
};

namespace detail {

inline bool budget_exhausted(OracleStats const& stats, SearchOptions const& options) noexcept {
    return options.budget && stats.points_examined >= *options.budget;
}

/// Bounded pool of the best hyperbolic candidates seen so far, keyed by position.
class CandidatePool {
  public:
    explicit CandidatePool(std::size_t capacity) : capacity_(capacity) {}

    /// Returns true when the pool changed.
    bool offer(ScoredPosition cand) {
        if (members_.count(cand.id)) return false;
        if (pool_.size() == capacity_ && !(cand < pool_.back())) return false;
        auto it = std::lower_bound(pool_.begin(), pool_.end(), cand);
        pool_.insert(it, cand);
        members_.insert(cand.id);
        if (pool_.size() > capacity_) {
            members_.erase(pool_.back().id);
            pool_.pop_back();
        }
        return true;
    }

    bool full() const noexcept { return pool_.size() == capacity_; }
    bool empty() const noexcept { return pool_.empty(); }
    std::size_t size() const noexcept { return pool_.size(); }
    ScoredPosition const& front() const { return pool_.front(); }
    ScoredPosition const& back() const { return pool_.back(); }
    std::vector<ScoredPosition> const& entries() const noexcept { return pool_; }

    /// Radius of the ball that must be searched: the K-th distance once K candidates exist.
    std::optional<double> kth_radius() const {
        if (!full()) return std::nullopt;
        return pool_.back().distance;
    }

  private:
    std::size_t capacity_;
    std::vector<ScoredPosition> pool_;
    std::unordered_set<point_id_t> members_;
};

inline ScoredPosition score(Dataset const& data, Point const& q, std::size_t position) {
    return {hyperbolic_distance(q, data.point(position)), data.id(position), position};
}

inline void fill_result(SearchResult& result, std::vector<ScoredPosition> const& entries) {
    result.neighbor_ids.clear();
    result.hyper_distances.clear();
    for (auto const& e : entries) {
        result.neighbor_ids.push_back(e.id);
        result.hyper_distances.push_back(e.distance);
    }
}

template <EuclideanOracle O>
std::optional<std::size_t> recentering_probe(O const& oracle, std::span<const double> center, Point const& q,
                                             SearchOptions const& options, OracleStats& stats) {
    if constexpr (requires { oracle.nearest_tracking(center, q, stats); }) {
        if (options.hyperbolic_tracking) {
            auto const tracked = oracle.nearest_tracking(center, q, stats);
            auto const& data = oracle.data();
            auto const e = score(data, q, tracked.euclidean);
            auto const h = score(data, q, tracked.hyperbolic);
            return h < e ? h.position : e.position;
        }
    }
    return oracle.nearest(center, stats);
}

} // namespace detail

/**
 *  Exact hyperbolic nearest neighbor by repeated recentering.
 *
 *  Each round asks the Euclidean oracle for the nearest point to the
 *  Euclidean center of `B_H(q, d_H(q, n_H))`; the round either finds a
 *  strictly closer point or proves `n_H` optimal. With an exact oracle the
 *  answer is exact after at most k+1 calls, where k is the hyperbolic rank of
 *  the Euclidean nearest neighbor.
 */
template <EuclideanOracle O>
SearchResult recentering_nn(Point const& q, O const& oracle, SearchOptions const& options = {}) {
    Dataset const& data = oracle.data();
    if (data.empty()) throw std::invalid_argument("recentering_nn: empty dataset");
    require_dimension(data, q.dim());

    SearchResult result;
    auto first = detail::recentering_probe(oracle, q.coords(), q, options, result.stats);
    if (!first) return result;
    ScoredPosition best = detail::score(data, q, *first);

    while (best.distance > 0.0) {
        if (detail::budget_exhausted(result.stats, options)) {
            result.terminated_early = true;
            break;
        }
        auto const ball = euclidean_center_of_hyperbolic_ball(q, best.distance);
        auto const next = detail::recentering_probe(oracle, ball.center, q, options, result.stats);
        if (!next) break;
        ScoredPosition const cand = detail::score(data, q, *next);
        if (!distance_improves(cand.distance, best.distance)) break;
        best = cand;
    }
    detail::fill_result(result, {best});
    return result;
}

/**
 *  K nearest neighbors by recentering: first on the current nearest until
 *  that stops improving, then on the current K-th nearest until that stops
 *  improving.
 */
template <EuclideanKOracle O>
SearchResult recentering_knn(Point const& q, O const& oracle, std::size_t k, SearchOptions const& options = {}) {
    Dataset const& data = oracle.data();
    if (data.empty()) throw std::invalid_argument("recentering_knn: empty dataset");
    if (k == 0 || k > data.size()) throw std::invalid_argument("recentering_knn: k must lie in [1, |D|]");
    require_dimension(data, q.dim());
    if (k == 1) return recentering_nn(q, oracle, options);

    SearchResult result;
    detail::CandidatePool pool(k);
    auto merge = [&](std::vector<std::size_t> const& positions) {
        for (auto p : positions) pool.offer(detail::score(data, q, p));
    };
    merge(oracle.nearest_k(q.coords(), k, result.stats));

    auto refine = [&](auto radius_of) {
        while (!pool.empty()) {
            if (detail::budget_exhausted(result.stats, options)) {
                result.terminated_early = true;
                return false;
            }
            double const before = radius_of();
            if (before == 0.0) return true;
            auto const ball = euclidean_center_of_hyperbolic_ball(q, before);
            merge(oracle.nearest_k(ball.center, k, result.stats));
            if (!distance_improves(radius_of(), before)) return true;
        }
        return true;
    };

    if (pool.front().distance > 0.0) {
        if (refine([&] { return pool.front().distance; }))
            refine([&] { return pool.back().distance; });
    } else {
        refine([&] { return pool.back().distance; });
    }
    detail::fill_result(result, pool.entries());
    return result;
}

/**
 *  c-approximate hyperbolic nearest neighbor by bisecting `log` of the
 *  search radius between a certified lower bound and the best distance found.
 */
template <EuclideanOracle O>
SearchResult binary_search_nn(Point const& q, O const& oracle, double c, SearchOptions const& options = {},
                              BinarySearchTrace* trace = nullptr) {
    if (!(c > 1.0) || !std::isfinite(c)) throw std::invalid_argument("binary_search_nn: c must be > 1");
    Dataset const& data = oracle.data();
    if (data.empty()) throw std::invalid_argument("binary_search_nn: empty dataset");
    require_dimension(data, q.dim());

    SearchResult result;
    auto first = oracle.nearest(q.coords(), result.stats);
    if (!first) return result;
    ScoredPosition best = detail::score(data, q, *first);
    // Exact match; at the origin Euclidean and hyperbolic orderings coincide.
    if (best.distance == 0.0 || q.is_origin()) {
        detail::fill_result(result, {best});
        return result;
    }

    // The open Euclidean ball around q through n_E is empty, so its hyperbolically
    // nearest boundary point (on the diameter through q) bounds d_H(q, n*) from below.
    double const gap_to_nn = euclidean_distance(q.coords(), data.coords(*first));
    double lower = hyperbolic_distance(q, scaled_point(q, gap_to_nn / q.norm()));
    double upper = best.distance;
    if (trace) trace->initial = {lower, upper};

    while (upper > c * lower) {
        if (detail::budget_exhausted(result.stats, options)) {
            result.terminated_early = true;
            break;
        }
        double const mid = std::sqrt(upper * lower);
        auto const ball = euclidean_center_of_hyperbolic_ball(q, mid);
        auto const next = oracle.nearest(ball.center, result.stats);
        std::optional<ScoredPosition> cand;
        if (next) cand = detail::score(data, q, *next);
        if (!cand || cand->distance > mid) {
            lower = mid;
        } else {
            best = *cand;
            upper = cand->distance;
        }
        if (trace) trace->rounds.push_back({lower, upper});
    }
    detail::fill_result(result, {best});
    return result;
}

/// Ground truth: the K hyperbolically nearest points by full scan (id tiebreak).
/// With a budget only the first `budget` positions are scanned.
inline SearchResult brute_force_hyper_knn(Point const& q, Dataset const& data, std::size_t k,
                                          SearchOptions const& options = {}) {
    if (k == 0 || k > data.size()) throw std::invalid_argument("brute_force_hyper_knn: k must lie in [1, |D|]");
    require_dimension(data, q.dim());
    SearchResult result;
    std::size_t scan = data.size();
    if (options.budget && *options.budget < scan) {
        scan = std::max<std::size_t>(*options.budget, 1);
        result.terminated_early = scan < data.size();
    }
    std::vector<ScoredPosition> all;
    all.reserve(scan);
    for (std::size_t i = 0; i < scan; ++i) all.push_back(detail::score(data, q, i));
    std::size_t const take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end());
    all.resize(take);
    result.stats.oracle_calls = 1;
    result.stats.points_examined = scan;
    detail::fill_result(result, all);
    return result;
}

} // namespace hyperann
