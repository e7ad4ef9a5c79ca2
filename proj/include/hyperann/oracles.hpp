#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"

namespace hyperann {

/**
 *  Euclidean nearest-neighbor backends consumed by the hyperbolic searches.
 *
 *  Results are positions into `data()`. Every call bumps
 *  `stats.oracle_calls` once and `stats.points_examined` by the number of
 *  distance evaluations it performed.
 */
template <class O>
concept EuclideanOracle = requires(O const& o, std::span<const double> q, OracleStats& s) {
    { o.data() } -> std::convertible_to<Dataset const&>;
    { o.nearest(q, s) } -> std::same_as<std::optional<std::size_t>>;
};

/// Oracles that can also return the `k` nearest (ascending, id tiebreak).
template <class O>
concept EuclideanKOracle = EuclideanOracle<O> && requires(O const& o, std::span<const double> q, std::size_t k,
                                                          OracleStats& s) {
    { o.nearest_k(q, k, s) } -> std::same_as<std::vector<std::size_t>>;
};

/// `(1+eps, R)` near-neighbor decision: a certificate position or nothing.
template <class O>
concept DecisionOracle = requires(O const& o, std::span<const double> q, double radius, double eps, OracleStats& s) {
    { o.decide(q, radius, eps, s) } -> std::same_as<std::optional<std::size_t>>;
};

namespace detail {

inline std::vector<std::size_t> positions_of(std::vector<ScoredPosition> const& scored) {
    std::vector<std::size_t> out;
    out.reserve(scored.size());
    for (auto const& s : scored) out.push_back(s.position);
    return out;
}

inline void require_k(std::size_t k, std::size_t size) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    if (k > size)
        throw std::invalid_argument("k = " + std::to_string(k) + " exceeds dataset size " + std::to_string(size));
}

/// Scans every point and returns the `(1+eps)R` certificate with the lowest position, if any.
inline std::optional<std::size_t> scan_decide(Dataset const& data, std::span<const double> q, double radius, double eps,
                                              OracleStats& stats) {
    if (!(radius > 0.0)) throw std::invalid_argument("decision radius must be > 0");
    if (!(eps >= 0.0)) throw std::invalid_argument("decision epsilon must be >= 0");
    require_dimension(data, q.size());
    ++stats.decision_calls;
    double const limit = (1.0 + eps) * radius;
    double const limit_sq = limit * limit;
    for (std::size_t i = 0; i < data.size(); ++i) {
        ++stats.points_examined;
        if (squared_distance(q, data.coords(i)) <= limit_sq) return i;
    }
    return std::nullopt;
}

} // namespace detail

/// Exact oracle by linear scan.
class BruteForceOracle {
  public:
    BruteForceOracle() = default;
    explicit BruteForceOracle(Dataset data) : data_(std::move(data)) {}

    Dataset const& data() const noexcept { return data_; }

    std::optional<std::size_t> nearest(std::span<const double> q, OracleStats& stats) const {
        if (data_.empty()) throw std::invalid_argument("nearest-neighbor query on an empty dataset");
        require_dimension(data_, q.size());
        ++stats.oracle_calls;
        ScoredPosition best;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            ScoredPosition const cand{squared_distance(q, data_.coords(i)), data_.id(i), i};
            if (cand < best) best = cand;
        }
        stats.points_examined += data_.size();
        return best.position;
    }

    std::vector<std::size_t> nearest_k(std::span<const double> q, std::size_t k, OracleStats& stats) const {
        detail::require_k(k, data_.size());
        require_dimension(data_, q.size());
        ++stats.oracle_calls;
        std::vector<ScoredPosition> all;
        all.reserve(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i)
            all.push_back({squared_distance(q, data_.coords(i)), data_.id(i), i});
        stats.points_examined += data_.size();
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
        all.resize(k);
        return detail::positions_of(all);
    }

    std::optional<std::size_t> decide(std::span<const double> q, double radius, double eps, OracleStats& stats) const {
        return detail::scan_decide(data_, q, radius, eps, stats);
    }

  private:
    Dataset data_;
};

/// Id of the Euclidean nearest neighbor by exhaustive scan (smallest id on ties).
inline point_id_t brute_force_exact_query(std::span<const double> q, Dataset const& data, OracleStats& stats) {
    if (data.empty()) throw std::invalid_argument("nearest-neighbor query on an empty dataset");
    require_dimension(data, q.size());
    ScoredPosition best;
    for (std::size_t i = 0; i < data.size(); ++i) {
        ScoredPosition const cand{squared_distance(q, data.coords(i)), data.id(i), i};
        if (cand < best) best = cand;
    }
    stats.points_examined += data.size();
    ++stats.oracle_calls;
    return best.id;
}

/**
 *  A legal but hostile `(1+eps)`-approximate oracle: among the points within
 *  `(1+eps)` of the true nearest distance it returns the farthest one, the
 *  largest id on ties. Used to exercise worst-case oracle behavior.
 */
class AdversarialOracle {
  public:
    AdversarialOracle(Dataset data, double epsilon) : data_(std::move(data)), epsilon_(epsilon) {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite and >= 0");
    }

    Dataset const& data() const noexcept { return data_; }
    double epsilon() const noexcept { return epsilon_; }

    std::optional<std::size_t> nearest(std::span<const double> q, OracleStats& stats) const {
        if (data_.empty()) throw std::invalid_argument("nearest-neighbor query on an empty dataset");
        require_dimension(data_, q.size());
        ++stats.oracle_calls;
        stats.points_examined += data_.size();
        auto const dist = distances(q);
        double const bound = (1.0 + epsilon_) * *std::min_element(dist.begin(), dist.end());
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            if (dist[i] > bound) continue;
            if (!pick || dist[i] > dist[*pick] || (dist[i] == dist[*pick] && data_.id(i) > data_.id(*pick))) pick = i;
        }
        return pick;
    }

    /// Rank `r` answer stays within `(1+eps)` of the true `r`-th distance.
    std::vector<std::size_t> nearest_k(std::span<const double> q, std::size_t k, OracleStats& stats) const {
        detail::require_k(k, data_.size());
        require_dimension(data_, q.size());
        ++stats.oracle_calls;
        stats.points_examined += data_.size();
        auto const dist = distances(q);
        std::vector<double> sorted = dist;
        std::sort(sorted.begin(), sorted.end());
        std::vector<bool> used(dist.size(), false);
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t rank = 0; rank < k; ++rank) {
            double const bound = (1.0 + epsilon_) * sorted[rank];
            std::optional<std::size_t> pick;
            for (std::size_t i = 0; i < dist.size(); ++i) {
                if (used[i] || dist[i] > bound) continue;
                if (!pick || dist[i] > dist[*pick] || (dist[i] == dist[*pick] && data_.id(i) > data_.id(*pick)))
                    pick = i;
            }
            used[*pick] = true;
            out.push_back(*pick);
        }
        return out;
    }

    std::optional<std::size_t> decide(std::span<const double> q, double radius, double eps, OracleStats& stats) const {
        return detail::scan_decide(data_, q, radius, eps, stats);
    }

  private:
    std::vector<double> distances(std::span<const double> q) const {
        std::vector<double> dist(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) dist[i] = euclidean_distance(q, data_.coords(i));
        return dist;
    }

    Dataset data_;
    double epsilon_;
};

/// Id returned by the adversarial `(1+eps)` oracle on `data`.
inline point_id_t adversarial_approx_query(Dataset const& data, std::span<const double> q, double epsilon,
                                           OracleStats& stats) {
    AdversarialOracle oracle(data, epsilon);
    return data.id(*oracle.nearest(q, stats));
}

} // namespace hyperann
