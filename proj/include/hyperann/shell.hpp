#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "lsh.hpp"
#include "oracles.hpp"
#include "search.hpp"

namespace hyperann {

/**
 *  Dataset split into norm bands, each with its own Euclidean oracle.
 *  Bands are numbered 1..B; an empty band holds no oracle.
 */
template <EuclideanOracle Oracle>
class ShellPartition {
  public:
    using Factory = std::function<Oracle(Dataset, int)>;

    ShellPartition(Dataset const& data, ShellParams params, Factory const& factory) : params_(params) {
        if (data.empty()) throw std::invalid_argument("shell partition of an empty dataset");
        std::vector<Dataset> split(static_cast<std::size_t>(params_.num_bands) + 1, Dataset(data.dim()));
        for (std::size_t p = 0; p < data.size(); ++p) {
            int band = 0;
            try {
                band = partition_index(data.point(p), params_);
            } catch (std::out_of_range const& e) {
                throw std::out_of_range("point " + std::to_string(data.id(p)) + ": " + e.what());
            }
            split[static_cast<std::size_t>(band)].add(data.id(p), data.point(p));
        }
        bands_.resize(split.size());
        for (int b = 1; b <= params_.num_bands; ++b) {
            auto& part = split[static_cast<std::size_t>(b)];
            if (!part.empty()) bands_[static_cast<std::size_t>(b)].emplace(factory(std::move(part), b));
        }
        dim_ = data.dim();
        size_ = data.size();
    }

    ShellParams const& params() const noexcept { return params_; }
    int num_bands() const noexcept { return params_.num_bands; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return size_; }

    /// Oracle for band `b` (1-based), or null when the band is empty.
    Oracle const* band(int b) const {
        if (b < 1 || b > params_.num_bands) throw std::out_of_range("band " + std::to_string(b) + " out of range");
        auto const& slot = bands_[static_cast<std::size_t>(b)];
        return slot ? &*slot : nullptr;
    }

    std::size_t band_size(int b) const {
        auto const* o = band(b);
        return o ? o->data().size() : 0;
    }

    std::vector<int> nonempty_bands() const {
        std::vector<int> out;
        for (int b = 1; b <= params_.num_bands; ++b)
            if (bands_[static_cast<std::size_t>(b)]) out.push_back(b);
        return out;
    }

  private:
    ShellParams params_;
    std::vector<std::optional<Oracle>> bands_;
    std::size_t dim_ = 0;
    std::size_t size_ = 0;
};

template <EuclideanOracle Oracle>
ShellPartition<Oracle> build_shell_partition(Dataset const& data, ShellParams params,
                                             typename ShellPartition<Oracle>::Factory const& factory) {
    return ShellPartition<Oracle>(data, params, factory);
}

/// Segment width used for band `b`: the segment count `min(w^b, 10000)` spread over [-1, 1].
inline double default_band_granularity(double width, int band) {
    double const segments = std::min(std::pow(width, band), 10000.0);
    return 2.0 / segments;
}

/// Band factory for LSH indexes that all share one hyperplane set.
inline std::function<LshIndex(Dataset, int)> band_lsh_factory(ShellParams const& params, LshParams base,
                                                               std::size_t dim, bool per_band_granularity = true) {
    auto planes = std::make_shared<const HyperplaneSet>(dim, base.num_tables, base.hyperplanes_per_table, base.seed);
    double const width = params.width;
    return [planes, base, width, per_band_granularity](Dataset band_data, int b) {
        LshParams p = base;
        if (per_band_granularity) p.granularity = default_band_granularity(width, b);
        return LshIndex(std::move(band_data), p, planes);
    };
}

namespace detail {

template <class Oracle>
void probe_band(Oracle const& oracle, Point const& q, std::size_t k, CandidatePool& pool, OracleStats& stats) {
    Dataset const& data = oracle.data();
    if (k == 1) {
        if (auto p = oracle.nearest(q.coords(), stats)) pool.offer(score(data, q, *p));
        return;
    }
    if constexpr (EuclideanKOracle<Oracle>) {
        for (auto p : oracle.nearest_k(q.coords(), std::min(k, data.size()), stats)) pool.offer(score(data, q, p));
    } else {
        throw std::invalid_argument("band oracle cannot answer K-nearest queries");
    }
}

} // namespace detail

/**
 *  Annulus search for the K nearest: probe the query's band, then grow
 *  outward and inward one band at a time, picking the side that covers the
 *  larger ball and stopping when neither frontier can hold a closer point.
 */
template <EuclideanOracle Oracle>
SearchResult shell_knn(Point const& q, ShellPartition<Oracle> const& partition, std::size_t k,
                       SearchOptions const& options = {}) {
    if (partition.size() == 0) throw std::invalid_argument("shell search on an empty partition");
    if (k == 0 || k > partition.size()) throw std::invalid_argument("shell_knn: k must lie in [1, |D|]");
    if (q.dim() != partition.dim()) throw std::invalid_argument("query dimension does not match partition");
    ShellParams const& params = partition.params();
    int const B = params.num_bands;

    SearchResult result;
    detail::CandidatePool pool(k);

    auto probe = [&](int b) {
        if (detail::budget_exhausted(result.stats, options)) {
            result.terminated_early = true;
            return false;
        }
        ++result.bands_probed;
        if (auto const* oracle = partition.band(b)) {
            ++result.full_probes;
            detail::probe_band(*oracle, q, k, pool, result.stats);
        }
        return true;
    };

    int const home = band_of(q, params.width);
    bool running = true;
    if (home <= B) running = probe(home);
    int top = home + 1;
    int bottom = std::min(home - 1, B);

    while (running) {
        auto const radius = pool.kth_radius();
        bool const top_live = top <= B && check_intersection(q, radius, params, top);
        bool const bottom_live = bottom >= 1 && check_intersection(q, radius, params, bottom);
        if (!top_live && !bottom_live) break;
        int band = 0;
        if (top <= B && bottom >= 1)
            band = choose_band(q, radius, params, top, bottom);
        else
            band = top_live ? top : bottom;
        running = probe(band);
        if (band == top)
            ++top;
        else
            --bottom;
    }
    detail::fill_result(result, pool.entries());
    return result;
}

/// Single nearest neighbor; ratio to the true nearest is at most `sqrt(w)(1+eps)`.
template <EuclideanOracle Oracle>
SearchResult shell_nn(Point const& q, ShellPartition<Oracle> const& partition, SearchOptions const& options = {}) {
    return shell_knn(q, partition, 1, options);
}

/**
 *  Visits nonempty bands in a seeded random order. After the first band, a
 *  band gets a full oracle call only when its decision oracle reports a point
 *  close enough to possibly beat the current best.
 */
template <EuclideanOracle Oracle>
    requires DecisionOracle<Oracle>
SearchResult randomized_shell_nn(Point const& q, ShellPartition<Oracle> const& partition, double epsilon,
                                 std::uint64_t seed, SearchOptions const& options = {}) {
    if (partition.size() == 0) throw std::invalid_argument("shell search on an empty partition");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite and >= 0");
    if (q.dim() != partition.dim()) throw std::invalid_argument("query dimension does not match partition");
    ShellParams const& params = partition.params();

    std::vector<int> order = partition.nonempty_bands();
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    SearchResult result;
    detail::CandidatePool pool(1);
    double const log_gap_q = std::log(q.boundary_gap());

    for (int b : order) {
        if (detail::budget_exhausted(result.stats, options)) {
            result.terminated_early = true;
            break;
        }
        ++result.bands_probed;
        Oracle const& oracle = *partition.band(b);
        if (!pool.empty()) {
            double const best = pool.front().distance;
            if (best == 0.0) continue;
            double const radius = std::sinh(best / 2.0) *
                                  std::exp(0.5 * (log_gap_q - b * params.log_width())) / (1.0 + epsilon);
            if (!(radius > 0.0)) continue;
            if (!oracle.decide(q.coords(), radius, epsilon, result.stats)) continue;
        }
        ++result.full_probes;
        detail::probe_band(oracle, q, 1, pool, result.stats);
    }
    detail::fill_result(result, pool.entries());
    return result;
}

} // namespace hyperann
