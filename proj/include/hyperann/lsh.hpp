#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

namespace hyperann {

/**
 *  Random-hyperplane LSH knobs. A key coordinate is `floor(r . x / granularity)`,
 *  so `granularity` is the segment width along each projection; the multiprobe
 *  visits keys differing from the query's in one coordinate by at most
 *  `probe_radius`.
 */
struct LshParams {
    std::size_t num_tables = 5;
    std::size_t hyperplanes_per_table = 15;
    double granularity = 2.0 / 3.0;
    int probe_radius = 1;
    std::uint64_t seed = 0x5eed;

    void validate() const {
        if (num_tables == 0) throw std::invalid_argument("LSH needs at least one table");
        if (hyperplanes_per_table == 0) throw std::invalid_argument("LSH needs at least one hyperplane per table");
        if (!(granularity > 0.0) || !std::isfinite(granularity)) throw std::invalid_argument("LSH granularity must be > 0");
        if (probe_radius < 0) throw std::invalid_argument("LSH probe radius must be >= 0");
    }
};

/// Unit normals drawn uniformly from the sphere; shareable between indexes.
class HyperplaneSet {
  public:
    HyperplaneSet(std::size_t dim, std::size_t num_tables, std::size_t per_table, std::uint64_t seed)
        : dim_(dim), num_tables_(num_tables), per_table_(per_table) {
        if (dim == 0) throw std::invalid_argument("hyperplane dimension must be >= 1");
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        normals_.resize(dim * num_tables * per_table);
        for (std::size_t h = 0; h < num_tables * per_table; ++h) {
            double norm_sq = 0.0;
            do {
                norm_sq = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    double const v = gauss(rng);
                    normals_[h * dim + d] = v;
                    norm_sq += v * v;
                }
            } while (norm_sq == 0.0);
            double const inv = 1.0 / std::sqrt(norm_sq);
            for (std::size_t d = 0; d < dim; ++d) normals_[h * dim + d] *= inv;
        }
    }

    HyperplaneSet(std::size_t dim, std::size_t num_tables, std::size_t per_table, std::vector<double> normals)
        : dim_(dim), num_tables_(num_tables), per_table_(per_table), normals_(std::move(normals)) {
        if (normals_.size() != dim * num_tables * per_table) throw std::invalid_argument("hyperplane buffer size mismatch");
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t num_tables() const noexcept { return num_tables_; }
    std::size_t per_table() const noexcept { return per_table_; }
    std::span<const double> normals() const noexcept { return normals_; }

    std::span<const double> normal(std::size_t table, std::size_t j) const noexcept {
        return std::span<const double>(normals_).subspan((table * per_table_ + j) * dim_, dim_);
    }

  private:
    std::size_t dim_;
    std::size_t num_tables_;
    std::size_t per_table_;
    std::vector<double> normals_;
};

using LshKey = std::vector<std::int32_t>;

struct LshKeyHash {
    std::size_t operator()(LshKey const& key) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (auto v : key) {
            h ^= static_cast<std::uint32_t>(v);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

using LshTable = std::unordered_map<LshKey, std::vector<std::uint32_t>, LshKeyHash>;

class LshIndex {
  public:
    LshIndex(Dataset data, LshParams params) : LshIndex(std::move(data), params, nullptr) {}

    /// Builds over `data` reusing `planes` (drawn from `params.seed` when null).
    LshIndex(Dataset data, LshParams params, std::shared_ptr<const HyperplaneSet> planes)
        : data_(std::move(data)), params_(params), planes_(std::move(planes)) {
        params_.validate();
        if (!planes_) {
            if (data_.dim() == 0) throw std::invalid_argument("LSH index needs a dimension (empty dataset and no hyperplanes)");
            planes_ = std::make_shared<HyperplaneSet>(data_.dim(), params_.num_tables, params_.hyperplanes_per_table,
                                                      params_.seed);
        }
        check_planes();
        tables_.resize(params_.num_tables);
        for (std::size_t p = 0; p < data_.size(); ++p)
            for (std::size_t t = 0; t < params_.num_tables; ++t)
                tables_[t][key_of(data_.coords(p), t)].push_back(static_cast<std::uint32_t>(p));
    }

    /// Reassembles a persisted index.
    LshIndex(Dataset data, LshParams params, std::shared_ptr<const HyperplaneSet> planes, std::vector<LshTable> tables)
        : data_(std::move(data)), params_(params), planes_(std::move(planes)), tables_(std::move(tables)) {
        params_.validate();
        if (!planes_) throw std::invalid_argument("LSH index requires hyperplanes");
        check_planes();
        if (tables_.size() != params_.num_tables) throw std::invalid_argument("LSH table count mismatch");
        for (auto const& table : tables_)
            for (auto const& [key, bucket] : table) {
                if (key.size() != params_.hyperplanes_per_table) throw std::invalid_argument("LSH key length mismatch");
                for (auto p : bucket)
                    if (p >= data_.size()) throw std::invalid_argument("LSH bucket references unknown point");
            }
    }

    Dataset const& data() const noexcept { return data_; }
    LshParams const& params() const noexcept { return params_; }
    std::shared_ptr<const HyperplaneSet> const& hyperplanes() const noexcept { return planes_; }
    std::span<const LshTable> tables() const noexcept { return tables_; }

    LshKey key_of(std::span<const double> x, std::size_t table) const {
        LshKey key(params_.hyperplanes_per_table);
        for (std::size_t j = 0; j < key.size(); ++j) {
            auto const normal = planes_->normal(table, j);
            double dot = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d) dot += normal[d] * x[d];
            key[j] = static_cast<std::int32_t>(std::floor(dot / params_.granularity));
        }
        return key;
    }

    /// Visits each distinct probed point once, in probe order, until `visit` returns false.
    void for_each_candidate(std::span<const double> q, std::function<bool(std::size_t)> const& visit) const {
        require_dimension(data_, q.size());
        std::vector<bool> seen(data_.size(), false);
        auto drain = [&](LshTable const& table, LshKey const& key) {
            auto it = table.find(key);
            if (it == table.end()) return true;
            for (auto p : it->second) {
                if (seen[p]) continue;
                seen[p] = true;
                if (!visit(p)) return false;
            }
            return true;
        };
        for (std::size_t t = 0; t < tables_.size(); ++t) {
            LshKey key = key_of(q, t);
            if (!drain(tables_[t], key)) return;
            for (std::size_t j = 0; j < key.size(); ++j) {
                std::int32_t const base = key[j];
                for (int off = -params_.probe_radius; off <= params_.probe_radius; ++off) {
                    if (off == 0) continue;
                    key[j] = base + off;
                    if (!drain(tables_[t], key)) return;
                }
                key[j] = base;
            }
        }
    }

    /// Distinct probed positions in ascending order.
    std::vector<std::size_t> candidates(std::span<const double> q) const {
        std::vector<std::size_t> out;
        for_each_candidate(q, [&](std::size_t p) {
            out.push_back(p);
            return true;
        });
        std::sort(out.begin(), out.end());
        return out;
    }

    std::optional<std::size_t> nearest(std::span<const double> q, OracleStats& stats) const {
        ++stats.oracle_calls;
        auto const cand = candidates(q);
        stats.points_examined += cand.size();
        ScoredPosition best;
        for (auto p : cand) {
            ScoredPosition const s{squared_distance(q, data_.coords(p)), data_.id(p), p};
            if (s < best) best = s;
        }
        if (!best.valid()) return std::nullopt;
        return best.position;
    }

    /// Up to `k` nearest probed candidates (fewer when the probe set is small).
    std::vector<std::size_t> nearest_k(std::span<const double> q, std::size_t k, OracleStats& stats) const {
        if (k == 0) throw std::invalid_argument("k must be >= 1");
        ++stats.oracle_calls;
        auto const cand = candidates(q);
        stats.points_examined += cand.size();
        std::vector<ScoredPosition> scored;
        scored.reserve(cand.size());
        for (auto p : cand) scored.push_back({squared_distance(q, data_.coords(p)), data_.id(p), p});
        std::size_t const take = std::min(k, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end());
        scored.resize(take);
        return detail::positions_of(scored);
    }

    /// Early-exit scan of the candidate stream; completeness inherits LSH recall.
    std::optional<std::size_t> decide(std::span<const double> q, double radius, double eps, OracleStats& stats) const {
        if (!(radius > 0.0)) throw std::invalid_argument("decision radius must be > 0");
        if (!(eps >= 0.0)) throw std::invalid_argument("decision epsilon must be >= 0");
        ++stats.decision_calls;
        double const limit = (1.0 + eps) * radius;
        double const limit_sq = limit * limit;
        std::optional<std::size_t> found;
        for_each_candidate(q, [&](std::size_t p) {
            ++stats.points_examined;
            if (squared_distance(q, data_.coords(p)) <= limit_sq) {
                found = p;
                return false;
            }
            return true;
        });
        return found;
    }

  private:
    void check_planes() const {
        if (planes_->num_tables() != params_.num_tables || planes_->per_table() != params_.hyperplanes_per_table)
            throw std::invalid_argument("hyperplane set shape does not match LSH parameters");
        if (data_.dim() != 0 && planes_->dim() != data_.dim())
            throw std::invalid_argument("hyperplane dimension does not match dataset");
    }

    Dataset data_;
    LshParams params_;
    std::shared_ptr<const HyperplaneSet> planes_;
    std::vector<LshTable> tables_;
};

/// Id of the Euclidean-nearest probed candidate, or nothing when the probe set is empty.
inline std::optional<point_id_t> lsh_query(LshIndex const& index, std::span<const double> q, OracleStats& stats) {
    auto const p = index.nearest(q, stats);
    if (!p) return std::nullopt;
    return index.data().id(*p);
}

/// Certificate id within `(1+eps)R` of `q`, or nothing.
template <DecisionOracle O>
std::optional<point_id_t> decision_query(O const& index, std::span<const double> q, double radius, double eps,
                                         OracleStats& stats) {
    auto const p = index.decide(q, radius, eps, stats);
    if (!p) return std::nullopt;
    return index.data().id(*p);
}

} // namespace hyperann
