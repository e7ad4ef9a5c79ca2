#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace hyperann {

using point_id_t = std::int64_t;

/// Indexed collection of Poincaré points with unique stable ids.
class Dataset {
  public:
    Dataset() = default;
    explicit Dataset(std::size_t dim) : dim_(dim) {}

    void add(point_id_t id, Point point) {
        if (dim_ == 0) dim_ = point.dim();
        if (point.dim() != dim_)
            throw std::invalid_argument("point " + std::to_string(id) + " has dimension " +
                                        std::to_string(point.dim()) + ", dataset has " + std::to_string(dim_));
        if (!positions_.emplace(id, ids_.size()).second)
            throw std::invalid_argument("duplicate id " + std::to_string(id));
        ids_.push_back(id);
        points_.push_back(std::move(point));
    }

    void add(point_id_t id, std::vector<double> coords) { add(id, Point(std::move(coords))); }

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t dim() const noexcept { return dim_; }

    point_id_t id(std::size_t position) const { return ids_.at(position); }
    Point const& point(std::size_t position) const { return points_.at(position); }
    std::span<const double> coords(std::size_t position) const { return points_[position].coords(); }
    std::span<const point_id_t> ids() const noexcept { return ids_; }
    std::span<const Point> points() const noexcept { return points_; }

    bool contains(point_id_t id) const { return positions_.count(id) != 0; }
    std::size_t position_of(point_id_t id) const {
        auto it = positions_.find(id);
        if (it == positions_.end()) throw std::out_of_range("unknown id " + std::to_string(id));
        return it->second;
    }

  private:
    std::size_t dim_ = 0;
    std::vector<point_id_t> ids_;
    std::vector<Point> points_;
    std::unordered_map<point_id_t, std::size_t> positions_;
};

/// Per-query oracle accounting. Callers own and merge these; indexes hold none.
struct OracleStats {
    std::size_t oracle_calls = 0;
    std::size_t points_examined = 0;
    std::size_t decision_calls = 0;

    OracleStats& operator+=(OracleStats const& other) noexcept {
        oracle_calls += other.oracle_calls;
        points_examined += other.points_examined;
        decision_calls += other.decision_calls;
        return *this;
    }
};

/// Candidate ordering shared by every oracle: smaller distance first, then smaller id.
struct ScoredPosition {
    double distance = std::numeric_limits<double>::infinity();
    point_id_t id = std::numeric_limits<point_id_t>::max();
    std::size_t position = std::numeric_limits<std::size_t>::max();

    friend bool operator<(ScoredPosition const& a, ScoredPosition const& b) noexcept {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    }
    bool valid() const noexcept { return position != std::numeric_limits<std::size_t>::max(); }
};

inline void require_dimension(Dataset const& data, std::size_t query_dim) {
    if (data.dim() != 0 && query_dim != data.dim())
        throw std::invalid_argument("query dimension " + std::to_string(query_dim) + " does not match dataset dimension " +
                                    std::to_string(data.dim()));
}

} // namespace hyperann
