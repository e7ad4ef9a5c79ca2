#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

namespace hyperann {

/**
 *  Exact Euclidean kd-tree. Internal nodes split at the median of the
 *  coordinate with the widest spread; leaves hold at most `kLeafSize` points.
 *  Pruning and descent look only at Euclidean distances.
 */
class KdTree {
  public:
    static constexpr std::size_t kLeafSize = 16;

    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t split_dim = 0;
        double split_value = 0.0;

        bool is_leaf() const noexcept { return left < 0; }
    };

    struct TrackedResult {
        std::size_t euclidean;
        std::size_t hyperbolic;
    };

    KdTree() = default;

    explicit KdTree(Dataset data) : data_(std::move(data)) {
        order_.resize(data_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
        if (!data_.empty()) build(0, static_cast<std::uint32_t>(data_.size()));
    }

    /// Reassembles a tree from persisted topology; validates structural consistency.
    KdTree(Dataset data, std::vector<Node> nodes, std::vector<std::uint32_t> order)
        : data_(std::move(data)), nodes_(std::move(nodes)), order_(std::move(order)) {
        if (order_.size() != data_.size()) throw std::invalid_argument("kd-tree order does not match dataset size");
        std::vector<bool> seen(order_.size(), false);
        for (auto p : order_) {
            if (p >= order_.size() || seen[p]) throw std::invalid_argument("kd-tree order is not a permutation");
            seen[p] = true;
        }
        for (auto const& n : nodes_) {
            if (n.begin > n.end || n.end > order_.size()) throw std::invalid_argument("kd-tree node range invalid");
            if (!n.is_leaf() && (n.right < 0 || static_cast<std::size_t>(n.left) >= nodes_.size() ||
                                 static_cast<std::size_t>(n.right) >= nodes_.size() || n.split_dim >= data_.dim()))
                throw std::invalid_argument("kd-tree node links invalid");
        }
        if (!data_.empty() && nodes_.empty()) throw std::invalid_argument("kd-tree has no nodes");
    }

    Dataset const& data() const noexcept { return data_; }
    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::span<const std::uint32_t> order() const noexcept { return order_; }

    std::optional<std::size_t> nearest(std::span<const double> q, OracleStats& stats) const {
        require_nonempty(q);
        ++stats.oracle_calls;
        ScoredPosition best;
        search_one(0, q, best, nullptr, nullptr, stats);
        return best.position;
    }

    /// Nearest in Euclidean terms plus the examined point closest to `reference` in hyperbolic terms.
    TrackedResult nearest_tracking(std::span<const double> q, Point const& reference, OracleStats& stats) const {
        require_nonempty(q);
        require_dimension(data_, reference.dim());
        ++stats.oracle_calls;
        ScoredPosition best;
        ScoredPosition best_hyper;
        search_one(0, q, best, &reference, &best_hyper, stats);
        return {best.position, best_hyper.position};
    }

    std::vector<std::size_t> nearest_k(std::span<const double> q, std::size_t k, OracleStats& stats) const {
        detail::require_k(k, data_.size());
        require_dimension(data_, q.size());
        ++stats.oracle_calls;
        std::priority_queue<ScoredPosition> heap;
        search_k(0, q, k, heap, stats);
        std::vector<ScoredPosition> out;
        out.reserve(heap.size());
        while (!heap.empty()) {
            out.push_back(heap.top());
            heap.pop();
        }
        std::reverse(out.begin(), out.end());
        return detail::positions_of(out);
    }

    /// Exact decision: the nearest neighbor is the certificate when it lies within `(1+eps)R`.
    std::optional<std::size_t> decide(std::span<const double> q, double radius, double eps, OracleStats& stats) const {
        if (!(radius > 0.0)) throw std::invalid_argument("decision radius must be > 0");
        if (data_.empty()) return std::nullopt;
        OracleStats inner;
        auto const nn = nearest(q, inner);
        stats.points_examined += inner.points_examined;
        ++stats.decision_calls;
        double const limit = (1.0 + eps) * radius;
        if (squared_distance(q, data_.coords(*nn)) <= limit * limit) return nn;
        return std::nullopt;
    }

  private:
    void require_nonempty(std::span<const double> q) const {
        if (data_.empty()) throw std::invalid_argument("nearest-neighbor query on an empty dataset");
        require_dimension(data_, q.size());
    }

    std::int32_t build(std::uint32_t begin, std::uint32_t end) {
        auto const index = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(Node{begin, end});
        if (end - begin <= kLeafSize) return index;

        std::size_t const dim = data_.dim();
        std::uint32_t best_dim = 0;
        double best_spread = -1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double lo = data_.coords(order_[begin])[d];
            double hi = lo;
            for (std::uint32_t i = begin + 1; i < end; ++i) {
                double const v = data_.coords(order_[i])[d];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = static_cast<std::uint32_t>(d);
            }
        }
        if (best_spread <= 0.0) return index; // all coincident: keep as an oversized leaf

        std::uint32_t const mid = begin + (end - begin) / 2;
        auto const first = order_.begin() + begin;
        std::nth_element(first, order_.begin() + mid, order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
            double const va = data_.coords(a)[best_dim];
            double const vb = data_.coords(b)[best_dim];
            return va < vb || (va == vb && a < b);
        });
        double const split = data_.coords(order_[mid])[best_dim];

        std::int32_t const left = build(begin, mid);
        std::int32_t const right = build(mid, end);
        Node& node = nodes_[static_cast<std::size_t>(index)];
        node.left = left;
        node.right = right;
        node.split_dim = best_dim;
        node.split_value = split;
        return index;
    }

    void search_one(std::int32_t node_index, std::span<const double> q, ScoredPosition& best, Point const* reference,
                    ScoredPosition* best_hyper, OracleStats& stats) const {
        Node const& node = nodes_[static_cast<std::size_t>(node_index)];
        if (node.is_leaf()) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                std::size_t const p = order_[i];
                double const sq = squared_distance(q, data_.coords(p));
                ++stats.points_examined;
                ScoredPosition const cand{sq, data_.id(p), p};
                if (cand < best) best = cand;
                if (reference) {
                    ScoredPosition const hyp{hyperbolic_distance(*reference, data_.point(p)), data_.id(p), p};
                    if (hyp < *best_hyper) *best_hyper = hyp;
                }
            }
            return;
        }
        double const diff = q[node.split_dim] - node.split_value;
        std::int32_t const near = diff < 0.0 ? node.left : node.right;
        std::int32_t const far = diff < 0.0 ? node.right : node.left;
        search_one(near, q, best, reference, best_hyper, stats);
        if (diff * diff <= best.distance) search_one(far, q, best, reference, best_hyper, stats);
    }

    void search_k(std::int32_t node_index, std::span<const double> q, std::size_t k,
                  std::priority_queue<ScoredPosition>& heap, OracleStats& stats) const {
        Node const& node = nodes_[static_cast<std::size_t>(node_index)];
        if (node.is_leaf()) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                std::size_t const p = order_[i];
                ScoredPosition const cand{squared_distance(q, data_.coords(p)), data_.id(p), p};
                ++stats.points_examined;
                if (heap.size() < k) {
                    heap.push(cand);
                } else if (cand < heap.top()) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        double const diff = q[node.split_dim] - node.split_value;
        std::int32_t const near = diff < 0.0 ? node.left : node.right;
        std::int32_t const far = diff < 0.0 ? node.right : node.left;
        search_k(near, q, k, heap, stats);
        if (heap.size() < k || diff * diff <= heap.top().distance) search_k(far, q, k, heap, stats);
    }

    Dataset data_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
};

/// Euclidean nearest id through the kd-tree.
inline point_id_t kdtree_query(KdTree const& index, std::span<const double> q, OracleStats& stats) {
    return index.data().id(*index.nearest(q, stats));
}

/// `k` Euclidean-nearest ids, ascending distance, smallest id first on ties.
inline std::vector<point_id_t> kdtree_query_k(KdTree const& index, std::span<const double> q, std::size_t k,
                                              OracleStats& stats) {
    std::vector<point_id_t> ids;
    for (auto p : index.nearest_k(q, k, stats)) ids.push_back(index.data().id(p));
    return ids;
}

} // namespace hyperann
