#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"

namespace hyperann {

enum class ConstructionKind {
    recentering_worstcase,
    recentering_bestcase,
    rl_ratio,
    recentering_approx_failure,
    binary_search_approx_failure,
    shell_exact_counterexample,
};

inline std::string to_string(ConstructionKind kind) {
    switch (kind) {
    case ConstructionKind::recentering_worstcase: return "recentering-worstcase";
    case ConstructionKind::recentering_bestcase: return "recentering-bestcase";
    case ConstructionKind::rl_ratio: return "rl-ratio";
    case ConstructionKind::recentering_approx_failure: return "recentering-approx-failure";
    case ConstructionKind::binary_search_approx_failure: return "binary-search-approx-failure";
    case ConstructionKind::shell_exact_counterexample: return "shell-exact-counterexample";
    }
    return "unknown";
}

inline ConstructionKind construction_kind_from_string(std::string const& name) {
    for (auto k : {ConstructionKind::recentering_worstcase, ConstructionKind::recentering_bestcase,
                   ConstructionKind::rl_ratio, ConstructionKind::recentering_approx_failure,
                   ConstructionKind::binary_search_approx_failure, ConstructionKind::shell_exact_counterexample})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown construction kind '" + name + "'");
}

/// What a construction promises; every field is optional and kind-specific.
struct ConstructionExpectation {
    std::optional<std::size_t> oracle_calls;
    std::optional<double> ratio_lower_bound;
    std::optional<double> measured_ratio;
    /// The point an exact search should return.
    std::optional<point_id_t> nearest_id;
    /// The point a misled search returns instead.
    std::optional<point_id_t> misleading_id;
};

struct Construction {
    ConstructionKind kind;
    Dataset data;
    Point query;
    /// Named parameters in generation order.
    std::vector<std::pair<std::string, double>> params;
    ConstructionExpectation expected;

    double param(std::string const& name) const {
        for (auto const& [k, v] : params)
            if (k == name) return v;
        throw std::out_of_range("construction has no parameter '" + name + "'");
    }
};

namespace detail {

/// Root of an increasing function on [lo, hi] by bisection.
inline double bisect_increasing(std::function<double(double)> const& f, double lo, double hi, int iterations = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0) throw std::domain_error("bisection bracket does not contain a root");
    for (int i = 0; i < iterations && hi - lo > 0.0; ++i) {
        double const mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo + (hi - lo) / 2.0;
}

/// Point with coordinate `1 - deficit` on `axis` (other coordinates zero), gap kept exact.
inline Point axis_point_from_deficit(std::size_t dim, std::size_t axis, double deficit) {
    std::vector<double> coords(dim, 0.0);
    coords[axis] = 1.0 - deficit;
    return Point(std::move(coords), deficit * (2.0 - deficit));
}

inline Point axis_point(std::size_t dim, std::size_t axis, double value) {
    std::vector<double> coords(dim, 0.0);
    coords[axis] = value;
    return Point(std::move(coords));
}

/// `d_H((0,..,a), (0,..,b))` for 1-d points given by their deficits `1 - a`, `1 - b`.
inline double axis_distance(double deficit_a, double deficit_b) {
    double const diff = deficit_b - deficit_a;
    return hyperbolic_distance_from_parts(diff * diff, deficit_a * (2.0 - deficit_a), deficit_b * (2.0 - deficit_b));
}

inline void require_dim(std::size_t dim, std::size_t minimum) {
    if (dim < minimum) throw std::invalid_argument("construction needs dimension >= " + std::to_string(minimum));
}

} // namespace detail

/**
 *  Points `q+z, q-z, p_1..p_{k-2}` with `p_i = 1 - 2^-i` on one axis, where
 *  `z` makes `d_H(q, q+z) = d_H(q, 0)`. Recentering needs k+1 oracle calls.
 *  `q_norm` defaults to `1 - 2^-(k+3)`. Ids: q+z is 0, q-z is 1, p_i is i+1.
 */
inline Construction gen_recentering_worstcase(int k, std::optional<double> q_norm = std::nullopt, std::size_t dim = 1) {
    if (k < 3) throw std::invalid_argument("worst-case construction needs k >= 3");
    if (k > 50) throw std::invalid_argument("worst-case construction supports k <= 50");
    detail::require_dim(dim, 1);
    double const q_deficit = q_norm ? 1.0 - *q_norm : std::ldexp(1.0, -(k + 3));
    if (!(q_deficit > 0.0 && q_deficit < 1.0)) throw std::invalid_argument("q_norm must lie in (0, 1)");
    double const qn = 1.0 - q_deficit;

    double const d_origin = 2.0 * std::atanh(qn);
    // d_H(q, q+z) - d_H(q, 0), increasing in z on (0, 1 - q).
    auto residual = [&](double z) { return detail::axis_distance(q_deficit, q_deficit - z) - d_origin; };
    double const z = detail::bisect_increasing(residual, 0.0, q_deficit * (1.0 - 1e-15));

    double const last_filler_deficit = std::ldexp(1.0, -k); // q - z must be at least 1 - 2^-k
    if (!(q_deficit + z <= last_filler_deficit))
        throw std::invalid_argument("infeasible worst case: need q - z >= 1 - 2^-k (raise q_norm)");
    if (!(q_deficit - z > 0.0)) throw std::invalid_argument("infeasible worst case: need q + z < 1");

    Construction c{ConstructionKind::recentering_worstcase, Dataset(dim), detail::axis_point_from_deficit(dim, 0, q_deficit), {}, {}};
    c.data.add(0, detail::axis_point_from_deficit(dim, 0, q_deficit - z));
    // Nudged so q+z is the unique Euclidean nearest neighbor.
    c.data.add(1, detail::axis_point_from_deficit(dim, 0, q_deficit + z * (1.0 + 1e-9)));
    for (int i = 1; i <= k - 2; ++i) c.data.add(i + 1, detail::axis_point(dim, 0, 1.0 - std::ldexp(1.0, -i)));
    c.params = {{"k", k}, {"q_norm", qn}, {"z", z}, {"dim", static_cast<double>(dim)}};
    c.expected.oracle_calls = static_cast<std::size_t>(k) + 1;
    c.expected.nearest_id = 1;
    c.expected.misleading_id = 0;
    return c;
}

/**
 *  `q = (0, 0.99)`, `n_E = (0, 0.998)`, `n_H = (0, 0.981)` plus `k - 2`
 *  fillers spread inside (0.912252, 0.928). Recentering needs 3 calls.
 *  Ids: n_E 0, n_H 1, fillers from 2.
 */
inline Construction gen_recentering_bestcase(int k, std::size_t dim = 2) {
    if (k < 2) throw std::invalid_argument("best-case construction needs k >= 2");
    detail::require_dim(dim, 2);
    std::size_t const axis = 1;
    Construction c{ConstructionKind::recentering_bestcase, Dataset(dim), detail::axis_point(dim, axis, 0.99), {}, {}};
    c.data.add(0, detail::axis_point(dim, axis, 0.998));
    c.data.add(1, detail::axis_point(dim, axis, 0.981));
    double const lo = 0.912252;
    double const hi = 0.928;
    for (int j = 0; j < k - 2; ++j)
        c.data.add(j + 2, detail::axis_point(dim, axis, lo + (hi - lo) * (j + 1) / static_cast<double>(k - 1)));
    c.params = {{"k", k}, {"dim", static_cast<double>(dim)}};
    c.expected.oracle_calls = 3;
    c.expected.nearest_id = 1;
    c.expected.misleading_id = 0;
    return c;
}

namespace detail {

struct CollinearTriple {
    Point q;
    Point near_boundary; // (0, 1 - gamma)
    Point inner;         // (0, 1 - delta)
};

/// `shift` moves q toward n_H, breaking the Euclidean tie in n_H's favor.
inline CollinearTriple collinear_triple(double delta, double gamma, std::size_t dim, double shift = 0.0) {
    std::size_t const axis = 1;
    return {axis_point_from_deficit(dim, axis, (gamma + delta) / 2.0 + shift), axis_point_from_deficit(dim, axis, gamma),
            axis_point_from_deficit(dim, axis, delta)};
}

inline bool rl_regime_holds(double s, double delta, double gamma) {
    return std::pow(delta, s + 1.0) < gamma && gamma < std::pow(delta, s) &&
           (delta - 2.0 * std::pow(delta, s)) / (delta + std::pow(delta, s)) >= 0.5;
}

} // namespace detail

/**
 *  Query midway between `n_E = (0, 1-gamma)` and `n_H = (0, 1-delta)` with
 *  `gamma = delta^(s+1/2)`; the initial bound ratio `R/L` grows like `s/2`.
 *  Ids: n_E 0, n_H 1.
 */
inline Construction gen_rl_ratio_instance(double s, double delta, std::size_t dim = 2) {
    if (!(s > 1.0)) throw std::invalid_argument("rl-ratio construction needs s > 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("rl-ratio construction needs delta in (0, 1)");
    detail::require_dim(dim, 2);
    double const gamma = std::pow(delta, s + 0.5);
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma = delta^(s+1/2) underflows; reduce s or raise delta");
    if (!detail::rl_regime_holds(s, delta, gamma))
        throw std::invalid_argument("regime violated: need delta^(s+1) < gamma < delta^s and "
                                    "(delta - 2 delta^s)/(delta + delta^s) >= 1/2");
    auto t = detail::collinear_triple(delta, gamma, dim);
    Construction c{ConstructionKind::rl_ratio, Dataset(dim), t.q, {}, {}};
    c.data.add(0, t.near_boundary);
    c.data.add(1, t.inner);
    c.params = {{"s", s}, {"delta", delta}, {"gamma", gamma}, {"dim", static_cast<double>(dim)}};
    double const ratio = hyperbolic_distance(t.q, t.near_boundary) / hyperbolic_distance(t.q, t.inner);
    double const bound = (s - 1.0) / 2.0;
    if (!(ratio >= bound - 1.0)) throw std::logic_error("rl-ratio construction missed its ratio bound");
    c.expected.ratio_lower_bound = bound;
    c.expected.measured_ratio = ratio;
    c.expected.nearest_id = 1;
    c.expected.misleading_id = 0;
    return c;
}

/// Margin of the recentering failure inequality `y - r > center + |center - n_E| / (1 + eps)` (positive = holds).
inline double recentering_failure_margin(Point const& q, Point const& n_e, Point const& n_h, double epsilon) {
    std::size_t const axis = 1;
    auto const ball = euclidean_center_of_hyperbolic_ball(q, hyperbolic_distance(q, n_e));
    double const center = ball.center[axis];
    double const lower = n_h[axis];
    double const upper_gap = n_e.norm_deficit();
    // |center - n_E| = (1 - gamma) - center, evaluated from the deficit.
    double const to_far = (1.0 - center) - upper_gap;
    return lower - (center + to_far / (1.0 + epsilon));
}

/**
 *  Two points at equal Euclidean distance from q on one line, on which
 *  recentering with the hostile (1+eps) oracle settles on the point near the
 *  boundary. Shrinks delta until the failure inequality holds and the ratio
 *  reaches `min_ratio`. Ids: n_H 0, n_E 1.
 */
inline Construction gen_recentering_approx_failure(double epsilon, double s = 40.0, double min_ratio = 10.0,
                                                   std::size_t dim = 2) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be > 0");
    detail::require_dim(dim, 2);
    double delta = 0.5 * std::min(epsilon / 6.0, epsilon / (4.0 + 3.0 * epsilon));
    for (int attempt = 0; attempt < 60; ++attempt, delta /= 2.0) {
        double const gamma = std::pow(delta, s + 0.5);
        if (!(gamma > 0.0)) break;
        if (!detail::rl_regime_holds(s, delta, gamma)) continue;
        auto t = detail::collinear_triple(delta, gamma, dim, 1e-9 * delta);
        double const margin = recentering_failure_margin(t.q, t.near_boundary, t.inner, epsilon);
        double const ratio = hyperbolic_distance(t.q, t.near_boundary) / hyperbolic_distance(t.q, t.inner);
        if (!(margin > 0.0) || !(ratio >= min_ratio)) continue;
        Construction c{ConstructionKind::recentering_approx_failure, Dataset(dim), t.q, {}, {}};
        c.data.add(0, t.inner);
        c.data.add(1, t.near_boundary);
        c.params = {{"epsilon", epsilon}, {"s", s}, {"delta", delta}, {"gamma", gamma}, {"shift", 1e-9 * delta},
                    {"margin", margin}, {"dim", static_cast<double>(dim)}};
        c.expected.measured_ratio = ratio;
        c.expected.ratio_lower_bound = min_ratio;
        c.expected.nearest_id = 0;
        c.expected.misleading_id = 1;
        return c;
    }
    throw std::domain_error("no recentering failure instance found for epsilon = " + std::to_string(epsilon));
}

/// Signed positions `t_1 < y < t_2` on the axis at hyperbolic distance `dist` from `(0, y)`, by bisection.
inline std::pair<double, double> axis_boundary_scalars(double y, double dist) {
    double const y_deficit = 1.0 - y;
    // Inward: distance decreasing in t on (-1, y).
    auto inward = [&](double t) { return dist - detail::axis_distance(y_deficit, 1.0 - t); };
    double const t1 = detail::bisect_increasing(inward, -1.0, y);
    // Outward: parametrize by deficit u = 1 - t in (0, 1 - y).
    auto outward = [&](double u) { return dist - detail::axis_distance(y_deficit, u); };
    double const u = detail::bisect_increasing(outward, 0.0, y_deficit);
    return {t1, 1.0 - u};
}

/**
 *  Same line geometry with `gamma` tuned so `d_H(q, n_E) / d_H(q, n_H) = S`;
 *  binary search with the hostile oracle keeps answering n_E. Requires
 *  `4 / e^(0.49 sqrt(S)) <= delta^2 / 8` with `delta = 0.9 eps / 6`.
 *  Ids: n_H 0, n_E 1.
 */
inline Construction gen_binary_search_approx_failure(double epsilon, double S = 400.0, double c = 2.0,
                                                     std::size_t dim = 2) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be > 0");
    if (!(c > 1.0)) throw std::invalid_argument("c must be > 1");
    detail::require_dim(dim, 2);
    double const delta = 0.9 * epsilon / 6.0;
    if (!(delta < 1.0)) throw std::invalid_argument("epsilon too large: need delta = 0.9 eps / 6 < 1");
    double const lhs = 4.0 / std::exp(0.49 * std::sqrt(S));
    double const rhs = delta * delta / 8.0;
    if (!(lhs <= rhs))
        throw std::invalid_argument("S too small: need 4/e^(0.49 sqrt(S)) <= delta^2/8 (" + std::to_string(lhs) +
                                    " > " + std::to_string(rhs) + ")");

    double const shift = 1e-9 * delta;
    auto ratio_of = [&](double log_gamma) {
        auto t = detail::collinear_triple(delta, std::exp(log_gamma), dim, shift);
        return hyperbolic_distance(t.q, t.near_boundary) / hyperbolic_distance(t.q, t.inner);
    };
    double const hi = std::log(delta / 5.0); // keeps (delta - 2 gamma)/(delta + gamma) >= 1/2
    double const lo = std::log(1e-300);
    if (!(ratio_of(lo) >= S)) throw std::invalid_argument("S too large for double-precision gaps");
    if (!(ratio_of(hi) <= S)) throw std::invalid_argument("S too small for this delta");
    double const log_gamma = detail::bisect_increasing([&](double lg) { return S - ratio_of(lg); }, lo, hi);
    double const gamma = std::exp(log_gamma);

    auto t = detail::collinear_triple(delta, gamma, dim, shift);
    double const R = hyperbolic_distance(t.q, t.near_boundary);
    double const L = hyperbolic_distance(t.q, t.inner);
    double const D = std::sqrt(R * L);
    double const y = 1.0 - (gamma + delta) / 2.0 - shift;
    double const r = (delta - gamma) / 2.0;
    auto const [t1, t2] = axis_boundary_scalars(y, D);
    double const center = (t1 + t2) / 2.0;
    double const margin = (y - r) - (center + (y + r - center) / (1.0 + epsilon));
    if (!(margin > 0.0)) throw std::domain_error("binary-search failure inequality does not hold");

    Construction out{ConstructionKind::binary_search_approx_failure, Dataset(dim), t.q, {}, {}};
    out.data.add(0, t.inner);
    out.data.add(1, t.near_boundary);
    out.params = {{"epsilon", epsilon}, {"S", S}, {"c", c}, {"delta", delta}, {"gamma", gamma}, {"shift", shift},
                  {"t1", t1}, {"t2", t2}, {"margin", margin}, {"dim", static_cast<double>(dim)}};
    out.expected.measured_ratio = R / L;
    out.expected.ratio_lower_bound = S * (1.0 - 1e-6);
    out.expected.nearest_id = 0;
    out.expected.misleading_id = 1;
    return out;
}

/**
 *  `D = {(0, 0.5), (0.15, 0.55)}`, `q = (0, 0.99)`, `w = 3`: both points share
 *  band 1, so the annulus search returns the Euclidean nearest (0.15, 0.55)
 *  although (0, 0.5) is hyperbolically closer. Ids: (0, 0.5) is 0.
 */
inline Construction shell_exact_counterexample() {
    Construction c{ConstructionKind::shell_exact_counterexample, Dataset(2), Point({0.0, 0.99}), {}, {}};
    c.data.add(0, {0.0, 0.5});
    c.data.add(1, {0.15, 0.55});
    c.params = {{"w", 3.0}, {"max_norm", 0.99}, {"dim", 2.0}};
    c.expected.nearest_id = 0;
    c.expected.misleading_id = 1;
    c.expected.measured_ratio = hyperbolic_distance(c.query, c.data.point(1)) / hyperbolic_distance(c.query, c.data.point(0));
    return c;
}

} // namespace hyperann
