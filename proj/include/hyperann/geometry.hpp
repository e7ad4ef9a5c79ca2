#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hyperann {

/// Relative tolerance used whenever two hyperbolic distances are compared for
/// equality: `|a - b| <= kDistanceTolerance * (1 + a)`.
inline constexpr double kDistanceTolerance = 1e-12;

inline bool distances_equal(double a, double b) noexcept {
    return std::abs(a - b) <= kDistanceTolerance * (1.0 + std::abs(a));
}

/// True when `candidate` improves on `incumbent` by more than the tolerance.
inline bool distance_improves(double candidate, double incumbent) noexcept {
    return candidate < incumbent && !distances_equal(incumbent, candidate);
}

inline double squared_norm(std::span<const double> x) noexcept {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double const d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

/**
 *  A point strictly inside the open unit ball.
 *
 *  Besides the coordinates the point carries its boundary gap `1 - |x|^2`.
 *  For points generated analytically very close to the boundary the gap can be
 *  supplied exactly, which keeps hyperbolic distances accurate long after the
 *  coordinates themselves have rounded to the unit sphere.
 */
class Point {
  public:
    Point() = default;

    explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
        validate_coords();
        double const sq = hyperann::squared_norm(coords_);
        gap_ = 1.0 - sq;
        if (!(gap_ > 0.0))
            throw std::domain_error("point is not strictly inside the unit ball (norm^2 = " +
                                    std::to_string(sq) + ")");
    }

    /// Constructs with an explicitly known boundary gap. The gap must agree with
    /// the coordinates up to their rounding error.
    Point(std::vector<double> coords, double boundary_gap) : coords_(std::move(coords)), gap_(boundary_gap) {
        validate_coords();
        if (!std::isfinite(gap_) || !(gap_ > 0.0) || gap_ > 1.0)
            throw std::domain_error("boundary gap must lie in (0, 1]");
        double const implied = 1.0 - hyperann::squared_norm(coords_);
        if (std::abs(implied - gap_) > 1e-12)
            throw std::domain_error("boundary gap inconsistent with coordinates");
    }

    std::span<const double> coords() const noexcept { return coords_; }
    std::size_t dim() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const noexcept { return coords_[i]; }

    /// `1 - |x|^2`, always in (0, 1].
    double boundary_gap() const noexcept { return gap_; }
    double squared_norm() const noexcept { return 1.0 - gap_; }
    double norm() const noexcept { return std::sqrt(std::max(0.0, 1.0 - gap_)); }
    /// `1 - |x|`, computed from the gap so it keeps its relative precision.
    double norm_deficit() const noexcept { return gap_ / (1.0 + norm()); }
    /// `-log(1 - |x|^2)`.
    double log_inverse_gap() const noexcept { return -std::log(gap_); }
    bool is_origin() const noexcept {
        return std::all_of(coords_.begin(), coords_.end(), [](double v) { return v == 0.0; });
    }

    friend bool operator==(Point const& a, Point const& b) noexcept { return a.coords_ == b.coords_; }

  private:
    void validate_coords() const {
        if (coords_.empty()) throw std::invalid_argument("point must have dimension >= 1");
        for (double v : coords_)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite coordinate");
    }

    std::vector<double> coords_;
    double gap_ = 1.0;
};

/// `arccosh(1 + z)` evaluated as `log1p(z + sqrt(z (z + 2)))`; exact zero at z = 0.
inline double arccosh_one_plus(double z) noexcept {
    z = std::max(z, 0.0);
    if (z > 1e8) return std::log(2.0) + std::log1p(z);
    return std::log1p(z + std::sqrt(z * (z + 2.0)));
}

/// Poincaré ball distance from precomputed pieces.
inline double hyperbolic_distance_from_parts(double squared_euclidean, double gap_x, double gap_y) noexcept {
    return arccosh_one_plus(2.0 * squared_euclidean / (gap_x * gap_y));
}

inline double hyperbolic_distance(Point const& x, Point const& y) {
    return hyperbolic_distance_from_parts(squared_distance(x.coords(), y.coords()), x.boundary_gap(),
                                          y.boundary_gap());
}

/// Distance from the origin: `2 artanh |x|`.
inline double distance_from_origin(Point const& x) noexcept {
    return 2.0 * std::log1p(x.norm()) - std::log(x.boundary_gap());
}

/// `log cosh(x)` without overflow.
inline double log_cosh(double x) noexcept {
    x = std::abs(x);
    return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

enum class RadialSide { outward, inward };

namespace detail {

/// Signed norm `s` of the point on the ray through `c` at hyperbolic offset
/// `d` from `c`, with `-log(1 - s^2)`. Uses the tanh addition formula.
struct RadialPoint {
    double signed_norm;
    double log_inverse_gap;
};

inline RadialPoint radial_point(Point const& c, double d, RadialSide side) noexcept {
    double const n = c.norm();
    double const th = std::tanh(d / 2.0);
    double const sgn = side == RadialSide::outward ? 1.0 : -1.0;
    double const denom = 1.0 + sgn * n * th;
    double const s = (n + sgn * th) / denom;
    // 1 - s^2 = (1 - n^2)(1 - th^2) / denom^2
    double const lig = c.log_inverse_gap() + 2.0 * log_cosh(d / 2.0) + 2.0 * std::log(denom);
    return {s, lig};
}

} // namespace detail

/**
 *  Scalar `t` such that `t * c` lies on the ray through `c` at hyperbolic
 *  distance `d` from `c`, on the far side from the origin (`outward`) or the
 *  near side (`inward`). For the inward side `t <= 0` means the point reached
 *  or crossed the origin.
 */
inline double radial_scalar(Point const& c, double d, RadialSide side) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("radial_scalar: radius must be finite and >= 0");
    if (c.is_origin()) throw std::domain_error("radial_scalar: direction undefined at the origin");
    if (d == 0.0) return 1.0;
    return detail::radial_point(c, d, side).signed_norm / c.norm();
}

struct EuclideanBall {
    std::vector<double> center;
    double radius = 0.0;

    bool contains(std::span<const double> x) const { return euclidean_distance(center, x) <= radius; }
};

struct HyperbolicBall {
    Point center;
    double radius = 0.0;

    HyperbolicBall(Point c, double r) : center(std::move(c)), radius(r) {
        if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("hyperbolic radius must be finite and >= 0");
    }
    bool contains(Point const& x) const { return hyperbolic_distance(center, x) <= radius; }
};

/// The Euclidean ball occupying the same set as the hyperbolic ball `B_H(c, r)`.
inline EuclideanBall euclidean_center_of_hyperbolic_ball(Point const& c, double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("hyperbolic radius must be finite and >= 0");
    EuclideanBall ball;
    if (c.is_origin()) {
        ball.center.assign(c.dim(), 0.0);
        ball.radius = std::tanh(r / 2.0);
        return ball;
    }
    double const t1 = radial_scalar(c, r, RadialSide::outward);
    double const t2 = radial_scalar(c, r, RadialSide::inward);
    double const scale = (t1 + t2) / 2.0;
    ball.center.resize(c.dim());
    for (std::size_t i = 0; i < c.dim(); ++i) ball.center[i] = scale * c[i];
    ball.radius = (t1 - t2) / 2.0 * c.norm();
    return ball;
}

inline EuclideanBall euclidean_center_of_hyperbolic_ball(HyperbolicBall const& ball) {
    return euclidean_center_of_hyperbolic_ball(ball.center, ball.radius);
}

/// The point `t * c` given `1 - t`, with its boundary gap computed without
/// cancellation.
inline Point scaled_point(Point const& c, double one_minus_t) {
    double const t = 1.0 - one_minus_t;
    std::vector<double> coords(c.dim());
    for (std::size_t i = 0; i < c.dim(); ++i) coords[i] = t * c[i];
    double const n = c.norm();
    double const deficit = c.norm_deficit() + one_minus_t * n; // 1 - t n
    double const gap = deficit * (2.0 - deficit);              // (1 - tn)(1 + tn)
    double const implied = 1.0 - squared_norm(coords);
    if (std::abs(implied - gap) > 1e-12) return Point(std::move(coords));
    return Point(std::move(coords), gap);
}

// ---------------------------------------------------------------------------
// Annulus (shell) bands
// ---------------------------------------------------------------------------

/**
 *  Band `b` holds points with `w^(b-1) <= 1/(1-|x|^2) <= w^b`. The origin
 *  region (band 0 of the raw formula) is folded into band 1.
 */
struct ShellParams {
    double width = 3.0;
    double max_norm = 0.0;
    int num_bands = 1;
    /// `1 - max_norm^2`; points with a smaller gap are out of range.
    double min_gap = 1.0;

    static ShellParams from_max_norm(double width, double max_norm) {
        if (!(width > 1.0) || !std::isfinite(width)) throw std::invalid_argument("shell width must be > 1");
        if (!(max_norm > 0.0 && max_norm < 1.0)) throw std::invalid_argument("max norm must lie in (0, 1)");
        ShellParams p;
        p.width = width;
        p.max_norm = max_norm;
        p.min_gap = (1.0 - max_norm) * (1.0 + max_norm);
        p.num_bands = std::max(1, static_cast<int>(std::ceil(-std::log(p.min_gap) / std::log(width))));
        return p;
    }

    /// Parameters covering exactly `num_bands` bands of width `width`.
    static ShellParams from_band_count(double width, int num_bands) {
        if (!(width > 1.0) || !std::isfinite(width)) throw std::invalid_argument("shell width must be > 1");
        if (num_bands < 1) throw std::invalid_argument("band count must be >= 1");
        ShellParams p;
        p.width = width;
        p.num_bands = num_bands;
        p.min_gap = std::pow(width, -num_bands);
        p.max_norm = std::sqrt(1.0 - p.min_gap);
        return p;
    }

    double log_width() const noexcept { return std::log(width); }
};

/// Raw band index `max(1, ceil(lig / log w))` for `lig = -log(1 - |x|^2)`.
inline int band_of_log_inverse_gap(double log_inverse_gap, double width) noexcept {
    double const raw = std::ceil(log_inverse_gap / std::log(width));
    if (!(raw >= 1.0)) return 1;
    if (raw > static_cast<double>(std::numeric_limits<int>::max() / 2)) return std::numeric_limits<int>::max() / 2;
    return static_cast<int>(raw);
}

/// Band of any point, without the range check (queries may lie beyond `L`).
inline int band_of(Point const& x, double width) noexcept { return band_of_log_inverse_gap(x.log_inverse_gap(), width); }

inline int partition_index(Point const& x, ShellParams const& params) {
    if (x.boundary_gap() < params.min_gap)
        throw std::out_of_range("point norm " + std::to_string(x.norm()) + " exceeds supported maximum " +
                                std::to_string(params.max_norm));
    return std::min(band_of(x, params.width), params.num_bands);
}

/// Band-intersection test for a ball `B_H(c, radius)` given directly by radius.
inline bool check_intersection_radius(Point const& c, double radius, ShellParams const& params, int band) {
    double const log_w = params.log_width();
    if (c.is_origin()) {
        double const lig = 2.0 * log_cosh(radius / 2.0);
        int const j = band_of_log_inverse_gap(lig, params.width);
        return band <= j;
    }
    int const query_band = band_of(c, params.width);
    if (band >= query_band) {
        auto const far = detail::radial_point(c, radius, RadialSide::outward);
        int const j = static_cast<int>(std::ceil(far.log_inverse_gap / log_w));
        return band <= j;
    }
    auto const near = detail::radial_point(c, radius, RadialSide::inward);
    if (near.signed_norm <= 0.0) return true;
    int const j = static_cast<int>(std::floor(near.log_inverse_gap / log_w));
    return band >= j;
}

/**
 *  Whether band `band` can intersect `B_H(c, d_H(c, p))`. With no boundary
 *  point yet every band is live. Complete: never false for a band holding a
 *  point of the ball.
 */
inline bool check_intersection(Point const& c, std::optional<Point> const& p, ShellParams const& params, int band) {
    if (!p) return true;
    return check_intersection_radius(c, hyperbolic_distance(c, *p), params, band);
}

/// Same test driven by a known distance (or none).
inline bool check_intersection(Point const& c, std::optional<double> radius, ShellParams const& params, int band) {
    if (!radius) return true;
    return check_intersection_radius(c, *radius, params, band);
}

/**
 *  Hyperbolic distance from `c` to the level set `1/(1-|x|^2) = w^exponent`
 *  measured along the ray through `c`. Exponent 0 is the origin itself, which
 *  bounds nothing, so it reports +inf.
 */
inline double distance_to_level(Point const& c, int exponent, ShellParams const& params) noexcept {
    if (exponent <= 0) return std::numeric_limits<double>::infinity();
    double const lig = exponent * params.log_width();
    double const s = std::sqrt(-std::expm1(-lig));
    double const level_from_origin = 2.0 * std::log1p(s) + lig;
    return std::abs(level_from_origin - distance_from_origin(c));
}

/**
 *  Picks between the next outward band `outer` and the next inward band
 *  `inner` (outer > inner): the one whose addition covers the larger
 *  hyperbolic ball around `c`. Ties go to the outward band.
 */
inline int choose_band(Point const& c, std::optional<double> current_radius, ShellParams const& params, int outer,
                       int inner) {
    if (!(outer > inner)) throw std::invalid_argument("choose_band: requires outer > inner");
    double const neg_inf = -std::numeric_limits<double>::infinity();
    double covered_outer = neg_inf;
    double covered_inner = neg_inf;
    bool const outer_live = check_intersection(c, current_radius, params, outer);
    bool const inner_live = check_intersection(c, current_radius, params, inner);
    if (!outer_live && !inner_live) throw std::logic_error("choose_band: neither band intersects the ball");
    if (outer_live)
        covered_outer = std::min(distance_to_level(c, outer, params), distance_to_level(c, inner, params));
    if (inner_live)
        covered_inner = std::min(distance_to_level(c, outer - 1, params), distance_to_level(c, inner - 1, params));
    return covered_outer >= covered_inner ? outer : inner;
}

inline int choose_band(Point const& c, std::optional<Point> const& current_best, ShellParams const& params, int outer,
                       int inner) {
    std::optional<double> radius;
    if (current_best) radius = hyperbolic_distance(c, *current_best);
    return choose_band(c, radius, params, outer, inner);
}

} // namespace hyperann
