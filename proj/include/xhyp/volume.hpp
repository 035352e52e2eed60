#pragma once

// The two mu pipelines (contour and eps-limit), direct integration of
// one-sided domains, and the invariance and additivity checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "xhyp/contour.hpp"
#include "xhyp/densities.hpp"
#include "xhyp/divergence.hpp"
#include "xhyp/domains.hpp"
#include "xhyp/errors.hpp"
#include "xhyp/extrapolation.hpp"
#include "xhyp/geometry.hpp"
#include "xhyp/quadrature.hpp"

namespace xhyp {

namespace detail {

inline std::vector<double> with_breaks(double a, double b, std::vector<double> interior) {
    std::vector<double> pts{a};
    std::sort(interior.begin(), interior.end());
    for (double p : interior) {
        if (p > a && p < b && p != pts.back()) pts.push_back(p);
    }
    pts.push_back(b);
    return pts;
}

template <class F>
cplx integrate_c(F&& f, const std::vector<double>& pts, const AdaptiveOptions& opt) {
    return integrate_adaptive(std::forward<F>(f), std::span<const double>(pts), opt).value;
}

inline AdaptiveOptions inner_options() { return {1e-14, 1e-11, 1 << 12}; }

/// arctan with a guard against its branch cuts on the imaginary axis.
inline cplx atan_checked(cplx w) {
    if (std::abs(w.real()) < 1e-9 && std::abs(w.imag()) > 1.0 - 1e-9) {
        std::ostringstream os;
        os.precision(17);
        os << "slice_integral: arctan argument " << w << " on or near its branch cut";
        throw numerical_error(os.str());
    }
    return std::atan(w);
}

/// int_lo^hi dx2 / (x2^2 + s^2) with s^2 = x1^2 + (z - 1)^2; even in s, so
/// the principal root suffices.
inline cplx strip_kernel(double x1, cplx z, cplx lo, cplx hi) {
    const cplx s = std::sqrt(x1 * x1 + (z - 1.0) * (z - 1.0));
    if (std::abs(s) < kSingularGuard) throw singular_point_error("slice_integral: slice through e_n");
    return (atan_checked(hi / s) - atan_checked(lo / s)) / s;
}

// log(1 + w) without cancellation for small |w|.
inline cplx log1p_c(cplx w) {
    if (std::abs(w) > 1e-3) return std::log(1.0 + w);
    cplx term = w, sum = 0.0;
    for (int k = 1; k <= 8; ++k, term *= -w) sum += term / static_cast<double>(k);
    return sum;
}

inline void require_positive_tol(double tol, const char* where) {
    if (!(tol > 0.0)) throw std::invalid_argument(std::string(where) + ": tolerance must be positive");
}

}  // namespace detail

/// Evaluates the slice function of a domain at real or complex height (the
/// Klein radius r for Klein families, x_n for flattened families). Holds the
/// per-domain geometry so that repeated evaluation is cheap.
class SliceFunction {
public:
    explicit SliceFunction(DomainSpec d) : domain_(std::move(d)) {
        validate(domain_);
        if (const auto* p = std::get_if<Polygon2D>(&domain_)) polygon_.emplace(*p);
        if (const auto* b = std::get_if<Ball3D>(&domain_)) ball_.emplace(*b);
    }

    const DomainSpec& domain() const { return domain_; }
    int dim() const { return domain_dim(domain_); }
    bool klein() const { return is_klein_family(domain_); }

    /// Real range [a, b] of the height variable.
    std::pair<double, double> range() const {
        return std::visit(
            [this](const auto& v) -> std::pair<double, double> {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Sector2D>) {
                    return {v.inner, v.outer};
                } else if constexpr (std::is_same_v<T, Polygon2D>) {
                    return {0.0, polygon_->max_radius()};
                } else if constexpr (std::is_same_v<T, Ball3D>) {
                    const bool hollow = ball_->center_distance() > v.radius;
                    return {hollow ? ball_->inner_breakpoint() : 0.0, ball_->outer_breakpoint()};
                } else if constexpr (std::is_same_v<T, Box3D>) {
                    return {v.x3_lo, v.x3_hi};
                } else if constexpr (std::is_same_v<T, Wedge3D>) {
                    return {-v.height, v.height};
                } else {
                    return {0.0, v.height};
                }
            },
            domain_);
    }

    /// Heights where the slice function has kinks.
    std::vector<double> kinks() const {
        if (polygon_) return polygon_->vertex_radii();
        if (ball_) return {ball_->inner_breakpoint(), ball_->outer_breakpoint()};
        return {};
    }

    /// Location of the singular hyperplane in the height variable.
    double singular_height() const { return klein() ? 1.0 : 0.0; }

    /// Radius of the disk about the singular height where the slice function is analytic.
    double analytic_radius() const {
        if (polygon_) return polygon_->analytic_radius();
        if (ball_) return ball_->analytic_radius();
        return std::numeric_limits<double>::infinity();
    }

    /// Angular measure F(r) of a Klein family, continued to complex r.
    cplx angular(cplx r) const {
        if (const auto* s = std::get_if<Sector2D>(&domain_)) {
            if (r.imag() != 0.0) return s->angle;
            const double x = r.real();
            return (x >= s->inner && x <= s->outer) ? s->angle : 0.0;
        }
        if (polygon_) return polygon_->theta(r);
        if (ball_) return ball_->measure(r);
        throw unsupported_error("angular measure is defined for Klein families only");
    }

    /// Slice integral of the exact density. For Klein families this is the
    /// radial integrand F(r) r^{n-1} (1 - r^2)^{-(n+1)/2} with the lower-limit
    /// reading of the negative real axis.
    cplx operator()(cplx z) const {
        if (klein()) {
            const int n = dim();
            const cplx rn = n == 2 ? z : z * z;
            return angular(z) * rn * density_klein_radial(z, n);
        }
        if (std::abs(z) < kSingularGuard) throw singular_point_error("slice_integral: height on the singular hyperplane");
        return std::visit(
            [&](const auto& v) -> cplx {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Box3D>) {
                    auto g = [&](double x1) { return detail::strip_kernel(x1, z, v.x2_lo, v.x2_hi); };
                    return integrate_adaptive(g, v.x1_lo, v.x1_hi, detail::inner_options()).value / (2.0 * z * z);
                } else if constexpr (std::is_same_v<T, Wedge3D>) {
                    auto g = [&](double x1) {
                        const double c = polynomial(v.c_coeffs, x1);
                        const double d = polynomial(v.d_coeffs, x1);
                        return detail::strip_kernel(x1, z, c, c + d * z);
                    };
                    return integrate_adaptive(g, v.x1_lo, v.x1_hi, detail::inner_options()).value / (2.0 * z * z);
                } else if constexpr (std::is_same_v<T, Cone3D>) {
                    const cplx q = z / (v.slope * (z - 1.0));
                    return std::numbers::pi * detail::log1p_c(q * q) / (2.0 * z * z);
                } else if constexpr (std::is_same_v<T, HolderGraph2D>) {
                    if (z.imag() != 0.0 || z.real() < 0.0) {
                        throw std::domain_error("slice_integral: HolderGraph2D slices are defined for real x2 > 0");
                    }
                    const double x2 = z.real();
                    const double g = v.coeff * std::pow(x2, v.beta);
                    return std::asinh(g / std::abs(1.0 - x2)) / (2.0 * lower_pow(-z, 1.5));
                } else if constexpr (std::is_same_v<T, HolderGraph3D>) {
                    if (z.imag() != 0.0 || z.real() < 0.0) {
                        throw std::domain_error("slice_integral: HolderGraph3D slices are defined for real x3 > 0");
                    }
                    const double g = v.g(z.real());
                    auto k = [&](double x1) { return detail::strip_kernel(x1, z, 0.0, g); };
                    return integrate_adaptive(k, v.x1_lo, v.x1_hi, detail::inner_options()).value / (2.0 * z * z);
                } else {
                    throw std::logic_error("slice_integral: unexpected family");
                }
            },
            domain_);
    }

private:
    DomainSpec domain_;
    std::optional<PolygonAngular> polygon_;
    std::optional<BallAngular> ball_;
};

/// Slice integral of the exact density at height z (see SliceFunction).
/// Complex z must lie within the family's analyticity region.
inline cplx slice_integral(const DomainSpec& d, cplx z) {
    const SliceFunction f(d);
    if (z.imag() != 0.0 && std::abs(z - f.singular_height()) >= f.analytic_radius()) {
        throw std::domain_error("slice_integral: complex height outside the analyticity region");
    }
    return f(z);
}

/// Angular measure F(r) of a Klein family.
inline cplx angular_measure(const DomainSpec& d, cplx r) { return SliceFunction(d).angular(r); }

// ---------------------------------------------------------------------------
// Contour pipeline

inline bool has_contour_slice(const DomainSpec& d) {
    return std::holds_alternative<Sector2D>(d) || std::holds_alternative<Polygon2D>(d) ||
           std::holds_alternative<Box3D>(d) || std::holds_alternative<Wedge3D>(d) || std::holds_alternative<Ball3D>(d);
}

namespace detail {

inline QuadratureResult contour_pass(const SliceFunction& f, double a, double b, const std::vector<double>& sings,
                                     double delta, double tol) {
    Contour c = build_contour(a, b, sings, delta).split_at(f.kinks());
    if (f.klein() && f.dim() == 2) {
        // (1 - z^2)^{-3/2} continued along the path.
        TrackedPower power([](cplx z) { return 1.0 - z * z; }, 1.5, c);
        auto g = [&](cplx z, double s) { return z * f.angular(z) * power(z, s); };
        return integrate_path(g, c, tol);
    }
    return integrate_path([&](cplx z) { return f(z); }, c, tol);
}

}  // namespace detail

/// mu(U) as the integral of the slice function along the detour contour
/// around the singular height. delta = 0 picks the detour radius from the
/// geometry. The value is cross-checked on a second detour of radius delta/2.
inline QuadratureResult mu_contour(const DomainSpec& d, double tol = 1e-8, double delta = 0.0) {
    detail::require_positive_tol(tol, "mu_contour");
    if (!has_contour_slice(d)) {
        throw unsupported_error(std::string("mu_contour: no analytic slice function for ") + domain_name(d));
    }
    const SliceFunction f(d);
    const auto [a, b] = f.range();
    const double h = f.singular_height();
    std::vector<double> sings;
    if (a < h && h < b) sings.push_back(h);
    if (sings.empty()) return detail::contour_pass(f, a, b, sings, 0.0, 0.1 * tol);

    double limit = 0.1 * std::min(h - a, b - h);
    for (double k : f.kinks()) {
        if (k != h) limit = std::min(limit, 0.5 * std::abs(k - h));
    }
    limit = std::min(limit, 0.5 * f.analytic_radius());
    if (delta == 0.0) delta = limit;
    if (!(delta > 0.0) || delta >= f.analytic_radius() || delta > std::min(h - a, b - h)) {
        throw std::invalid_argument("mu_contour: detour radius outside the analyticity region");
    }
    auto first = detail::contour_pass(f, a, b, sings, delta, 0.1 * tol);
    const auto second = detail::contour_pass(f, a, b, sings, 0.5 * delta, 0.1 * tol);
    const double spread = std::abs(first.value - second.value);
    if (spread > std::max(tol, 10.0 * (first.error_estimate + second.error_estimate))) {
        std::ostringstream os;
        os << "mu_contour: detour radii " << delta << " and " << 0.5 * delta << " disagree by " << spread
           << "; slice function is not analytic near the singular set";
        throw numerical_error(os.str());
    }
    first.evaluations += second.evaluations;
    first.error_estimate = std::max(first.error_estimate, spread);
    return first;
}

// ---------------------------------------------------------------------------
// eps-limit pipeline

namespace detail {

inline Vec2 rotate2(Vec2 p, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * p[0] - s * p[1], s * p[0] + c * p[1]};
}

/// Integral of a Klein-chart density over {r in [a, b], theta in arcs(r)}.
template <class Arcs>
cplx klein_polar_2d(const DensityVariant& v, double a, double b, const std::vector<double>& kinks, Arcs&& arcs,
                    double quad_tol) {
    auto outer = [&](double r) -> cplx {
        cplx s = 0.0;
        for (const auto& [t0, t1] : arcs(r)) {
            auto inner = [&](double th) {
                const std::array<double, 2> y{r * std::cos(th), r * std::sin(th)};
                return evaluate_in_klein_chart(v, y);
            };
            s += integrate_adaptive(inner, t0, t1, inner_options()).value;
        }
        return r * s;
    };
    std::vector<double> cuts = kinks;
    cuts.push_back(1.0);
    return integrate_c(outer, with_breaks(a, b, cuts), AdaptiveOptions{quad_tol, 0.0, 1 << 15});
}

/// Best rotation k pi / 8 of a polygon away from e_n.
inline Polygon2D rotate_polygon_off_pole(const Polygon2D& p) {
    double best = -1.0;
    Polygon2D out = p;
    for (int k = 0; k < 16; ++k) {
        Polygon2D q = p;
        for (auto& v : q.vertices) v = rotate2(v, k * std::numbers::pi / 8.0);
        const double dist = distance_to_polygon(q, {0.0, 1.0});
        if (dist > best + 1e-12) {
            best = dist;
            out = q;
        }
    }
    if (best < 0.05) {
        throw unsupported_error("mu_eps: no rotation moves the polygon away from e_n; the flattened image is unbounded");
    }
    return out;
}

inline cplx eps_integral_klein(const DomainSpec& d, const DensityVariant& v, double quad_tol) {
    const int n = v.dim;
    if (v.kind == DensityKind::KleinEps) {
        const SliceFunction f(d);
        const auto [a, b] = f.range();
        auto g = [&](double r) {
            const double rn = n == 2 ? r : r * r;
            return f.angular(r) * rn * density_klein_eps_r2(r * r, n, v.eps);
        };
        auto k = f.kinks();
        k.push_back(1.0);
        return integrate_c(g, with_breaks(a, b, k), AdaptiveOptions{quad_tol, 0.0, 1 << 15});
    }
    // Flattened variants act through the Cayley map; rotate the domain away
    // from e_n first (mu is rotation invariant).
    if (const auto* s = std::get_if<Sector2D>(&d)) {
        const int pieces = std::max(1, static_cast<int>(std::ceil(s->angle / (0.5 * std::numbers::pi) - 1e-12)));
        const double w = s->angle / pieces;
        const double t0 = -0.5 * std::numbers::pi - 0.5 * w;
        auto arcs = [&](double) { return std::vector<std::pair<double, double>>{{t0, t0 + w}}; };
        return static_cast<double>(pieces) * klein_polar_2d(v, s->inner, s->outer, {}, arcs, quad_tol / pieces);
    }
    if (const auto* p = std::get_if<Polygon2D>(&d)) {
        const PolygonAngular ang(rotate_polygon_off_pole(*p));
        auto arcs = [&](double r) { return ang.arcs(r); };
        return klein_polar_2d(v, 0.0, ang.max_radius(), ang.vertex_radii(), arcs, quad_tol);
    }
    const auto& ball = std::get<Ball3D>(d);
    const BallAngular ang(ball);
    const double c = ang.center_distance();
    if (1.0 + c - ball.radius < 0.05) {
        throw unsupported_error("mu_eps: ball too close to e_n for the flattened chart");
    }
    // Centre rotated to -c e_3; polar angle phi measured from -e_3.
    const double a = c > ball.radius ? ang.inner_breakpoint() : 0.0;
    const double b = ang.outer_breakpoint();
    auto outer = [&](double r) -> cplx {
        const double phimax = ang.cap_angle(r);
        if (phimax <= 0.0) return 0.0;
        auto mid = [&](double phi) -> cplx {
            auto inner = [&](double psi) {
                const std::array<double, 3> y{r * std::sin(phi) * std::cos(psi), r * std::sin(phi) * std::sin(psi),
                                              -r * std::cos(phi)};
                return evaluate_in_klein_chart(v, y);
            };
            return std::sin(phi) *
                   integrate_adaptive(inner, 0.0, 2.0 * std::numbers::pi, inner_options()).value;
        };
        return r * r * integrate_adaptive(mid, 0.0, phimax, inner_options()).value;
    };
    return integrate_c(outer, with_breaks(a, b, {ang.inner_breakpoint(), 1.0}), AdaptiveOptions{quad_tol, 0.0, 1 << 15});
}

inline cplx eps_integral_flattened(const DomainSpec& d, const DensityVariant& v, double quad_tol) {
    auto density = [&](double x1, double x2, double x3) {
        const std::array<double, 3> x{x1, x2, x3};
        return evaluate_in_flattened_chart(v, x);
    };
    if (const auto* b = std::get_if<Box3D>(&d)) {
        auto outer = [&](double x3) -> cplx {
            auto mid = [&](double x1) -> cplx {
                auto inner = [&](double x2) { return density(x1, x2, x3); };
                return integrate_adaptive(inner, b->x2_lo, b->x2_hi, inner_options()).value;
            };
            return integrate_adaptive(mid, b->x1_lo, b->x1_hi, inner_options()).value;
        };
        return integrate_c(outer, with_breaks(b->x3_lo, b->x3_hi, {0.0}), AdaptiveOptions{quad_tol, 0.0, 1 << 15});
    }
    if (const auto* w = std::get_if<Wedge3D>(&d)) {
        auto outer = [&](double x3) -> cplx {
            auto mid = [&](double x1) -> cplx {
                const double c = polynomial(w->c_coeffs, x1);
                const double dd = polynomial(w->d_coeffs, x1);
                // Oriented from c to c + d x3: the U+ and U- pieces carry opposite signs.
                auto inner = [&](double x2) { return density(x1, x2, x3); };
                return integrate_adaptive(inner, c, c + dd * x3, inner_options()).value;
            };
            return integrate_adaptive(mid, w->x1_lo, w->x1_hi, inner_options()).value;
        };
        return integrate_c(outer, with_breaks(-w->height, w->height, {0.0}), AdaptiveOptions{quad_tol, 0.0, 1 << 15});
    }
    throw unsupported_error(std::string("mu_eps: ") + domain_name(d) +
                            " is a one-sided improper domain; use mu_direct");
}

}  // namespace detail

/// lim_{eps -> 0} of the integral of a regularized density over the domain.
/// The per-eps integrals are iterated adaptive quadratures over the real
/// domain; `trace` receives I(eps_k).
inline QuadratureResult mu_eps(const DomainSpec& d, DensityKind kind, const EpsSchedule& schedule = EpsSchedule::geometric(),
                               double tol = 1e-6, std::vector<cplx>* trace = nullptr) {
    detail::require_positive_tol(tol, "mu_eps");
    if (!is_regularized(kind)) throw std::invalid_argument("mu_eps: density variant must be regularized");
    validate(d);
    const int n = domain_dim(d);
    const double quad_tol = std::max(1e-3 * tol, 1e-12);
    auto integral = [&](double eps) -> cplx {
        const DensityVariant v(kind, n, eps);
        return is_klein_family(d) ? detail::eps_integral_klein(d, v, quad_tol)
                                  : detail::eps_integral_flattened(d, v, quad_tol);
    };
    auto out = eps_limit(integral, schedule, trace);
    if (out.error_estimate > tol) out.converged = false;
    return out;
}

// ---------------------------------------------------------------------------
// Direct integration of one-sided domains

/// Lorentz-side phase of the slice integral for a flattened family.
inline cplx lorentz_phase(int n) { return n == 2 ? cplx(0.0, -1.0) : cplx(1.0, 0.0); }

/// Integral of the exact density over a domain whose closure lies on one
/// side of the light cone. Cone3D and the Hölder families touch x_n = 0; for
/// them the improper integral is truncated at tau = delta 2^{-j}, the growth
/// is classified, and a convergent sequence is extrapolated to tau = 0 in the
/// variable tau^p with p from the fit. Non-convergent truncations set the
/// divergence flag and return the last truncated value.
inline QuadratureResult mu_direct(const DomainSpec& d, double tol = 1e-8, DivergenceProfile* profile = nullptr) {
    detail::require_positive_tol(tol, "mu_direct");
    const SliceFunction f(d);
    const auto [a, b] = f.range();
    const double h = f.singular_height();
    const AdaptiveOptions opt{0.1 * tol, 0.0, 1 << 15};

    const bool improper = std::holds_alternative<Cone3D>(d) || std::holds_alternative<HolderGraph2D>(d) ||
                          std::holds_alternative<HolderGraph3D>(d);
    if (!improper) {
        if (std::holds_alternative<Wedge3D>(d)) throw unsupported_error("mu_direct: Wedge3D straddles x3 = 0");
        bool one_sided = b < h || a > h;
        if (const auto* p = std::get_if<Polygon2D>(&d)) {
            const PolygonAngular ang(*p);
            one_sided = ang.max_radius() < 1.0 || distance_to_polygon(*p, {0.0, 0.0}) > 1.0;
        }
        if (const auto* ball = std::get_if<Ball3D>(&d)) {
            const BallAngular ang(*ball);
            one_sided = ang.outer_breakpoint() < 1.0 ||
                        (ang.center_distance() > ball->radius && ang.inner_breakpoint() > 1.0);
        }
        if (!one_sided) throw std::invalid_argument("mu_direct: domain crosses the light cone");
        auto g = [&](double z) { return f(z); };
        const auto pts = detail::with_breaks(a, b, f.kinks());
        return integrate_adaptive(g, std::span<const double>(pts), opt);
    }

    const int n = domain_dim(d);
    const cplx phase = lorentz_phase(n);
    auto positive = [&](double x) { return (f(x) / phase).real(); };
    const double delta = b;
    const auto cutoffs = default_cutoffs(delta);
    const auto values = truncated_integrals(positive, delta, cutoffs);
    auto prof = classify_growth(cutoffs, values);
    if (profile != nullptr) *profile = prof;

    QuadratureResult out;
    out.evaluations = static_cast<long>(cutoffs.size());
    if (prof.fitted_model != GrowthModel::Convergent) {
        out.value = phase * values.back();
        out.error_estimate = std::numeric_limits<double>::infinity();
        out.converged = false;
        out.divergence_suspected = true;
        return out;
    }
    const std::size_t m = std::min(cutoffs.size(), kFitWindow);
    std::vector<double> x;
    std::vector<cplx> v;
    const double p = prof.exponent > 0.0 ? prof.exponent : 1.0;
    for (std::size_t i = cutoffs.size() - m; i < cutoffs.size(); ++i) {
        x.push_back(std::pow(cutoffs[i], p));
        v.push_back(values[i]);
    }
    const auto ext = extrapolate_to_zero(x, v, 2);
    out.value = phase * ext.value;
    out.error_estimate = ext.error_estimate;
    out.converged = ext.error_estimate <= std::max(tol, 1e-9 * std::abs(ext.value));
    return out;
}

// ---------------------------------------------------------------------------
// Isometry invariance

namespace detail {

inline bool spatial_block(const Isometry& g) {
    const auto& m = g.matrix();
    if (std::abs(m(0, 0) - 1.0) > 1e-12) return false;
    for (int i = 1; i <= g.dim(); ++i) {
        if (std::abs(m(0, i)) > 1e-12 || std::abs(m(i, 0)) > 1e-12) return false;
    }
    return true;
}

}  // namespace detail

/// Image of a domain under an isometry, within the supported families.
inline DomainSpec image_domain(const DomainSpec& d, const Isometry& g) {
    if (g.dim() != domain_dim(d)) throw std::invalid_argument("image_domain: dimension mismatch");
    if (const auto* p = std::get_if<Polygon2D>(&d)) {
        // Coordinate reflections through e_n act on the Klein chart by the
        // same matrix; Lorentz matrices act projectively. Segments stay
        // segments when every vertex keeps a positive time coordinate.
        std::vector<Vec2> out;
        const auto& m = g.matrix();
        for (const auto& v : p->vertices) {
            const double w0 = m(0, 0) + m(0, 1) * v[0] + m(0, 2) * v[1];
            if (!(w0 > 1e-12)) throw unsupported_error("image_domain: polygon image passes through projective infinity");
            out.push_back({(m(1, 0) + m(1, 1) * v[0] + m(1, 2) * v[1]) / w0,
                           (m(2, 0) + m(2, 1) * v[0] + m(2, 2) * v[1]) / w0});
        }
        try {
            DomainSpec img = make_polygon(std::move(out));
            validate(img);
            return img;
        } catch (const std::invalid_argument& e) {
            throw unsupported_error(std::string("image_domain: ") + e.what());
        }
    }
    if (const auto* s = std::get_if<Sector2D>(&d)) {
        if (!detail::spatial_block(g)) throw unsupported_error("image_domain: a sector maps to a sector only under O(2)");
        const auto& m = g.matrix();
        const double det = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
        Sector2D img = *s;
        if (det > 0.0) {
            img.start = s->start + std::atan2(m(2, 1), m(1, 1));
        } else {
            // Reflection theta -> psi - theta.
            const double psi = std::atan2(m(2, 1), m(1, 1));
            img.start = psi - s->start - s->angle;
        }
        return img;
    }
    if (const auto* b = std::get_if<Box3D>(&d)) {
        if (g.kind() != IsometryKind::FlattenedReflection) {
            throw unsupported_error("image_domain: Box3D supports only the coordinate reflections through e_n");
        }
        Box3D img = *b;
        if (g.matrix()(1, 1) < 0.0) img.x1_lo = -b->x1_hi, img.x1_hi = -b->x1_lo;
        if (g.matrix()(2, 2) < 0.0) img.x2_lo = -b->x2_hi, img.x2_hi = -b->x2_lo;
        return img;
    }
    throw unsupported_error(std::string("image_domain: isometry images of ") + domain_name(d) + " are not supported");
}

struct InvarianceResult {
    QuadratureResult mu_u;
    QuadratureResult mu_gu;
    double deviation = 0.0;
    DomainSpec image;
};

inline InvarianceResult mu_invariance_test(const DomainSpec& d, const Isometry& g, double tol = 1e-8) {
    if (!std::holds_alternative<Sector2D>(d) && !std::holds_alternative<Polygon2D>(d) &&
        !std::holds_alternative<Box3D>(d)) {
        throw unsupported_error("mu_invariance_test: domain must be Sector2D, Polygon2D or Box3D");
    }
    InvarianceResult out{{}, {}, 0.0, image_domain(d, g)};
    out.mu_u = mu_contour(d, tol);
    out.mu_gu = mu_contour(out.image, tol);
    out.deviation = std::abs(out.mu_u.value - out.mu_gu.value);
    return out;
}

// ---------------------------------------------------------------------------
// Finite additivity

/// The hyperplane {x : normal . x = offset} of the domain's chart.
struct Hyperplane {
    std::vector<double> normal;
    double offset = 0.0;
};

struct SplitResult {
    std::vector<DomainSpec> positive;  ///< pieces with normal . x >= offset
    std::vector<DomainSpec> negative;
};

namespace detail {

inline std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, Vec2 nrm, double off, double sign) {
    std::vector<Vec2> out;
    auto side = [&](const Vec2& p) { return sign * (nrm[0] * p[0] + nrm[1] * p[1] - off); };
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        const double sp = side(p);
        const double sq = side(q);
        if (sp >= 0.0) out.push_back(p);
        if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
            const double t = sp / (sp - sq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

inline bool is_convex(const std::vector<Vec2>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        const Vec2& c = v[(i + 2) % v.size()];
        if ((b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) < -1e-14) return false;
    }
    return true;
}

}  // namespace detail

inline SplitResult split_domain(const DomainSpec& d, const Hyperplane& hp) {
    const int n = domain_dim(d);
    if (static_cast<int>(hp.normal.size()) != n) throw std::invalid_argument("split_domain: normal has the wrong length");
    SplitResult out;
    if (const auto* s = std::get_if<Sector2D>(&d)) {
        if (std::abs(hp.offset) > 1e-15) throw unsupported_error("split_domain: sectors split only by lines through the origin");
        const double pi = std::numbers::pi;
        const double phi = std::atan2(hp.normal[0], -hp.normal[1]);  // direction of the line
        Sector2D base = *s;
        std::vector<double> cuts;
        if (s->angle >= 2.0 * pi - 1e-15) {
            base.start = phi;
            cuts = {phi + pi};
        } else {
            for (double c : {phi, phi + pi}) {
                double t = std::fmod(c - s->start, 2.0 * pi);
                if (t < 0.0) t += 2.0 * pi;
                if (t > 1e-12 && t < s->angle - 1e-12) cuts.push_back(s->start + t);
            }
            std::sort(cuts.begin(), cuts.end());
        }
        double prev = base.start;
        cuts.push_back(base.start + base.angle);
        for (double c : cuts) {
            Sector2D piece = base;
            piece.start = prev;
            piece.angle = c - prev;
            const double mid = prev + 0.5 * piece.angle;
            const double sd = hp.normal[0] * std::cos(mid) + hp.normal[1] * std::sin(mid);
            (sd >= 0.0 ? out.positive : out.negative).push_back(piece);
            prev = c;
        }
        return out;
    }
    if (const auto* p = std::get_if<Polygon2D>(&d)) {
        if (!detail::is_convex(p->vertices)) throw unsupported_error("split_domain: polygon splitting needs a convex polygon");
        const Vec2 nrm{hp.normal[0], hp.normal[1]};
        for (double sign : {1.0, -1.0}) {
            auto piece = detail::clip_half_plane(p->vertices, nrm, hp.offset, sign);
            if (piece.size() >= 3 && std::abs(signed_area(piece)) > 1e-14) {
                (sign > 0.0 ? out.positive : out.negative).push_back(make_polygon(std::move(piece)));
            }
        }
        return out;
    }
    if (const auto* b = std::get_if<Box3D>(&d)) {
        int axis = -1;
        for (int i = 0; i < 3; ++i) {
            if (hp.normal[i] != 0.0) {
                if (axis >= 0) throw unsupported_error("split_domain: Box3D splits only along x1 or x2");
                axis = i;
            }
        }
        if (axis < 0 || axis == 2) throw unsupported_error("split_domain: Box3D splits only along x1 or x2");
        const double cut = hp.offset / hp.normal[axis];
        Box3D lo = *b;
        Box3D hi = *b;
        double& lo_end = axis == 0 ? lo.x1_hi : lo.x2_hi;
        double& hi_start = axis == 0 ? hi.x1_lo : hi.x2_lo;
        const double from = axis == 0 ? b->x1_lo : b->x2_lo;
        const double to = axis == 0 ? b->x1_hi : b->x2_hi;
        if (!(cut > from && cut < to)) throw std::invalid_argument("split_domain: hyperplane misses the box");
        lo_end = cut;
        hi_start = cut;
        const bool hi_positive = hp.normal[axis] > 0.0;
        (hi_positive ? out.positive : out.negative).push_back(hi);
        (hi_positive ? out.negative : out.positive).push_back(lo);
        return out;
    }
    throw unsupported_error(std::string("split_domain: splitting ") + domain_name(d) + " is not supported");
}

struct AdditivityResult {
    QuadratureResult whole;
    cplx parts_sum;
    double deviation = 0.0;
    std::size_t piece_count = 0;
};

inline AdditivityResult additivity_test(const DomainSpec& d, const Hyperplane& hp, double tol = 1e-8) {
    const auto split = split_domain(d, hp);
    AdditivityResult out;
    out.whole = mu_contour(d, tol);
    for (const auto* side : {&split.positive, &split.negative}) {
        for (const auto& piece : *side) {
            out.parts_sum += mu_contour(piece, tol).value;
            ++out.piece_count;
        }
    }
    out.deviation = std::abs(out.whole.value - out.parts_sum);
    return out;
}

}  // namespace xhyp
