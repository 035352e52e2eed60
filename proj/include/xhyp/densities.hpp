#pragma once

// Volume-form densities of the extended hyperbolic space and their
// epsilon regularizations, in the Klein chart and in the flattened chart.
//
// Branch rule: fractional powers use the principal branch, arg in (-pi, pi].
// A negative real base is read as the limit from Im < 0 (arg = -pi). With
// this single rule the Lorentz side of the Klein density carries i^{n+1}
// and (-x_n)^{(n+1)/2} evaluates to (-i)^{n+1} x_n^{(n+1)/2} for x_n > 0.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xhyp/errors.hpp"
#include "xhyp/geometry.hpp"

namespace xhyp {

using cplx = std::complex<double>;

enum class DensityKind { KleinExact, KleinEps, FlattenedExact, FlattenedEps, MuEps };

inline const char* to_string(DensityKind k) {
    switch (k) {
        case DensityKind::KleinExact: return "klein-exact";
        case DensityKind::KleinEps: return "klein-eps";
        case DensityKind::FlattenedExact: return "flattened-exact";
        case DensityKind::FlattenedEps: return "flattened-eps";
        case DensityKind::MuEps: return "mu-eps";
    }
    return "?";
}

inline DensityKind density_kind_from_string(const std::string& s) {
    for (auto k : {DensityKind::KleinExact, DensityKind::KleinEps, DensityKind::FlattenedExact,
                   DensityKind::FlattenedEps, DensityKind::MuEps}) {
        if (s == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown density variant '" + s + "'");
}

inline bool is_regularized(DensityKind k) {
    return k == DensityKind::KleinEps || k == DensityKind::FlattenedEps || k == DensityKind::MuEps;
}

inline bool is_flattened(DensityKind k) {
    return k == DensityKind::FlattenedExact || k == DensityKind::FlattenedEps || k == DensityKind::MuEps;
}

struct DensityVariant {
    DensityKind kind = DensityKind::KleinExact;
    double eps = 0.0;
    int dim = 2;

    DensityVariant(DensityKind k, int n, double e = 0.0) : kind(k), eps(e), dim(n) {
        if (n != 2 && n != 3) throw std::invalid_argument("DensityVariant: dimension must be 2 or 3");
        if (is_regularized(k) && !(e > 0.0)) throw std::invalid_argument("DensityVariant: eps must be positive");
    }
};

/// Densities closer than this to their singular set raise singular_point_error.
inline constexpr double kSingularGuard = 1e-12;

inline cplx finite_or_throw(cplx v, const char* where) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw numerical_error(std::string(where) + ": non-finite value");
    }
    return v;
}

/// w^p with the lower-limit reading of the negative real axis.
inline cplx lower_pow(cplx w, double p) {
    if (w.imag() == 0.0 && w.real() < 0.0) {
        return std::polar(std::pow(-w.real(), p), -std::numbers::pi * p);
    }
    return std::pow(w, p);
}

namespace detail {

inline double half_power(int n) { return 0.5 * (n + 1); }

inline double transverse_norm2(std::span<const double> t) {
    double s = 0.0;
    for (double v : t) s += v * v;
    return s;
}

inline cplx flattened_alpha(std::span<const double> transverse, cplx xn) {
    const cplx d = xn - 1.0;
    return transverse_norm2(transverse) + d * d;
}

inline void require_transverse(std::span<const double> t, int n) {
    if (static_cast<int>(t.size()) != n - 1) {
        throw std::invalid_argument("density: expected " + std::to_string(n - 1) + " transverse coordinates");
    }
}

}  // namespace detail

/// (1 - r^2)^{-(n+1)/2} at a complexified Klein radius r.
inline cplx density_klein_radial(cplx r, int n) {
    const cplx base = 1.0 - r * r;
    if (std::abs(base) < kSingularGuard) throw singular_point_error("density_klein_exact: point on the light cone");
    return finite_or_throw(lower_pow(base, -detail::half_power(n)), "density_klein_exact");
}

inline cplx density_klein_exact(std::span<const double> x, int n) {
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("density_klein_exact: wrong coordinate count");
    const double r2 = detail::transverse_norm2(x);
    const double base = 1.0 - r2;
    if (std::abs(base) < kSingularGuard) throw singular_point_error("density_klein_exact: point on the light cone");
    return lower_pow(cplx(base, 0.0), -detail::half_power(n));
}

/// d_eps (d_eps^2 - r^2)^{-(n+1)/2} with d_eps = 1 - eps i, as a function of r^2.
inline cplx density_klein_eps_r2(cplx r2, int n, double eps) {
    const cplx d(1.0, -eps);
    const cplx base = d * d - r2;
    if (std::abs(base) < kSingularGuard) throw numerical_error("density_klein_eps: vanishing denominator");
    return finite_or_throw(d * std::pow(base, -detail::half_power(n)), "density_klein_eps");
}

inline cplx density_klein_eps(std::span<const double> x, int n, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("density_klein_eps: eps must be positive");
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("density_klein_eps: wrong coordinate count");
    return density_klein_eps_r2(detail::transverse_norm2(x), n, eps);
}

/// 1 / (2 (-x_n)^{(n+1)/2} alpha^{(n-1)/2}), orientation sign dropped.
inline cplx density_flattened_exact(std::span<const double> transverse, cplx xn, int n) {
    detail::require_transverse(transverse, n);
    if (std::abs(xn) < kSingularGuard) throw singular_point_error("density_flattened_exact: x_n = 0");
    const cplx alpha = detail::flattened_alpha(transverse, xn);
    if (std::abs(alpha) < kSingularGuard) throw singular_point_error("density_flattened_exact: point is e_n");
    const cplx lead = lower_pow(-xn, detail::half_power(n));
    const cplx tail = n == 3 ? alpha : std::pow(alpha, 0.5 * (n - 1));
    return finite_or_throw(1.0 / (2.0 * lead * tail), "density_flattened_exact");
}

/// Pullback of the Klein eps-density through the Cayley map, overall sign dropped.
inline cplx density_flattened_eps(std::span<const double> transverse, cplx xn, int n, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("density_flattened_eps: eps must be positive");
    detail::require_transverse(transverse, n);
    const cplx alpha = detail::flattened_alpha(transverse, xn);
    if (std::abs(alpha) < kSingularGuard) throw singular_point_error("density_flattened_eps: point is e_n");
    const cplx c(-0.25 * eps * eps, -0.5 * eps);
    const cplx base = c * alpha - xn;
    if (std::abs(base) < kSingularGuard) throw singular_point_error("density_flattened_eps: vanishing denominator");
    const cplx tail = n == 3 ? alpha : std::pow(alpha, 0.5 * (n - 1));
    const cplx d(1.0, -eps);
    return finite_or_throw(d / (2.0 * std::pow(base, detail::half_power(n)) * tail), "density_flattened_eps");
}

/// 1 / (2 (-x_n - eps i)^{(n+1)/2} alpha^{(n-1)/2}).
inline cplx density_mu_eps(std::span<const double> transverse, cplx xn, int n, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("density_mu_eps: eps must be positive");
    detail::require_transverse(transverse, n);
    const cplx alpha = detail::flattened_alpha(transverse, xn);
    if (std::abs(alpha) < kSingularGuard) throw singular_point_error("density_mu_eps: point is e_n");
    const cplx base = -xn - cplx(0.0, eps);
    if (std::abs(base) < kSingularGuard) throw singular_point_error("density_mu_eps: vanishing denominator");
    const cplx tail = n == 3 ? alpha : std::pow(alpha, 0.5 * (n - 1));
    return finite_or_throw(1.0 / (2.0 * std::pow(base, detail::half_power(n)) * tail), "density_mu_eps");
}

/// Evaluate a variant at a real chart point (Klein variants take Klein
/// coordinates, the others flattened coordinates).
inline cplx evaluate(const DensityVariant& v, std::span<const double> x) {
    if (static_cast<int>(x.size()) != v.dim) throw std::invalid_argument("evaluate: wrong coordinate count");
    const auto transverse = x.first(x.size() - 1);
    const double xn = x.back();
    switch (v.kind) {
        case DensityKind::KleinExact: return density_klein_exact(x, v.dim);
        case DensityKind::KleinEps: return density_klein_eps(x, v.dim, v.eps);
        case DensityKind::FlattenedExact: return density_flattened_exact(transverse, xn, v.dim);
        case DensityKind::FlattenedEps: return density_flattened_eps(transverse, xn, v.dim, v.eps);
        case DensityKind::MuEps: return density_mu_eps(transverse, xn, v.dim, v.eps);
    }
    throw std::logic_error("evaluate: unknown density kind");
}

/// Evaluate a flattened-chart variant at a Klein point y through the Cayley
/// map: density(sigma(y)) * |det D sigma(y)|. Klein variants are evaluated
/// directly.
inline cplx evaluate_in_klein_chart(const DensityVariant& v, std::span<const double> y) {
    if (!is_flattened(v.kind)) return evaluate(v, y);
    std::array<double, 3> x{};
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i];
    const std::span<double> xs(x.data(), y.size());
    const double jac = cayley_jacobian(y);
    cayley_inplace(xs);
    return evaluate(v, xs) * jac;
}

/// Evaluate a Klein-chart variant at a flattened point x through the Cayley map.
inline cplx evaluate_in_flattened_chart(const DensityVariant& v, std::span<const double> x) {
    if (is_flattened(v.kind)) return evaluate(v, x);
    std::array<double, 3> y{};
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i];
    const std::span<double> ys(y.data(), x.size());
    const double jac = cayley_jacobian(x);
    cayley_inplace(ys);
    return evaluate(v, ys) * jac;
}

/// A root of the denominator of a regularized flattened density, viewed as a
/// function of complex x_n with the transverse coordinates held real.
struct XnPole {
    cplx value;
    /// True for the root that tends to the real x_n-line as eps -> 0. The
    /// other root of the FlattenedEps quadratic is the image of the Klein pole
    /// r = -d_eps; it lies at |x_n| > 8 / (eps (eps^2 + 4)), outside any
    /// flattened domain with |x_n| < 1.
    bool on_chart = true;
};

/// Both roots of the FlattenedEps denominator (c alpha - x_n, c = (-eps^2 - 2 eps i)/4),
/// or the single MuEps root -eps i.
inline std::vector<XnPole> denominator_roots_in_xn(const DensityVariant& v, std::span<const double> transverse) {
    detail::require_transverse(transverse, v.dim);
    if (v.kind == DensityKind::MuEps) return {{cplx(0.0, -v.eps), true}};
    if (v.kind != DensityKind::FlattenedEps) {
        throw std::invalid_argument("poles_in_xn: variant must be mu-eps or flattened-eps");
    }
    const double eps = v.eps;
    const double rho2 = detail::transverse_norm2(transverse);
    const cplx c(-0.25 * eps * eps, -0.5 * eps);
    // c x^2 - (2c + 1) x + c (1 + rho^2) = 0. The discriminant has Im < 0 for
    // every eps > 0, so the principal root never crosses its cut and the
    // labelling below is continuous over the whole parameter set.
    const cplx b = 2.0 * c + 1.0;
    const cplx disc = b * b - 4.0 * c * c * (1.0 + rho2);
    const cplx sq = std::sqrt(disc);
    const cplx far = (b + sq) / (2.0 * c);
    const cplx near = 2.0 * c * (1.0 + rho2) / (b + sq);
    return {{near, true}, {far, false}};
}

/// Poles of the regularized density in x_n on the chart sheet.
inline std::vector<cplx> poles_in_xn(const DensityVariant& v, std::span<const double> transverse) {
    std::vector<cplx> out;
    for (const auto& p : denominator_roots_in_xn(v, transverse)) {
        if (p.on_chart) out.push_back(p.value);
    }
    return out;
}

}  // namespace xhyp
