#pragma once

// Oriented complex paths made of line segments and circular arcs, path
// integration, and continuous branch tracking of fractional powers along a
// path.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "xhyp/errors.hpp"
#include "xhyp/quadrature.hpp"

namespace xhyp {

struct LineSegment {
    cplx start;
    cplx end;
};

struct ArcSegment {
    cplx center;
    double radius;
    double angle_start;
    double angle_end;
};

using Segment = std::variant<LineSegment, ArcSegment>;

inline cplx segment_point(const Segment& s, double t) {
    if (const auto* l = std::get_if<LineSegment>(&s)) return l->start + (l->end - l->start) * t;
    const auto& a = std::get<ArcSegment>(s);
    const double th = a.angle_start + (a.angle_end - a.angle_start) * t;
    return a.center + std::polar(a.radius, th);
}

inline cplx segment_derivative(const Segment& s, double t) {
    if (const auto* l = std::get_if<LineSegment>(&s)) return l->end - l->start;
    const auto& a = std::get<ArcSegment>(s);
    const double dth = a.angle_end - a.angle_start;
    const double th = a.angle_start + dth * t;
    return cplx(0.0, 1.0) * a.radius * dth * std::polar(1.0, th);
}

/// A path from a to b along the real axis with upper semicircular detours
/// of radius `detour_radius` around each listed singularity.
class Contour {
public:
    Contour(std::vector<Segment> segments, double detour_radius)
        : segments_(std::move(segments)), detour_radius_(detour_radius) {
        if (segments_.empty()) throw std::invalid_argument("Contour: no segments");
        for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
            const cplx e = segment_point(segments_[i], 1.0);
            const cplx s = segment_point(segments_[i + 1], 0.0);
            if (std::abs(e - s) > 1e-12 * std::max(1.0, std::abs(e))) {
                throw std::invalid_argument("Contour: consecutive segments do not share endpoints");
            }
        }
    }

    const std::vector<Segment>& segments() const { return segments_; }
    double detour_radius() const { return detour_radius_; }
    std::size_t size() const { return segments_.size(); }
    cplx start() const { return segment_point(segments_.front(), 0.0); }
    cplx end() const { return segment_point(segments_.back(), 1.0); }

    /// Point at global parameter s in [0, size()]; segment i covers [i, i+1].
    cplx point(double s) const {
        const auto [i, t] = locate(s);
        return segment_point(segments_[i], t);
    }

    /// Copy with real line segments split at the given real breakpoints.
    Contour split_at(const std::vector<double>& cuts) const {
        std::vector<Segment> out;
        for (const auto& seg : segments_) {
            const auto* l = std::get_if<LineSegment>(&seg);
            if (l == nullptr || l->start.imag() != 0.0 || l->end.imag() != 0.0) {
                out.push_back(seg);
                continue;
            }
            const double a = l->start.real();
            const double b = l->end.real();
            std::vector<double> inner;
            for (double c : cuts) {
                if (c > std::min(a, b) && c < std::max(a, b)) inner.push_back(c);
            }
            std::sort(inner.begin(), inner.end());
            if (a > b) std::reverse(inner.begin(), inner.end());
            double prev = a;
            for (double c : inner) {
                out.push_back(LineSegment{prev, c});
                prev = c;
            }
            out.push_back(LineSegment{prev, b});
        }
        return {std::move(out), detour_radius_};
    }

private:
    std::pair<std::size_t, double> locate(double s) const {
        const double n = static_cast<double>(segments_.size());
        s = std::clamp(s, 0.0, n);
        std::size_t i = std::min(static_cast<std::size_t>(s), segments_.size() - 1);
        return {i, s - static_cast<double>(i)};
    }

    std::vector<Segment> segments_;
    double detour_radius_;
};

/// Real segments from a to b joined by upper semicircles (angle pi -> 0) of
/// radius delta around each singularity. Degenerate segments are dropped.
inline Contour build_contour(double a, double b, std::vector<double> singularities, double delta) {
    if (!(a < b)) throw std::invalid_argument("build_contour: need a < b");
    std::sort(singularities.begin(), singularities.end());
    if (!singularities.empty() && !(delta > 0.0)) throw std::invalid_argument("build_contour: delta must be positive");
    for (std::size_t i = 0; i < singularities.size(); ++i) {
        const double s = singularities[i];
        if (!(s > a && s < b)) throw std::invalid_argument("build_contour: singularity outside (a, b)");
        if (s - delta < a - 1e-15 || s + delta > b + 1e-15) {
            throw std::invalid_argument("build_contour: detour radius too large for the distance to the endpoints");
        }
        if (i > 0 && !(s - singularities[i - 1] > 2.0 * delta)) {
            throw std::invalid_argument("build_contour: detour radius too large for the singularity separation");
        }
    }
    std::vector<Segment> segs;
    double cursor = a;
    for (double s : singularities) {
        const double left = s - delta;
        if (left - cursor > 1e-15) segs.emplace_back(LineSegment{cursor, left});
        segs.emplace_back(ArcSegment{s, delta, std::numbers::pi, 0.0});
        cursor = s + delta;
    }
    if (b - cursor > 1e-15) segs.emplace_back(LineSegment{cursor, b});
    return {std::move(segs), delta};
}

/// Integrate f along the contour. f may take (z) or (z, s) where s is the
/// global path parameter. The tolerance is split evenly between segments.
template <class F>
QuadratureResult integrate_path(F&& f, const Contour& c, double tol, int max_intervals = 1 << 15) {
    QuadratureResult total;
    const AdaptiveOptions opt{tol / static_cast<double>(c.size()), 0.0, max_intervals};
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Segment& seg = c.segments()[i];
        auto g = [&](double t) -> cplx {
            const cplx z = segment_point(seg, t);
            cplx v;
            if constexpr (std::is_invocable_v<F&, cplx, double>) {
                v = f(z, static_cast<double>(i) + t);
            } else {
                v = f(z);
            }
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                std::ostringstream os;
                os.precision(17);
                os << "integrate_path: non-finite integrand at z = " << z;
                throw numerical_error(os.str());
            }
            return v * segment_derivative(seg, t);
        };
        const auto r = integrate_adaptive(g, 0.0, 1.0, opt);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
        total.converged = total.converged && r.converged;
    }
    return total;
}

/// base(z)^{-exponent} continued along a contour. The argument of the base
/// is unwrapped on a reference table whose consecutive samples differ by at
/// most pi/4; evaluation snaps the principal argument to the nearest sheet.
class TrackedPower {
public:
    using Base = std::function<cplx(cplx)>;

    TrackedPower(Base base, double exponent, const Contour& c) : base_(std::move(base)), exponent_(exponent), contour_(c) {
        constexpr int kInitial = 64;
        double prev_arg = start_arg(base_(contour_.point(0.0)));
        params_.push_back(0.0);
        args_.push_back(prev_arg);
        for (std::size_t i = 0; i < contour_.size(); ++i) {
            for (int k = 1; k <= kInitial; ++k) {
                const double s0 = params_.back();
                const double s1 = static_cast<double>(i) + static_cast<double>(k) / kInitial;
                refine(s0, s1, 0);
            }
        }
    }

    /// Unwrapped argument of the base at global parameter s.
    double tracked_arg(cplx z, double s) const {
        const cplx b = base_(z);
        if (b == cplx(0.0, 0.0)) throw singular_point_error("TrackedPower: base vanishes on the contour");
        const double ref = reference_arg(s);
        const double p = std::arg(b);
        const double k = std::round((ref - p) / (2.0 * std::numbers::pi));
        return p + 2.0 * std::numbers::pi * k;
    }

    cplx operator()(cplx z, double s) const {
        const cplx b = base_(z);
        const double th = tracked_arg(z, s);
        return std::polar(std::pow(std::abs(b), -exponent_), -exponent_ * th);
    }

    std::size_t table_size() const { return params_.size(); }

private:
    // Principal argument, with a negative real base read from Im < 0.
    static double start_arg(cplx b) {
        if (b.imag() == 0.0 && b.real() < 0.0) return -std::numbers::pi;
        return std::arg(b);
    }

    static double wrap(double d) {
        while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
        while (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
        return d;
    }

    void refine(double s0, double s1, int depth) {
        const cplx b1 = base_(contour_.point(s1));
        if (b1 == cplx(0.0, 0.0)) throw singular_point_error("TrackedPower: base vanishes on the contour");
        const double step = wrap(std::arg(b1) - std::arg(base_(contour_.point(s0))));
        if (std::abs(step) > std::numbers::pi / 4.0) {
            constexpr int kMaxDepth = 40;
            if (depth >= kMaxDepth) {
                if (std::abs(step) > std::numbers::pi / 2.0) {
                    std::ostringstream os;
                    os << "TrackedPower: argument jump " << step << " near path parameter " << s1
                       << " persists after refinement";
                    throw numerical_error(os.str());
                }
            } else {
                const double mid = 0.5 * (s0 + s1);
                refine(s0, mid, depth + 1);
                refine(mid, s1, depth + 1);
                return;
            }
        }
        params_.push_back(s1);
        args_.push_back(args_.back() + step);
    }

    double reference_arg(double s) const {
        auto it = std::upper_bound(params_.begin(), params_.end(), s);
        if (it == params_.begin()) return args_.front();
        if (it == params_.end()) return args_.back();
        const std::size_t j = static_cast<std::size_t>(it - params_.begin());
        const double w = (s - params_[j - 1]) / (params_[j] - params_[j - 1]);
        return args_[j - 1] + w * (args_[j] - args_[j - 1]);
    }

    Base base_;
    double exponent_;
    Contour contour_;
    std::vector<double> params_;
    std::vector<double> args_;
};

inline TrackedPower tracked_power_integrand(TrackedPower::Base base, double exponent, const Contour& c) {
    return TrackedPower(std::move(base), exponent, c);
}

struct DeformationCheck {
    bool pass = false;
    double spread = 0.0;
    std::vector<cplx> values;
};

/// Integrate over build_contour(a, b, singularities, delta) for every delta
/// and compare. Analytic integrands give delta-independent values.
/// If `make_integrand` is invocable with a Contour it is called per contour
/// (needed for tracked integrands); otherwise it is used as the integrand.
template <class F>
DeformationCheck deformation_check(F&& f, double a, double b, const std::vector<double>& singularities,
                                   const std::vector<double>& deltas, double tol) {
    DeformationCheck out;
    for (double d : deltas) {
        const Contour c = build_contour(a, b, singularities, d);
        if constexpr (std::is_invocable_v<F&, const Contour&>) {
            auto g = f(c);
            out.values.push_back(integrate_path(g, c, 0.01 * tol).value);
        } else {
            out.values.push_back(integrate_path(f, c, 0.01 * tol).value);
        }
    }
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        for (std::size_t j = i + 1; j < out.values.size(); ++j) {
            out.spread = std::max(out.spread, std::abs(out.values[i] - out.values[j]));
        }
    }
    out.pass = out.spread <= tol;
    return out;
}

}  // namespace xhyp
