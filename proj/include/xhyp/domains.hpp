#pragma once

// Parametrized integration domains. Sector2D, Polygon2D and Ball3D live in
// the Klein chart; the other families live in the flattened chart, where the
// light cone is the hyperplane x_n = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "xhyp/errors.hpp"

namespace xhyp {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Angular sector {r in [inner, outer], theta in [start, start + angle]} of K^2.
struct Sector2D {
    double angle = 2.0 * std::numbers::pi;
    double outer = std::numbers::sqrt2;
    double inner = 0.0;
    double start = 0.0;
};

/// Simple polygon in K^2; vertices are stored counter-clockwise.
struct Polygon2D {
    std::vector<Vec2> vertices;
};

/// {0 <= x2 <= height, 0 <= x1 <= coeff * x2^beta} in E^2 (Lorentz side).
struct HolderGraph2D {
    double beta = 0.6;
    double coeff = 1.0;
    double height = 0.5;
};

/// Rectangle times a height interval in E^3.
struct Box3D {
    double x1_lo = -0.5;
    double x1_hi = 0.5;
    double x2_lo = -0.5;
    double x2_hi = 0.5;
    double x3_lo = -0.5;
    double x3_hi = 0.5;
};

/// Signed wedge pair U+ minus U- in E^3: a <= x1 <= b, |x3| <= height and x2
/// between c(x1) and c(x1) + d(x1) x3, with the inner x2-integral oriented
/// from c to c + d x3. Polynomial coefficients are lowest degree first.
struct Wedge3D {
    double x1_lo = -0.5;
    double x1_hi = 0.5;
    std::vector<double> c_coeffs{0.0};
    std::vector<double> d_coeffs{1.0};
    double height = 0.5;
};

/// Cone {0 <= x3 <= height, x3 >= slope * sqrt(x1^2 + x2^2)} in E^3.
struct Cone3D {
    double slope = 1.0;
    double height = 1e-3;
};

enum class GraphProfile { Power, LogRatio };

/// {a <= x1 <= b, 0 < x3 <= height, 0 <= x2 <= g(x3)} in E^3 with
/// g = coeff * x3^{1 + alpha} (Power) or g = -x3 / log x3 (LogRatio).
struct HolderGraph3D {
    GraphProfile profile = GraphProfile::Power;
    double alpha = 0.5;
    double coeff = 1.0;
    double x1_lo = 0.0;
    double x1_hi = 1.0;
    double height = 0.5;

    double g(double x3) const {
        if (profile == GraphProfile::LogRatio) return -x3 / std::log(x3);
        return coeff * std::pow(x3, 1.0 + alpha);
    }
};

/// Euclidean ball in K^3.
struct Ball3D {
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 0.5;
};

using DomainSpec = std::variant<Sector2D, Polygon2D, HolderGraph2D, Box3D, Wedge3D, Cone3D, HolderGraph3D, Ball3D>;

inline int domain_dim(const DomainSpec& d) {
    return std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sector2D> || std::is_same_v<T, Polygon2D> ||
                          std::is_same_v<T, HolderGraph2D>) {
                return 2;
            } else {
                return 3;
            }
        },
        d);
}

inline const char* domain_name(const DomainSpec& d) {
    static constexpr std::array<const char*, 8> names{"Sector2D", "Polygon2D", "HolderGraph2D", "Box3D",
                                                      "Wedge3D",  "Cone3D",    "HolderGraph3D", "Ball3D"};
    return names[d.index()];
}

inline bool is_klein_family(const DomainSpec& d) {
    return std::holds_alternative<Sector2D>(d) || std::holds_alternative<Polygon2D>(d) ||
           std::holds_alternative<Ball3D>(d);
}

inline double polynomial(const std::vector<double>& coeffs, double x) {
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
    return v;
}

inline double signed_area(const std::vector<Vec2>& v) {
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % v.size()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
}

/// Polygon with vertices reordered counter-clockwise.
inline Polygon2D make_polygon(std::vector<Vec2> vertices) {
    if (vertices.size() < 3) throw std::invalid_argument("Polygon2D: need at least three vertices");
    const double a = signed_area(vertices);
    if (std::abs(a) < 1e-14) throw std::invalid_argument("Polygon2D: degenerate polygon");
    if (a < 0.0) std::reverse(vertices.begin(), vertices.end());
    return Polygon2D{std::move(vertices)};
}

inline Box3D make_box(double x1_lo, double x1_hi, double x2_lo, double x2_hi, double delta) {
    return Box3D{x1_lo, x1_hi, x2_lo, x2_hi, -delta, delta};
}

inline bool point_in_polygon(const Polygon2D& p, double x, double y) {
    bool inside = false;
    const auto& v = p.vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i][1] > y) != (v[j][1] > y)) {
            const double xc = v[j][0] + (y - v[j][1]) * (v[i][0] - v[j][0]) / (v[i][1] - v[j][1]);
            if (x < xc) inside = !inside;
        }
    }
    return inside;
}

inline double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    const double l2 = dx * dx + dy * dy;
    double t = l2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

/// Euclidean distance from a point to the closed polygon (0 inside).
inline double distance_to_polygon(const Polygon2D& poly, Vec2 p) {
    if (point_in_polygon(poly, p[0], p[1])) return 0.0;
    double d = std::numeric_limits<double>::infinity();
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) d = std::min(d, distance_to_segment(p, v[i], v[(i + 1) % v.size()]));
    return d;
}

/// Angular measure of the polygon on circles about the origin,
///   Theta(r) = |{theta : r e^{i theta} in P}|,
/// and its analytic continuation to complex r near r = 1.
class PolygonAngular {
public:
    explicit PolygonAngular(Polygon2D poly) : poly_(std::move(poly)) {
        const auto& v = poly_.vertices;
        for (const auto& p : v) {
            const double r = std::hypot(p[0], p[1]);
            vertex_radii_.push_back(r);
            if (std::abs(r - 1.0) < 1e-6) throw std::invalid_argument("Polygon2D: vertex on the unit circle");
        }
        analytic_radius_ = std::numeric_limits<double>::infinity();
        for (double r : vertex_radii_) analytic_radius_ = std::min(analytic_radius_, std::abs(r - 1.0));
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Vec2 a = v[i];
            const Vec2 b = v[(i + 1) % v.size()];
            const double dx = b[0] - a[0];
            const double dy = b[1] - a[1];
            const double l2 = dx * dx + dy * dy;
            const double t = -(a[0] * dx + a[1] * dy) / l2;
            if (t > 0.0 && t < 1.0) {
                const double h = std::abs(a[0] * dy - a[1] * dx) / std::sqrt(l2);
                if (std::abs(h - 1.0) < 1e-6) throw std::invalid_argument("Polygon2D: edge tangent to the unit circle");
                analytic_radius_ = std::min(analytic_radius_, std::abs(1.0 - h));
            }
        }
        build_continuation();
    }

    const Polygon2D& polygon() const { return poly_; }
    const std::vector<double>& vertex_radii() const { return vertex_radii_; }
    double max_radius() const { return *std::max_element(vertex_radii_.begin(), vertex_radii_.end()); }

    /// Radius of the disk about r = 1 on which theta(z) is analytic.
    double analytic_radius() const { return analytic_radius_; }

    /// Inside arcs [theta_a, theta_b] of the circle of radius r; theta_b may exceed 2 pi.
    std::vector<std::pair<double, double>> arcs(double r) const {
        const auto xs = crossings(r);
        std::vector<std::pair<double, double>> out;
        if (xs.empty()) {
            if (r > 0.0 && point_in_polygon(poly_, r, 0.0)) out.emplace_back(0.0, 2.0 * std::numbers::pi);
            return out;
        }
        const std::size_t m = xs.size();
        for (std::size_t i = 0; i < m; ++i) {
            if (xs[i].exit) continue;
            const std::size_t j = (i + 1) % m;
            double end = xs[j].angle;
            if (j <= i) end += 2.0 * std::numbers::pi;
            out.emplace_back(xs[i].angle, end);
        }
        return out;
    }

    double theta(double r) const {
        if (r <= 0.0) {
            // Interior angle at the origin, or 2 pi / 0.
            return theta(1e-9 * std::max(1.0, max_radius()));
        }
        double s = 0.0;
        for (const auto& [a, b] : arcs(r)) s += b - a;
        return s;
    }

    /// Continuation of theta(r) into |z - 1| < analytic_radius().
    cplx theta(cplx z) const {
        if (z.imag() == 0.0) return theta(z.real());
        if (std::abs(z - 1.0) >= analytic_radius_) {
            throw std::domain_error("PolygonAngular: complex radius outside the analyticity disk");
        }
        cplx s = theta_at_one_;
        for (const auto& t : terms_) s += t.weight * (std::acos(t.h / z) - std::acos(t.h));
        return s;
    }

private:
    struct Crossing {
        double angle;
        bool exit;
        double h;
        double foot_angle;
    };

    std::vector<Crossing> crossings(double r) const {
        std::vector<Crossing> xs;
        const auto& v = poly_.vertices;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Vec2 a = v[i];
            const Vec2 b = v[(i + 1) % v.size()];
            const double dx = b[0] - a[0];
            const double dy = b[1] - a[1];
            const double qa = dx * dx + dy * dy;
            const double qb = a[0] * dx + a[1] * dy;
            const double qc = a[0] * a[0] + a[1] * a[1] - r * r;
            const double disc = qb * qb - qa * qc;
            if (disc <= 0.0) continue;
            const double sq = std::sqrt(disc);
            const double h = std::abs(a[0] * dy - a[1] * dx) / std::sqrt(qa);
            const double tf = -qb / qa;
            const double foot = std::atan2(a[1] + tf * dy, a[0] + tf * dx);
            for (double t : {(-qb - sq) / qa, (-qb + sq) / qa}) {
                if (!(t >= 0.0 && t < 1.0)) continue;
                const double px = a[0] + t * dx;
                const double py = a[1] + t * dy;
                double ang = std::atan2(py, px);
                if (ang < 0.0) ang += 2.0 * std::numbers::pi;
                // Outward normal of a counter-clockwise edge is (dy, -dx).
                const bool exit = (-py) * dy + px * (-dx) > 0.0;
                xs.push_back({ang, exit, h, foot});
            }
        }
        std::sort(xs.begin(), xs.end(), [](const Crossing& l, const Crossing& r) { return l.angle < r.angle; });
        return xs;
    }

    void build_continuation() {
        theta_at_one_ = theta(1.0);
        for (const auto& c : crossings(1.0)) {
            const double sign_exit = c.exit ? 1.0 : -1.0;
            if (c.h < 1e-12) continue;  // line through the origin: constant angle
            const double base = std::acos(c.h);
            auto dist = [](double x, double y) {
                double d = std::fmod(std::abs(x - y), 2.0 * std::numbers::pi);
                return std::min(d, 2.0 * std::numbers::pi - d);
            };
            const double branch = dist(c.angle, c.foot_angle + base) <= dist(c.angle, c.foot_angle - base) ? 1.0 : -1.0;
            terms_.push_back({c.h, sign_exit * branch});
        }
    }

    struct Term {
        double h;
        double weight;
    };

    Polygon2D poly_;
    std::vector<double> vertex_radii_;
    double analytic_radius_ = 0.0;
    cplx theta_at_one_{};
    std::vector<Term> terms_;
};

/// Angular measure of the sphere of radius r inside a ball of K^3 (a cap
/// area on the unit sphere), continued analytically in r.
class BallAngular {
public:
    explicit BallAngular(const Ball3D& b) : ball_(b) {
        c_ = std::hypot(b.center[0], b.center[1], b.center[2]);
        if (!(b.radius > 0.0)) throw std::invalid_argument("Ball3D: radius must be positive");
        lo_ = std::abs(c_ - b.radius);
        hi_ = c_ + b.radius;
        if (std::abs(lo_ - 1.0) < 1e-6 || std::abs(hi_ - 1.0) < 1e-6) {
            throw std::invalid_argument("Ball3D: boundary tangent to the unit sphere");
        }
    }

    double center_distance() const { return c_; }
    double inner_breakpoint() const { return lo_; }
    double outer_breakpoint() const { return hi_; }
    double analytic_radius() const { return std::min(std::abs(1.0 - lo_), std::abs(1.0 - hi_)); }

    cplx measure(cplx z) const {
        const double r = z.real();
        // The regime is fixed by where 1 lies when z is complex.
        const double ref = z.imag() == 0.0 ? r : 1.0;
        if (ref >= hi_) return 0.0;
        if (ref < lo_) return ball_.radius > c_ ? cplx(4.0 * std::numbers::pi) : cplx(0.0);
        return 2.0 * std::numbers::pi - std::numbers::pi * (z * z + c_ * c_ - ball_.radius * ball_.radius) / (z * c_);
    }

    /// Largest polar angle (from the centre direction) of the cap at real radius r.
    double cap_angle(double r) const {
        if (r >= hi_) return 0.0;
        if (r < lo_) return ball_.radius > c_ ? std::numbers::pi : 0.0;
        const double cosv = (r * r + c_ * c_ - ball_.radius * ball_.radius) / (2.0 * r * c_);
        return std::acos(std::clamp(cosv, -1.0, 1.0));
    }

private:
    Ball3D ball_;
    double c_ = 0.0;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

/// Structural checks for every family; throws std::invalid_argument.
inline void validate(const DomainSpec& d) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sector2D>) {
                if (!(v.angle > 0.0 && v.angle <= 2.0 * std::numbers::pi + 1e-15)) {
                    throw std::invalid_argument("Sector2D: angle must lie in (0, 2 pi]");
                }
                if (!(v.inner >= 0.0 && v.outer > v.inner)) throw std::invalid_argument("Sector2D: need 0 <= inner < outer");
                if (std::abs(v.outer - 1.0) < 1e-6 || (v.inner > 0.0 && std::abs(v.inner - 1.0) < 1e-6)) {
                    throw std::invalid_argument("Sector2D: arc on the unit circle");
                }
            } else if constexpr (std::is_same_v<T, Polygon2D>) {
                PolygonAngular check(v);
                (void)check;
            } else if constexpr (std::is_same_v<T, HolderGraph2D>) {
                if (!(v.beta > 0.0) || !(v.height > 0.0 && v.height < 1.0)) {
                    throw std::invalid_argument("HolderGraph2D: need beta > 0 and 0 < height < 1");
                }
            } else if constexpr (std::is_same_v<T, Box3D>) {
                if (!(v.x1_lo < v.x1_hi && v.x2_lo < v.x2_hi && v.x3_lo < v.x3_hi)) {
                    throw std::invalid_argument("Box3D: empty box");
                }
                if (!(v.x3_lo > -1.0 && v.x3_hi < 1.0)) throw std::invalid_argument("Box3D: height must stay below 1");
            } else if constexpr (std::is_same_v<T, Wedge3D>) {
                if (!(v.x1_lo < v.x1_hi) || !(v.height > 0.0 && v.height < 1.0)) {
                    throw std::invalid_argument("Wedge3D: need a < b and 0 < height < 1");
                }
                if (v.c_coeffs.size() > 5 || v.d_coeffs.size() > 5) {
                    throw std::invalid_argument("Wedge3D: c and d are polynomials of degree at most 4");
                }
            } else if constexpr (std::is_same_v<T, Cone3D>) {
                if (!(v.slope > 0.0) || !(v.height > 0.0 && v.height < 1.0)) {
                    throw std::invalid_argument("Cone3D: need slope > 0 and 0 < height < 1");
                }
            } else if constexpr (std::is_same_v<T, HolderGraph3D>) {
                if (!(v.x1_lo < v.x1_hi) || !(v.height > 0.0 && v.height < 1.0)) {
                    throw std::invalid_argument("HolderGraph3D: need a < b and 0 < height < 1");
                }
            } else if constexpr (std::is_same_v<T, Ball3D>) {
                BallAngular check(v);
                (void)check;
            }
        },
        d);
}

}  // namespace xhyp
