#pragma once

// Models of extended hyperbolic space: the ambient Minkowski space R^{n,1},
// the Klein chart K^n = {1} x R^n and the flattened chart E^n obtained from
// K^n by the reflection in the sphere of radius sqrt(2) about e_n.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

#include "xhyp/errors.hpp"

namespace xhyp {

enum class Model { Ambient, Klein, Flattened };

enum class Region { Hyperbolic, Lorentz, LightCone };

inline const char* to_string(Model m) {
    switch (m) {
        case Model::Ambient: return "ambient";
        case Model::Klein: return "klein";
        case Model::Flattened: return "flattened";
    }
    return "?";
}

/// Coordinates of a point in one of the three models. Klein and flattened
/// points carry n coordinates, ambient points n+1 (time coordinate first).
class ModelPoint {
public:
    ModelPoint(Model model, int dim, std::span<const double> coords) : model_(model), dim_(dim) {
        if (dim != 2 && dim != 3) throw std::invalid_argument("ModelPoint: dimension must be 2 or 3");
        if (coords.size() != expected_size()) {
            throw std::invalid_argument("ModelPoint: expected " + std::to_string(expected_size()) +
                                        " coordinates for the " + to_string(model) + " model");
        }
        for (std::size_t i = 0; i < coords.size(); ++i) coords_[i] = coords[i];
    }

    static ModelPoint klein(std::initializer_list<double> c) {
        return {Model::Klein, static_cast<int>(c.size()), std::span<const double>(c.begin(), c.size())};
    }
    static ModelPoint flattened(std::initializer_list<double> c) {
        return {Model::Flattened, static_cast<int>(c.size()), std::span<const double>(c.begin(), c.size())};
    }
    static ModelPoint ambient(std::initializer_list<double> c) {
        return {Model::Ambient, static_cast<int>(c.size()) - 1, std::span<const double>(c.begin(), c.size())};
    }

    Model model() const { return model_; }
    int dim() const { return dim_; }
    std::size_t size() const { return expected_size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::span<const double> coords() const { return {coords_.data(), size()}; }

    /// Last coordinate (x_n in the Klein and flattened charts).
    double last() const { return coords_[size() - 1]; }

    double norm2() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += coords_[i] * coords_[i];
        return s;
    }

private:
    std::size_t expected_size() const {
        return model_ == Model::Ambient ? static_cast<std::size_t>(dim_ + 1) : static_cast<std::size_t>(dim_);
    }

    Model model_;
    int dim_;
    std::array<double, 4> coords_{};
};

/// Hyperbolic part, Lorentz part or light cone. Klein points are classified
/// by |x| against 1, flattened points by the sign of x_n.
inline Region classify(const ModelPoint& p, double tol = 1e-12) {
    double s = 0.0;
    switch (p.model()) {
        case Model::Klein: s = p.norm2() - 1.0; break;
        case Model::Flattened: s = p.last(); break;
        case Model::Ambient: {
            double q = -p[0] * p[0];
            for (std::size_t i = 1; i < p.size(); ++i) q += p[i] * p[i];
            s = q;
            break;
        }
    }
    if (std::abs(s) <= tol) return Region::LightCone;
    return s < 0.0 ? Region::Hyperbolic : Region::Lorentz;
}

inline double minkowski_inner(const ModelPoint& x, const ModelPoint& y) {
    if (x.model() != Model::Ambient || y.model() != Model::Ambient) {
        throw std::invalid_argument("minkowski_inner: both points must be ambient");
    }
    if (x.dim() != y.dim()) throw std::invalid_argument("minkowski_inner: dimension mismatch");
    double s = -x[0] * y[0];
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

/// Radius of the ball around e_n where the Cayley map is treated as singular.
inline constexpr double kCayleyGuard = 1e-9;

/// |x - e_n|^2 for a chart coordinate vector.
inline double cayley_alpha(std::span<const double> x) {
    double a = 0.0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i + 1 < n; ++i) a += x[i] * x[i];
    const double d = x[n - 1] - 1.0;
    return a + d * d;
}

/// The reflection in the sphere |x - e_n| = sqrt(2), applied in place. It is
/// its own inverse and exchanges the Klein and flattened charts.
inline void cayley_inplace(std::span<double> x) {
    const double alpha = cayley_alpha(x);
    if (alpha <= kCayleyGuard * kCayleyGuard) throw singular_point_error("cayley: point is e_n");
    const std::size_t n = x.size();
    const double s = 2.0 / alpha;
    for (std::size_t i = 0; i + 1 < n; ++i) x[i] *= s;
    x[n - 1] = s * (x[n - 1] - 1.0) + 1.0;
}

/// |det D(sigma)| at x; sigma is an inversion with radius^2 = 2.
inline double cayley_jacobian(std::span<const double> x) {
    return std::pow(2.0 / cayley_alpha(x), static_cast<double>(x.size()));
}

inline ModelPoint cayley(const ModelPoint& p) {
    if (p.model() == Model::Ambient) throw std::invalid_argument("cayley: ambient points have no chart image");
    std::array<double, 4> c{};
    for (std::size_t i = 0; i < p.size(); ++i) c[i] = p[i];
    cayley_inplace(std::span<double>(c.data(), p.size()));
    const Model other = p.model() == Model::Klein ? Model::Flattened : Model::Klein;
    return {other, p.dim(), std::span<const double>(c.data(), p.size())};
}

/// x_n of the flattened image of the Klein point (0, ..., 0, -r): (r-1)/(r+1).
inline double axis_coordinate_map(double r) {
    if (!(r > 0.0)) throw std::domain_error("axis_coordinate_map: r must be positive");
    return (r - 1.0) / (r + 1.0);
}

enum class IsometryKind { LorentzMatrix, FlattenedReflection };

using IsoMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

/// An isometry of the extended space. Lorentz matrices act projectively on
/// the Klein chart and by conjugation with the Cayley map on the flattened
/// chart. Flattened reflections are coordinate reflections x_i -> -x_i
/// (i < n) of E^n; their mirror contains e_n.
class Isometry {
public:
    static Isometry identity(int dim) {
        checked_dim(dim);
        return Isometry(dim, IsoMatrix::Identity(dim + 1, dim + 1));
    }

    static Isometry lorentz(const IsoMatrix& m, double tol = 1e-10) {
        if (m.rows() != m.cols() || (m.rows() != 3 && m.rows() != 4)) {
            throw std::invalid_argument("Isometry: matrix must be 3x3 or 4x4");
        }
        Isometry g(static_cast<int>(m.rows()) - 1, m);
        if (!g.preserves_form(tol)) throw std::invalid_argument("Isometry: matrix does not preserve the Minkowski form");
        return g;
    }

    /// Boost of rapidity t mixing the time coordinate with spatial axis `axis` (0-based).
    static Isometry boost(int dim, int axis, double t) {
        checked_dim(dim);
        IsoMatrix m = IsoMatrix::Identity(dim + 1, dim + 1);
        const int k = checked_axis(dim, axis) + 1;
        m(0, 0) = std::cosh(t);
        m(0, k) = std::sinh(t);
        m(k, 0) = std::sinh(t);
        m(k, k) = std::cosh(t);
        return Isometry(dim, m);
    }

    /// Rotation by `angle` in the plane of spatial axes i and j.
    static Isometry rotation(int dim, int i, int j, double angle) {
        checked_dim(dim);
        IsoMatrix m = IsoMatrix::Identity(dim + 1, dim + 1);
        const int a = checked_axis(dim, i) + 1;
        const int b = checked_axis(dim, j) + 1;
        if (a == b) throw std::invalid_argument("Isometry::rotation: axes must differ");
        m(a, a) = std::cos(angle);
        m(a, b) = -std::sin(angle);
        m(b, a) = std::sin(angle);
        m(b, b) = std::cos(angle);
        return Isometry(dim, m);
    }

    static Isometry flattened_reflection(int dim, int axis) {
        checked_dim(dim);
        if (axis < 0 || axis >= dim - 1) {
            throw std::invalid_argument("Isometry::flattened_reflection: mirror must contain e_n (axis < n-1)");
        }
        IsoMatrix m = IsoMatrix::Identity(dim + 1, dim + 1);
        m(axis + 1, axis + 1) = -1.0;
        Isometry g(dim, m);
        g.kind_ = IsometryKind::FlattenedReflection;
        return g;
    }

    /// this after other: (g.then(h))(p) = h(g(p)).
    Isometry then(const Isometry& next) const {
        if (next.dim_ != dim_) throw std::invalid_argument("Isometry::then: dimension mismatch");
        Isometry out(dim_, next.matrix_ * matrix_);
        return out;
    }

    bool preserves_form(double tol = 1e-12) const {
        IsoMatrix j = IsoMatrix::Identity(dim_ + 1, dim_ + 1);
        j(0, 0) = -1.0;
        const IsoMatrix d = matrix_.transpose() * j * matrix_ - j;
        return d.cwiseAbs().maxCoeff() <= tol;
    }

    int dim() const { return dim_; }
    IsometryKind kind() const { return kind_; }
    const IsoMatrix& matrix() const { return matrix_; }

private:
    Isometry(int dim, IsoMatrix m) : dim_(dim), matrix_(std::move(m)) {}

    static int checked_dim(int dim) {
        if (dim != 2 && dim != 3) throw std::invalid_argument("Isometry: dimension must be 2 or 3");
        return dim;
    }
    static int checked_axis(int dim, int axis) {
        if (axis < 0 || axis >= dim) throw std::invalid_argument("Isometry: axis out of range");
        return axis;
    }

    int dim_;
    IsometryKind kind_ = IsometryKind::LorentzMatrix;
    IsoMatrix matrix_;
};

namespace detail {

inline ModelPoint projective_apply(const IsoMatrix& m, const ModelPoint& p) {
    const int n = p.dim();
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> v(n + 1);
    v(0) = 1.0;
    for (int i = 0; i < n; ++i) v(i + 1) = p[i];
    const auto w = (m * v).eval();
    if (std::abs(w(0)) < 1e-14 * w.cwiseAbs().maxCoeff()) {
        throw singular_point_error("apply_isometry: image lies at projective infinity");
    }
    std::array<double, 4> c{};
    for (int i = 0; i < n; ++i) c[i] = w(i + 1) / w(0);
    return {p.model(), n, std::span<const double>(c.data(), static_cast<std::size_t>(n))};
}

}  // namespace detail

inline ModelPoint apply_isometry(const Isometry& g, const ModelPoint& p) {
    if (g.dim() != p.dim()) throw std::invalid_argument("apply_isometry: dimension mismatch");
    switch (p.model()) {
        case Model::Ambient: {
            if (g.kind() == IsometryKind::FlattenedReflection) {
                throw std::invalid_argument("apply_isometry: flattened reflection cannot act on ambient points");
            }
            Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1> v(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) v(i) = p[i];
            const auto w = (g.matrix() * v).eval();
            std::array<double, 4> c{};
            for (std::size_t i = 0; i < p.size(); ++i) c[i] = w(i);
            return {Model::Ambient, p.dim(), std::span<const double>(c.data(), p.size())};
        }
        case Model::Klein:
            if (g.kind() == IsometryKind::FlattenedReflection) return cayley(detail::projective_apply(g.matrix(), cayley(p)));
            return detail::projective_apply(g.matrix(), p);
        case Model::Flattened:
            if (g.kind() == IsometryKind::FlattenedReflection) return detail::projective_apply(g.matrix(), p);
            return cayley(detail::projective_apply(g.matrix(), cayley(p)));
    }
    throw std::logic_error("apply_isometry: unknown model");
}

}  // namespace xhyp
