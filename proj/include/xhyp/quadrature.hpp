#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature on real intervals for real or
// complex valued integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "xhyp/errors.hpp"

namespace xhyp {

using cplx = std::complex<double>;

template <class T>
struct BasicQuadrature {
    T value{};
    double error_estimate = 0.0;
    long evaluations = 0;
    bool converged = true;
    bool divergence_suspected = false;
};

/// Complex value, error estimate and evaluation count. Every integrator in the
/// library returns one of these.
using QuadratureResult = BasicQuadrature<cplx>;

struct AdaptiveOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_intervals = 1 << 15;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
    double a = 0.0;
    double b = 0.0;
    T value{};
    double error = 0.0;
};

template <class T>
inline bool is_finite_value(const T& v) {
    if constexpr (std::is_same_v<T, cplx>) {
        return std::isfinite(v.real()) && std::isfinite(v.imag());
    } else {
        return std::isfinite(v);
    }
}

template <class T, class F>
T checked_eval(F& f, double x) {
    T v = static_cast<T>(f(x));
    if (!is_finite_value(v)) {
        std::ostringstream os;
        os.precision(17);
        os << "non-finite integrand value at x = " << x;
        throw numerical_error(os.str());
    }
    return v;
}

// QUADPACK qk15 with its error heuristics.
template <class T, class F>
Panel<T> kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const T fc = checked_eval<T>(f, center);
    T resg = fc * kGaussWeights[3];
    T resk = fc * kKronrodWeights[7];
    double resabs = std::abs(resk);
    std::array<T, 7> f1{};
    std::array<T, 7> f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f1[j] = checked_eval<T>(f, center - dx);
        f2[j] = checked_eval<T>(f, center + dx);
        const T sum = f1[j] + f2[j];
        resk += kKronrodWeights[j] * sum;
        resabs += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += kGaussWeights[j / 2] * sum;
    }
    const T reskh = resk * 0.5;
    double resasc = kKronrodWeights[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kKronrodWeights[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
    }
    const double ahalf = std::abs(half);
    resasc *= ahalf;
    resabs *= ahalf;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * resabs, err);
    }
    return {a, b, resk * half, err};
}

template <class T>
struct PanelOrder {
    bool operator()(const Panel<T>& l, const Panel<T>& r) const {
        if (l.error != r.error) return l.error < r.error;
        return l.a > r.a;
    }
};

}  // namespace detail

/// Globally adaptive integration of f over the union of [points[i], points[i+1]].
/// Breakpoints are where the integrand has kinks or peaks.
template <class F>
auto integrate_adaptive(F&& f, std::span<const double> points, const AdaptiveOptions& opt = {})
    -> BasicQuadrature<std::conditional_t<std::is_same_v<std::decay_t<std::invoke_result_t<F&, double>>, cplx>,
                                          cplx, double>> {
    using T = std::conditional_t<std::is_same_v<std::decay_t<std::invoke_result_t<F&, double>>, cplx>, cplx, double>;
    using detail::Panel;
    if (points.size() < 2) throw std::invalid_argument("integrate_adaptive: need at least two points");

    BasicQuadrature<T> out;
    std::priority_queue<Panel<T>, std::vector<Panel<T>>, detail::PanelOrder<T>> heap;
    T total{};
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i] == points[i + 1]) continue;
        auto p = detail::kronrod15<T>(f, points[i], points[i + 1]);
        out.evaluations += 15;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    if (heap.empty()) return out;

    int count = static_cast<int>(heap.size());
    auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    std::vector<Panel<T>> frozen;
    while (total_err > tolerance() && !heap.empty()) {
        if (count >= opt.max_intervals) break;
        Panel<T> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            frozen.push_back(worst);
            continue;
        }
        auto left = detail::kronrod15<T>(f, worst.a, mid);
        auto right = detail::kronrod15<T>(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }

    // Re-sum in interval order so the result does not depend on heap drift.
    std::vector<Panel<T>> panels = std::move(frozen);
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
    T sum{};
    double err = 0.0;
    for (const auto& p : panels) {
        sum += p.value;
        err += p.error;
    }
    out.value = sum;
    out.error_estimate = err;
    out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(sum));
    return out;
}

template <class F>
auto integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
    const std::array<double, 2> pts{a, b};
    return integrate_adaptive(std::forward<F>(f), std::span<const double>(pts), opt);
}

/// Sorted breakpoints for [a, b] with the interior points that fall strictly inside.
inline std::vector<double> breakpoints(double a, double b, std::initializer_list<double> interior) {
    std::vector<double> pts{a};
    std::vector<double> inner;
    for (double p : interior) {
        if (p > std::min(a, b) && p < std::max(a, b)) inner.push_back(p);
    }
    std::sort(inner.begin(), inner.end());
    if (a > b) std::reverse(inner.begin(), inner.end());
    for (double p : inner) {
        if (p != pts.back()) pts.push_back(p);
    }
    pts.push_back(b);
    return pts;
}

}  // namespace xhyp
