#pragma once

// Growth classification of truncated integrals I(tau) = int_tau^delta f as
// tau -> 0: convergent (A + B tau^p), power law (A + B tau^-q), logarithmic
// (A + B log(1/tau)) or log-log (A + B log log(1/tau)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "xhyp/quadrature.hpp"

namespace xhyp {

enum class GrowthModel { Convergent, PowerLaw, Log, LogLog };

inline const char* to_string(GrowthModel m) {
    switch (m) {
        case GrowthModel::Convergent: return "Convergent";
        case GrowthModel::PowerLaw: return "PowerLaw";
        case GrowthModel::Log: return "Log";
        case GrowthModel::LogLog: return "LogLog";
    }
    return "?";
}

struct ModelFit {
    GrowthModel model = GrowthModel::Convergent;
    double exponent = 0.0;  ///< p for Convergent, q for PowerLaw, 0 otherwise
    double offset = 0.0;    ///< A
    double slope = 0.0;     ///< B
    double residual = 0.0;  ///< RMS residual relative to max |I|, floored
};

struct DivergenceProfile {
    std::vector<double> cutoffs;
    std::vector<double> values;
    GrowthModel fitted_model = GrowthModel::Convergent;
    double exponent = 0.0;
    double fit_residual = 0.0;
    double limit = std::numeric_limits<double>::quiet_NaN();  ///< A of the Convergent fit
    bool ambiguous = false;
    std::vector<ModelFit> fits;  ///< all four candidate fits, best first
};

/// Relative residual floor; fits better than this are treated as exact.
inline constexpr double kResidualFloor = 1e-9;
/// A model wins only if every rival's residual is at least this many times larger.
inline constexpr double kWinnerRatio = 2.0;
/// Number of smallest cutoffs used in the fit.
inline constexpr std::size_t kFitWindow = 8;

namespace detail {

struct LinearFit {
    double a = 0.0;
    double b = 0.0;
    double rss = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& phi, const std::vector<double>& y) {
    const double n = static_cast<double>(y.size());
    double mp = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        mp += phi[i];
        my += y[i];
    }
    mp /= n;
    my /= n;
    double spp = 0.0;
    double spy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        spp += (phi[i] - mp) * (phi[i] - mp);
        spy += (phi[i] - mp) * (y[i] - my);
    }
    LinearFit f;
    f.b = spp > 0.0 ? spy / spp : 0.0;
    f.a = my - f.b * mp;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - f.a - f.b * phi[i];
        f.rss += r * r;
    }
    return f;
}

// Fit A + B exp(s * k * u) over k in [kmin, kmax] (u = log(1/tau)); s = -1
// gives tau^k, s = +1 gives tau^-k.
inline ModelFit fit_exponential(const std::vector<double>& u, const std::vector<double>& y, double sign,
                                GrowthModel model) {
    auto eval = [&](double k) {
        std::vector<double> phi(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) phi[i] = std::exp(sign * k * u[i]);
        return fit_line(phi, y);
    };
    constexpr double kmin = 1e-3;
    constexpr double kmax = 4.0;
    constexpr int grid = 240;
    double best_k = kmin;
    double best = std::numeric_limits<double>::infinity();
    const double lk0 = std::log(kmin);
    const double lk1 = std::log(kmax);
    for (int i = 0; i <= grid; ++i) {
        const double k = std::exp(lk0 + (lk1 - lk0) * i / grid);
        const double r = eval(k).rss;
        if (r < best) {
            best = r;
            best_k = k;
        }
    }
    // Golden-section refinement in log k around the grid minimum.
    const double h = (lk1 - lk0) / grid;
    double lo = std::max(lk0, std::log(best_k) - h);
    double hi = std::min(lk1, std::log(best_k) + h);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = eval(std::exp(x1)).rss;
    double f2 = eval(std::exp(x2)).rss;
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(std::exp(x1)).rss;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(std::exp(x2)).rss;
        }
    }
    double k = std::exp(0.5 * (lo + hi));
    LinearFit lf = eval(k);
    if (best < lf.rss) {
        k = best_k;
        lf = eval(k);
    }
    return {model, k, lf.a, lf.b, lf.rss};
}

}  // namespace detail

/// Classify the growth of I(tau) using the kFitWindow smallest cutoffs.
inline DivergenceProfile classify_growth(const std::vector<double>& cutoffs, const std::vector<double>& values) {
    if (cutoffs.size() != values.size() || cutoffs.size() < kFitWindow) {
        throw std::invalid_argument("classify_growth: need at least 8 (cutoff, value) pairs");
    }
    for (std::size_t i = 1; i < cutoffs.size(); ++i) {
        if (!(cutoffs[i] < cutoffs[i - 1])) throw std::invalid_argument("classify_growth: cutoffs must decrease");
    }
    if (!(cutoffs.back() > 0.0) || !(cutoffs.front() < 1.0)) {
        throw std::invalid_argument("classify_growth: cutoffs must lie in (0, 1)");
    }
    DivergenceProfile prof;
    prof.cutoffs = cutoffs;
    prof.values = values;

    const std::size_t start = cutoffs.size() - kFitWindow;
    std::vector<double> u;
    std::vector<double> y;
    double scale = 0.0;
    for (std::size_t i = start; i < cutoffs.size(); ++i) {
        u.push_back(std::log(1.0 / cutoffs[i]));
        y.push_back(values[i]);
        scale = std::max(scale, std::abs(values[i]));
    }
    if (scale == 0.0) scale = 1.0;
    const double n = static_cast<double>(y.size());

    // Already converged to the residual floor inside the window.
    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    if ((*hi_it - *lo_it) / scale <= 10.0 * kResidualFloor) {
        prof.fitted_model = GrowthModel::Convergent;
        prof.fit_residual = kResidualFloor;
        prof.limit = y.back();
        prof.fits.push_back({GrowthModel::Convergent, 0.0, y.back(), 0.0, kResidualFloor});
        return prof;
    }

    std::vector<ModelFit> fits;
    fits.push_back(detail::fit_exponential(u, y, -1.0, GrowthModel::Convergent));
    fits.push_back(detail::fit_exponential(u, y, +1.0, GrowthModel::PowerLaw));
    {
        const auto lf = detail::fit_line(u, y);
        fits.push_back({GrowthModel::Log, 0.0, lf.a, lf.b, lf.rss});
    }
    {
        std::vector<double> phi(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) phi[i] = std::log(u[i]);
        const auto lf = detail::fit_line(phi, y);
        fits.push_back({GrowthModel::LogLog, 0.0, lf.a, lf.b, lf.rss});
    }
    for (auto& f : fits) f.residual = std::max(std::sqrt(f.residual / n) / scale, kResidualFloor);
    // A Convergent fit needs a negative slope (values rising towards the
    // limit); a growing fit needs a positive one.
    for (auto& f : fits) {
        if (f.model == GrowthModel::Convergent && !(f.slope < 0.0)) f.residual = std::numeric_limits<double>::infinity();
        if (f.model != GrowthModel::Convergent && !(f.slope > 0.0)) f.residual = std::numeric_limits<double>::infinity();
    }
    std::stable_sort(fits.begin(), fits.end(), [](const ModelFit& a, const ModelFit& b) { return a.residual < b.residual; });

    const double best = fits.front().residual;
    std::vector<const ModelFit*> near;
    for (const auto& f : fits) {
        if (f.residual <= kWinnerRatio * best) near.push_back(&f);
    }
    const ModelFit* winner = near.front();
    if (near.size() > 1) {
        prof.ambiguous = true;
        // Prefer the two-parameter model when exactly one is among the tied set.
        const ModelFit* two_param = nullptr;
        int count = 0;
        for (const auto* f : near) {
            if (f->model == GrowthModel::Log || f->model == GrowthModel::LogLog) {
                two_param = f;
                ++count;
            }
        }
        if (count == 1) winner = two_param;
    }
    prof.fitted_model = winner->model;
    prof.exponent = winner->exponent;
    prof.fit_residual = winner->residual;
    for (const auto& f : fits) {
        if (f.model == GrowthModel::Convergent) prof.limit = f.offset;
    }
    prof.fits = fits;
    return prof;
}

/// Truncated integrals I(tau_k) = int_{tau_k}^{delta} f(x) dx, computed
/// cumulatively with the substitution x = e^{-u}.
template <class F>
std::vector<double> truncated_integrals(F&& f, double delta, const std::vector<double>& cutoffs, double rel_tol = 1e-13) {
    std::vector<double> out;
    out.reserve(cutoffs.size());
    double acc = 0.0;
    double prev_u = std::log(1.0 / delta);
    for (double tau : cutoffs) {
        if (!(tau > 0.0 && tau < delta)) throw std::invalid_argument("truncated_integrals: cutoffs must lie in (0, delta)");
        const double u = std::log(1.0 / tau);
        auto g = [&](double s) {
            const double x = std::exp(-s);
            return f(x) * x;
        };
        const auto r = integrate_adaptive(g, prev_u, u, AdaptiveOptions{0.0, rel_tol, 1 << 12});
        acc += r.value;
        out.push_back(acc);
        prev_u = u;
    }
    return out;
}

enum class RegularityFamily { Reg2D, Reg3D, LogExample };

inline const char* to_string(RegularityFamily f) {
    switch (f) {
        case RegularityFamily::Reg2D: return "reg2d";
        case RegularityFamily::Reg3D: return "reg3d";
        case RegularityFamily::LogExample: return "logexample";
    }
    return "?";
}

/// Default cutoffs tau_j = 2^{-j} below delta and above 1e-12.
inline std::vector<double> default_cutoffs(double delta) {
    std::vector<double> t;
    for (int j = 1; j < 64; ++j) {
        const double tau = std::ldexp(1.0, -j);
        if (tau <= 1e-12) break;
        if (tau < delta) t.push_back(tau);
    }
    return t;
}

/// The one-dimensional integrand each regularity family reduces to near the
/// singular hyperplane: x^{beta - 3/2} (Reg2D), x^{alpha - 1} (Reg3D) and
/// 1 / (-x log x) (LogExample).
inline std::function<double(double)> reduced_integrand(RegularityFamily family, double exponent) {
    switch (family) {
        case RegularityFamily::Reg2D: return [exponent](double x) { return std::pow(x, exponent - 1.5); };
        case RegularityFamily::Reg3D: return [exponent](double x) { return std::pow(x, exponent - 1.0); };
        case RegularityFamily::LogExample: return [](double x) { return 1.0 / (-x * std::log(x)); };
    }
    throw std::logic_error("reduced_integrand: unknown family");
}

inline DivergenceProfile divergence_profile(RegularityFamily family, double exponent, double delta,
                                            std::vector<double> cutoffs = {}) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("divergence_profile: delta must lie in (0, 1)");
    if (cutoffs.empty()) cutoffs = default_cutoffs(delta);
    for (double t : cutoffs) {
        if (!(t > 1e-12)) throw std::invalid_argument("divergence_profile: cutoffs must exceed 1e-12");
    }
    const auto values = truncated_integrals(reduced_integrand(family, exponent), delta, cutoffs);
    return classify_growth(cutoffs, values);
}

}  // namespace xhyp
