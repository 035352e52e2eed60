#pragma once

// The eps -> 0 limit engine: evaluate a regularized quantity on a
// decreasing schedule and extrapolate polynomially to eps = 0 (Neville at
// zero; on a ratio-1/2 schedule this is the Richardson table).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "xhyp/quadrature.hpp"

namespace xhyp {

struct EpsSchedule {
    std::vector<double> eps_values;
    int extrapolation_order = 4;

    /// eps_k = eps0 * ratio^k, k = 0 .. count-1.
    static EpsSchedule geometric(double eps0 = 0.1, double ratio = 0.5, int count = 13, int order = 4) {
        if (!(eps0 > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
            throw std::invalid_argument("EpsSchedule: need eps0 > 0, 0 < ratio < 1, count >= 1");
        }
        EpsSchedule s;
        s.extrapolation_order = order;
        double e = eps0;
        for (int k = 0; k < count; ++k, e *= ratio) s.eps_values.push_back(e);
        s.validate();
        return s;
    }

    void validate() const {
        if (eps_values.empty()) throw std::invalid_argument("EpsSchedule: empty");
        if (extrapolation_order < 0) throw std::invalid_argument("EpsSchedule: negative extrapolation order");
        for (std::size_t i = 0; i < eps_values.size(); ++i) {
            if (!(eps_values[i] > 0.0)) throw std::invalid_argument("EpsSchedule: values must be positive");
            if (i > 0 && !(eps_values[i] < eps_values[i - 1])) {
                throw std::invalid_argument("EpsSchedule: values must be strictly decreasing");
            }
        }
    }
};

/// Polynomial extrapolation of samples (x_k, v_k) to x = 0. Returns the
/// value, an error estimate and whether the last corrections grow.
inline QuadratureResult extrapolate_to_zero(const std::vector<double>& x, const std::vector<cplx>& v, int order) {
    const std::size_t count = x.size();
    if (count == 0 || v.size() != count) throw std::invalid_argument("extrapolate_to_zero: bad samples");
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(std::max(order, 0)), count - 1);
    // table[k][j]: extrapolant of degree j through samples k-j .. k.
    std::vector<std::vector<cplx>> table(count, std::vector<cplx>(m + 1));
    for (std::size_t k = 0; k < count; ++k) {
        table[k][0] = v[k];
        for (std::size_t j = 1; j <= std::min(k, m); ++j) {
            const double w = x[k] / (x[k - j] - x[k]);
            table[k][j] = table[k][j - 1] + w * (table[k][j - 1] - table[k - 1][j - 1]);
        }
    }
    QuadratureResult out;
    const std::size_t last = count - 1;
    out.value = table[last][m];
    double err = 0.0;
    if (m >= 1) err = std::abs(table[last][m] - table[last][m - 1]);
    if (last >= m + 1) err = std::max(err, std::abs(table[last][m] - table[last - 1][m]));
    out.error_estimate = err;
    out.evaluations = static_cast<long>(count);

    // Corrections along the chosen column; growth over the last three steps
    // means the samples have no limit the extrapolant can see.
    double scale = 0.0;
    for (const auto& val : v) scale = std::max(scale, std::abs(val));
    const double noise = 1e-12 * std::max(scale, 1e-300);
    if (last >= m + 3) {
        const double d1 = std::abs(table[last - 2][m] - table[last - 3][m]);
        const double d2 = std::abs(table[last - 1][m] - table[last - 2][m]);
        const double d3 = std::abs(table[last][m] - table[last - 1][m]);
        out.divergence_suspected = d3 > noise && d3 > d2 && d2 > d1;
    }
    out.converged = !out.divergence_suspected;
    return out;
}

/// lim_{eps -> 0} I(eps) from samples on the schedule. When `trace` is
/// given it receives I(eps_k) in schedule order. The evaluation count sums
/// the counts reported by I when it returns a QuadratureResult.
template <class F>
QuadratureResult eps_limit(F&& integral, const EpsSchedule& schedule, std::vector<cplx>* trace = nullptr) {
    schedule.validate();
    std::vector<cplx> values;
    values.reserve(schedule.eps_values.size());
    long evals = 0;
    double quad_err = 0.0;
    bool quad_ok = true;
    for (double e : schedule.eps_values) {
        auto r = integral(e);
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, QuadratureResult>) {
            values.push_back(r.value);
            evals += r.evaluations;
            quad_err = std::max(quad_err, r.error_estimate);
            quad_ok = quad_ok && r.converged;
        } else {
            values.push_back(cplx(r));
            evals += 1;
        }
    }
    if (trace != nullptr) *trace = values;
    auto out = extrapolate_to_zero(schedule.eps_values, values, schedule.extrapolation_order);
    out.evaluations = std::max<long>(evals, 1);
    out.error_estimate = std::max(out.error_estimate, quad_err);
    out.converged = out.converged && quad_ok;
    return out;
}

}  // namespace xhyp
