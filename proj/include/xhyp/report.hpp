#pragma once

// Experiment configs, the experiment runner and report serialization.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "xhyp/contour.hpp"
#include "xhyp/densities.hpp"
#include "xhyp/divergence.hpp"
#include "xhyp/domains.hpp"
#include "xhyp/extrapolation.hpp"
#include "xhyp/geometry.hpp"
#include "xhyp/volume.hpp"

namespace xhyp {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

/// Invalid configuration; `field` names the offending key.
class config_error : public std::invalid_argument {
public:
    config_error(std::string field, const std::string& msg)
        : std::invalid_argument(field + ": " + msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"theorem21",  "reg2d",      "reg3d",        "logexample",  "cone",
                                                "invariance", "additivity", "density-eval", "contour-eval"};
    return names;
}

/// Default parameters of each experiment; the key set is also the set of accepted keys.
inline json default_parameters(const std::string& experiment) {
    const double pi = std::numbers::pi;
    const json triangle = json::array({json::array({0.0, 0.0}), json::array({2.0, 0.0}), json::array({0.0, 2.0})});
    if (experiment == "theorem21") {
        return {{"domain", "sector"}, {"theta", 2.0 * pi},       {"R", std::numbers::sqrt2},
                {"x1", {-0.5, 0.5}},  {"x2", {-0.5, 0.5}},       {"delta", 0.5},
                {"tol", 1e-3},        {"eps0", 0.1},             {"eps_ratio", 0.5},
                {"eps_count", 13},    {"order", 4}};
    }
    if (experiment == "reg2d") return {{"beta", {0.4, 0.5, 0.6}}, {"delta", 0.5}, {"exponent_tol", 0.05}};
    if (experiment == "reg3d") return {{"alpha", {-0.2, 0.0, 0.2}}, {"delta", 0.5}, {"exponent_tol", 0.05}};
    if (experiment == "logexample") return {{"delta", 0.5}, {"tol", 1e-6}, {"graph_check", true}};
    if (experiment == "cone") return {{"k", 1.0}, {"delta", 1e-3}, {"band", {0.98, 1.02}}};
    if (experiment == "invariance") {
        return {{"vertices", triangle}, {"t", 0.5},         {"angle", pi / 4.0},    {"box_x1", {0.1, 0.6}},
                {"box_x2", {-0.5, 0.5}}, {"delta", 0.5},    {"tol", 1e-5},          {"rotation_tol", 1e-8},
                {"box_tol", 1e-6}};
    }
    if (experiment == "additivity") {
        return {{"theta", 2.0 * pi},     {"R", std::numbers::sqrt2}, {"vertices", triangle},
                {"box_x1", {-0.5, 0.5}}, {"box_x2", {-0.5, 0.5}},    {"delta", 0.5},
                {"sector_tol", 1e-8},    {"median_tol", 1e-6},       {"box_tol", 1e-6}};
    }
    if (experiment == "density-eval") {
        return {{"kind", "klein-exact"}, {"dim", 2}, {"eps", 0.1}, {"point", {0.3, 0.4}}, {"tol", 1e-8}};
    }
    if (experiment == "contour-eval") {
        return {{"integrand", "all"}, {"delta", 0.5}, {"tol", 1e-9}};
    }
    throw config_error("experiment", "unknown experiment '" + experiment + "'");
}

struct ExperimentConfig {
    std::string experiment;
    json parameters = json::object();  ///< fully resolved (defaults merged)
    std::string output_path;           ///< empty: standard output
    std::string format = "json";

    json to_json() const {
        json out{{"experiment", experiment}, {"parameters", parameters}};
        out["output"] = {{"path", output_path}, {"format", format}};
        return out;
    }
};

namespace detail {

inline void check_positive_tolerances(const json& params) {
    for (const auto& [key, value] : params.items()) {
        const bool is_tol = key == "tol" || (key.size() > 4 && key.compare(key.size() - 4, 4, "_tol") == 0);
        if (is_tol && (!value.is_number() || !(value.get<double>() > 0.0))) {
            throw config_error("parameters." + key, "tolerance must be a positive number");
        }
    }
}

}  // namespace detail

/// Parse a config document {experiment, parameters, output}. Unknown keys
/// are rejected; missing parameters take the experiment defaults.
inline ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw config_error("config", "must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (key != "experiment" && key != "parameters" && key != "output") {
            throw config_error(key, "unknown config key");
        }
    }
    if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
        throw config_error("experiment", "missing or not a string");
    }
    ExperimentConfig cfg;
    cfg.experiment = doc["experiment"].get<std::string>();
    cfg.parameters = default_parameters(cfg.experiment);
    if (doc.contains("parameters")) {
        const auto& p = doc["parameters"];
        if (!p.is_object()) throw config_error("parameters", "must be an object");
        for (const auto& [key, value] : p.items()) {
            if (!cfg.parameters.contains(key)) throw config_error("parameters." + key, "unknown parameter");
            const auto& def = cfg.parameters[key];
            const bool ok = (def.is_number() && value.is_number()) || (def.is_string() && value.is_string()) ||
                            (def.is_boolean() && value.is_boolean()) || (def.is_array() && value.is_array());
            if (!ok) throw config_error("parameters." + key, "wrong type");
            cfg.parameters[key] = value;
        }
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        if (!o.is_object()) throw config_error("output", "must be an object");
        for (const auto& [key, value] : o.items()) {
            if (key == "path") {
                if (!value.is_string()) throw config_error("output.path", "must be a string");
                cfg.output_path = value.get<std::string>();
            } else if (key == "format") {
                if (!value.is_string()) throw config_error("output.format", "must be a string");
                cfg.format = value.get<std::string>();
            } else {
                throw config_error("output." + key, "unknown output key");
            }
        }
    }
    if (cfg.format != "json" && cfg.format != "csv") throw config_error("output.format", "must be json or csv");
    detail::check_positive_tolerances(cfg.parameters);
    return cfg;
}

enum class Verdict { Pass, Fail, Info };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Info: return "info";
    }
    return "?";
}

struct ResultRow {
    std::string name;
    std::optional<cplx> value;
    std::string text;
    std::optional<cplx> expected;
    std::string expected_text;
    std::optional<double> deviation;
    std::optional<double> tolerance;
    Verdict verdict = Verdict::Info;
};

struct Series {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Report {
    ExperimentConfig config;
    std::vector<ResultRow> rows;
    std::vector<std::pair<std::string, Series>> series;
    bool engine_error = false;
    std::optional<double> timing_seconds;

    bool passed() const {
        for (const auto& r : rows) {
            if (r.verdict == Verdict::Fail) return false;
        }
        return !engine_error;
    }

    /// 0 pass, 1 oracle failure, 3 engine error.
    int exit_code() const { return engine_error ? 3 : (passed() ? 0 : 1); }

    const Series& find_series(const std::string& name) const {
        for (const auto& [n, s] : series) {
            if (n == name) return s;
        }
        throw std::invalid_argument("unknown series '" + name + "'");
    }
};

namespace detail {

inline ResultRow compare(std::string name, cplx value, cplx expected, double tol) {
    ResultRow r;
    r.name = std::move(name);
    r.value = value;
    r.expected = expected;
    r.deviation = std::abs(value - expected);
    r.tolerance = tol;
    r.verdict = *r.deviation < tol ? Verdict::Pass : Verdict::Fail;
    return r;
}

inline ResultRow info(std::string name, cplx value) {
    ResultRow r;
    r.name = std::move(name);
    r.value = value;
    return r;
}

inline ResultRow bounded(std::string name, double value, double tol) {
    ResultRow r;
    r.name = std::move(name);
    r.value = value;
    r.expected = 0.0;
    r.deviation = value;
    r.tolerance = tol;
    r.verdict = value < tol ? Verdict::Pass : Verdict::Fail;
    return r;
}

inline std::vector<double> pair_of(const json& v, const char* key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw config_error(std::string("parameters.") + key, "expected [lo, hi]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

inline Polygon2D polygon_of(const json& v) {
    std::vector<Vec2> pts;
    if (!v.is_array()) throw config_error("parameters.vertices", "expected a list of [x, y]");
    for (const auto& p : v) {
        if (!p.is_array() || p.size() != 2) throw config_error("parameters.vertices", "expected a list of [x, y]");
        pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    try {
        return make_polygon(std::move(pts));
    } catch (const std::invalid_argument& e) {
        throw config_error("parameters.vertices", e.what());
    }
}

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string series_label(const char* prefix, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s-%g", prefix, x);
    return buf;
}

inline void add_profile_series(Report& rep, const std::string& name, const DivergenceProfile& p) {
    Series s{{"tau", "value"}, {}};
    for (std::size_t i = 0; i < p.cutoffs.size(); ++i) s.rows.push_back({p.cutoffs[i], p.values[i]});
    rep.series.emplace_back(name, std::move(s));
}

inline void run_theorem21(const json& p, Report& rep) {
    const double tol = p["tol"].get<double>();
    const auto schedule = EpsSchedule::geometric(p["eps0"].get<double>(), p["eps_ratio"].get<double>(),
                                                 p["eps_count"].get<int>(), p["order"].get<int>());
    const std::string domain = p["domain"].get<std::string>();
    DomainSpec d;
    std::optional<cplx> oracle;
    if (domain == "sector") {
        Sector2D s;
        s.angle = p["theta"].get<double>();
        s.outer = p["R"].get<double>();
        d = s;
        // Antiderivative (1 - r^2)^{-1/2} continued along the upper detour.
        oracle = s.angle * (lower_pow(1.0 - s.outer * s.outer, -0.5) - 1.0);
    } else if (domain == "box") {
        const auto x1 = pair_of(p["x1"], "x1");
        const auto x2 = pair_of(p["x2"], "x2");
        d = make_box(x1[0], x1[1], x2[0], x2[1], p["delta"].get<double>());
    } else {
        throw config_error("parameters.domain", "must be sector or box");
    }
    try {
        validate(d);
    } catch (const std::invalid_argument& e) {
        throw config_error("parameters", e.what());
    }
    const auto contour = mu_contour(d, 1e-3 * tol);
    const cplx reference = oracle ? *oracle : contour.value;
    if (oracle) {
        rep.rows.push_back(compare("mu_contour", contour.value, *oracle, tol));
    } else {
        rep.rows.push_back(info("mu_contour", contour.value));
    }
    for (DensityKind k : {DensityKind::KleinEps, DensityKind::FlattenedEps, DensityKind::MuEps}) {
        std::vector<cplx> trace;
        const auto r = mu_eps(d, k, schedule, tol, &trace);
        rep.rows.push_back(compare(std::string("mu_eps/") + to_string(k), r.value, reference, tol));
        Series s{{"eps", "re", "im"}, {}};
        for (std::size_t i = 0; i < trace.size(); ++i) {
            s.rows.push_back({schedule.eps_values[i], trace[i].real(), trace[i].imag()});
        }
        const std::string name = k == DensityKind::KleinEps ? "eps-trace" : std::string("eps-trace-") + to_string(k);
        rep.series.emplace_back(name, std::move(s));
    }
}

inline void run_regularity(const json& p, Report& rep, RegularityFamily family, const char* key) {
    const double delta = p["delta"].get<double>();
    const double etol = p["exponent_tol"].get<double>();
    for (const auto& v : p[key]) {
        if (!v.is_number()) throw config_error(std::string("parameters.") + key, "expected a list of numbers");
        const double e = v.get<double>();
        // x^{e - c} with c = 3/2 (Reg2D) or 1 (Reg3D): threshold at e = c - 1.
        const double threshold = family == RegularityFamily::Reg2D ? 0.5 : 0.0;
        const double gap = e - threshold;
        GrowthModel expected = GrowthModel::Log;
        if (gap > 1e-12) expected = GrowthModel::Convergent;
        if (gap < -1e-12) expected = GrowthModel::PowerLaw;
        const auto prof = divergence_profile(family, e, delta);
        ResultRow r;
        r.name = series_label(key, e);
        r.text = to_string(prof.fitted_model);
        r.expected_text = to_string(expected);
        bool ok = prof.fitted_model == expected;
        if (expected != GrowthModel::Log) {
            r.value = prof.exponent;
            r.expected = std::abs(gap);
            r.deviation = std::abs(prof.exponent - std::abs(gap)) / std::abs(gap);
            r.tolerance = etol;
            ok = ok && *r.deviation <= etol;
        }
        r.verdict = ok ? Verdict::Pass : Verdict::Fail;
        rep.rows.push_back(r);
        ResultRow res;
        res.name = r.name + "/fit_residual";
        res.value = prof.fit_residual;
        res.text = prof.ambiguous ? "ambiguous" : "";
        rep.rows.push_back(res);
        add_profile_series(rep, std::string(to_string(family)) + "-" + series_label(key, e).substr(std::strlen(key) + 1),
                           prof);
    }
}

inline void run_logexample(const json& p, Report& rep) {
    const double delta = p["delta"].get<double>();
    const double tol = p["tol"].get<double>();
    const auto prof = divergence_profile(RegularityFamily::LogExample, 0.0, delta);
    ResultRow r;
    r.name = "fitted_model";
    r.text = to_string(prof.fitted_model);
    r.expected_text = to_string(GrowthModel::LogLog);
    r.verdict = prof.fitted_model == GrowthModel::LogLog ? Verdict::Pass : Verdict::Fail;
    rep.rows.push_back(r);

    const double tau = std::exp(-std::numbers::e);
    const auto f = reduced_integrand(RegularityFamily::LogExample, 0.0);
    const double value = truncated_integrals(f, delta, {tau}).front();
    // Antiderivative log(-log x).
    const double oracle = std::log(std::log(1.0 / tau)) - std::log(std::log(1.0 / delta));
    rep.rows.push_back(compare("I(exp(-e))", value, oracle, tol));
    add_profile_series(rep, "logexample", prof);

    if (p["graph_check"].get<bool>()) {
        HolderGraph3D g;
        g.profile = GraphProfile::LogRatio;
        g.alpha = 0.0;
        g.height = delta;
        const auto m = mu_direct(g, 1e-8);
        ResultRow d;
        d.name = "graph_domain/divergence_suspected";
        d.text = m.divergence_suspected ? "true" : "false";
        d.expected_text = "true";
        d.verdict = m.divergence_suspected ? Verdict::Pass : Verdict::Fail;
        rep.rows.push_back(d);
    }
}

inline void run_cone(const json& p, Report& rep) {
    Cone3D c;
    c.slope = p["k"].get<double>();
    c.height = p["delta"].get<double>();
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw config_error("parameters", e.what());
    }
    const auto band = pair_of(p["band"], "band");
    DivergenceProfile prof;
    const auto vol = mu_direct(c, 1e-12, &prof);
    rep.rows.push_back(info("volume", vol.value));
    const double ratio = vol.value.real() * 2.0 * c.slope * c.slope / c.height;
    ResultRow r;
    r.name = "ratio";
    r.value = ratio;
    r.expected = 0.5 * (band[0] + band[1]);
    r.deviation = std::abs(ratio - *r.expected);
    r.tolerance = 0.5 * (band[1] - band[0]);
    r.verdict = ratio >= band[0] && ratio <= band[1] ? Verdict::Pass : Verdict::Fail;
    rep.rows.push_back(r);
    rep.rows.push_back(info("ratio/pi", ratio / std::numbers::pi));
    add_profile_series(rep, "cone-truncation", prof);
}

inline void run_invariance(const json& p, Report& rep) {
    const auto tri = polygon_of(p["vertices"]);
    const auto boost = mu_invariance_test(tri, Isometry::boost(2, 0, p["t"].get<double>()), 1e-11);
    rep.rows.push_back(info("polygon/mu_U", boost.mu_u.value));
    rep.rows.push_back(info("polygon/mu_gU_boost", boost.mu_gu.value));
    rep.rows.push_back(bounded("polygon/boost_deviation", boost.deviation, p["tol"].get<double>()));
    const auto rot = mu_invariance_test(tri, Isometry::rotation(2, 0, 1, p["angle"].get<double>()), 1e-11);
    rep.rows.push_back(bounded("polygon/rotation_deviation", rot.deviation, p["rotation_tol"].get<double>()));
    const auto x1 = pair_of(p["box_x1"], "box_x1");
    const auto x2 = pair_of(p["box_x2"], "box_x2");
    const auto box = make_box(x1[0], x1[1], x2[0], x2[1], p["delta"].get<double>());
    const auto refl = mu_invariance_test(box, Isometry::flattened_reflection(3, 0), 1e-10);
    rep.rows.push_back(info("box/mu_U", refl.mu_u.value));
    rep.rows.push_back(bounded("box/reflection_deviation", refl.deviation, p["box_tol"].get<double>()));
}

inline void run_additivity(const json& p, Report& rep) {
    Sector2D s;
    s.angle = p["theta"].get<double>();
    s.outer = p["R"].get<double>();
    const auto a = additivity_test(s, Hyperplane{{0.0, 1.0}, 0.0}, 1e-11);
    rep.rows.push_back(bounded("sector/halves_deviation", a.deviation, p["sector_tol"].get<double>()));

    // Median from the first vertex to the midpoint of the opposite edge.
    const auto tri = polygon_of(p["vertices"]);
    const Vec2 v0 = tri.vertices[0];
    const Vec2 m{0.5 * (tri.vertices[1][0] + tri.vertices[2][0]), 0.5 * (tri.vertices[1][1] + tri.vertices[2][1])};
    const Vec2 nrm{-(m[1] - v0[1]), m[0] - v0[0]};
    const auto b = additivity_test(tri, Hyperplane{{nrm[0], nrm[1]}, nrm[0] * v0[0] + nrm[1] * v0[1]}, 1e-11);
    rep.rows.push_back(bounded("polygon/median_deviation", b.deviation, p["median_tol"].get<double>()));

    const auto x1 = pair_of(p["box_x1"], "box_x1");
    const auto x2 = pair_of(p["box_x2"], "box_x2");
    const auto box = make_box(x1[0], x1[1], x2[0], x2[1], p["delta"].get<double>());
    const auto c = additivity_test(box, Hyperplane{{1.0, 0.0, 0.0}, 0.5 * (x1[0] + x1[1])}, 1e-10);
    rep.rows.push_back(bounded("box/midpoint_deviation", c.deviation, p["box_tol"].get<double>()));
}

inline void run_density_eval(const json& p, Report& rep) {
    DensityKind kind;
    try {
        kind = density_kind_from_string(p["kind"].get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw config_error("parameters.kind", e.what());
    }
    const int n = p["dim"].get<int>();
    std::vector<double> x;
    for (const auto& v : p["point"]) x.push_back(v.get<double>());
    if (static_cast<int>(x.size()) != n) throw config_error("parameters.point", "length must equal dim");
    std::optional<DensityVariant> var;
    try {
        var.emplace(kind, n, is_regularized(kind) ? p["eps"].get<double>() : 0.0);
    } catch (const std::invalid_argument& e) {
        throw config_error("parameters", e.what());
    }
    const cplx value = evaluate(*var, x);
    // The same density through the other chart: Klein <-> flattened.
    const std::map<DensityKind, DensityKind> partner{{DensityKind::KleinExact, DensityKind::FlattenedExact},
                                                     {DensityKind::FlattenedExact, DensityKind::KleinExact},
                                                     {DensityKind::KleinEps, DensityKind::FlattenedEps},
                                                     {DensityKind::FlattenedEps, DensityKind::KleinEps}};
    if (!partner.contains(kind)) {
        rep.rows.push_back(info("density", value));
        return;
    }
    const DensityVariant other(partner.at(kind), n, var->eps);
    std::vector<double> y = x;
    const double jac = cayley_jacobian(x);
    cayley_inplace(y);
    const cplx pulled = evaluate(other, y) * jac;
    ResultRow r = compare("density", value, pulled, p["tol"].get<double>());
    r.deviation = std::abs(value - pulled) / std::abs(pulled);
    r.verdict = *r.deviation < *r.tolerance ? Verdict::Pass : Verdict::Fail;
    rep.rows.push_back(r);
}

inline void run_contour_eval(const json& p, Report& rep) {
    const std::string which = p["integrand"].get<std::string>();
    const double delta = p["delta"].get<double>();
    const double tol = p["tol"].get<double>();
    const bool all = which == "all";
    bool known = all;
    const cplx i(0.0, 1.0);
    if (all || which == "inv-z") {
        known = true;
        const auto c = build_contour(-1.0, 1.0, {0.0}, delta);
        rep.rows.push_back(compare("inv-z", integrate_path([](cplx z) { return 1.0 / z; }, c, 1e-3 * tol).value,
                                   -i * std::numbers::pi, tol));
    }
    if (all || which == "inv-z2") {
        known = true;
        const auto c = build_contour(-1.0, 1.0, {0.0}, delta);
        rep.rows.push_back(
            compare("inv-z2", integrate_path([](cplx z) { return 1.0 / (z * z); }, c, 1e-3 * tol).value, -2.0, tol));
    }
    if (all || which == "branch-power") {
        known = true;
        const auto c = build_contour(0.0, 2.0, {1.0}, std::min(delta, 0.9));
        const TrackedPower pw([](cplx z) { return 1.0 - z * z; }, 1.5, c);
        const auto r = integrate_path([&](cplx z, double s) { return z * pw(z, s); }, c, 1e-3 * tol);
        // Antiderivative (1 - r^2)^{-1/2} continued to r = 2 below the cut.
        rep.rows.push_back(compare("branch-power", r.value, lower_pow(-3.0, -0.5) - 1.0, tol));
    }
    if (all || which == "sokhotski") {
        known = true;
        auto integral = [](double eps) {
            return integrate_adaptive([eps](double x) { return 1.0 / cplx(x, eps); }, std::vector<double>{-1.0, 0.0, 1.0},
                                      AdaptiveOptions{1e-13, 0.0, 1 << 15});
        };
        const auto r = eps_limit(integral, EpsSchedule::geometric());
        rep.rows.push_back(compare("sokhotski", r.value, -i * std::numbers::pi, std::max(tol, 1e-6)));
    }
    if (!known) {
        throw config_error("parameters.integrand", "must be all, inv-z, inv-z2, branch-power or sokhotski");
    }
}

}  // namespace detail

/// Execute an experiment. Engine errors become failure rows with
/// engine_error set; configuration problems throw config_error.
inline Report run(const ExperimentConfig& cfg, bool timing = false) {
    Report rep;
    rep.config = cfg;
    const auto t0 = std::chrono::steady_clock::now();
    const auto& p = cfg.parameters;
    try {
        if (cfg.experiment == "theorem21") detail::run_theorem21(p, rep);
        else if (cfg.experiment == "reg2d") detail::run_regularity(p, rep, RegularityFamily::Reg2D, "beta");
        else if (cfg.experiment == "reg3d") detail::run_regularity(p, rep, RegularityFamily::Reg3D, "alpha");
        else if (cfg.experiment == "logexample") detail::run_logexample(p, rep);
        else if (cfg.experiment == "cone") detail::run_cone(p, rep);
        else if (cfg.experiment == "invariance") detail::run_invariance(p, rep);
        else if (cfg.experiment == "additivity") detail::run_additivity(p, rep);
        else if (cfg.experiment == "density-eval") detail::run_density_eval(p, rep);
        else if (cfg.experiment == "contour-eval") detail::run_contour_eval(p, rep);
        else throw config_error("experiment", "unknown experiment '" + cfg.experiment + "'");
    } catch (const config_error&) {
        throw;
    } catch (const json::exception& e) {
        throw config_error("parameters", e.what());
    } catch (const std::exception& e) {
        ResultRow r;
        r.name = "engine_error";
        r.text = e.what();
        r.verdict = Verdict::Fail;
        rep.rows.push_back(r);
        rep.engine_error = true;
    }
    if (timing) {
        rep.timing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return rep;
}

inline json complex_json(cplx v) { return {{"re", v.real()}, {"im", v.imag()}}; }

inline json to_json(const Report& rep) {
    json out;
    out["experiment"] = rep.config.experiment;
    out["version"] = kVersion;
    out["inputs"] = rep.config.to_json();
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json row;
        row["name"] = r.name;
        if (r.value) row["value"] = complex_json(*r.value);
        if (!r.text.empty()) row["text"] = r.text;
        if (r.expected) row["expected"] = complex_json(*r.expected);
        if (!r.expected_text.empty()) row["expected_text"] = r.expected_text;
        row["deviation"] = r.deviation ? json(*r.deviation) : json(nullptr);
        row["tolerance"] = r.tolerance ? json(*r.tolerance) : json(nullptr);
        row["verdict"] = to_string(r.verdict);
        rows.push_back(row);
    }
    out["results"] = rows;
    json names = json::array();
    for (const auto& [name, s] : rep.series) names.push_back(name);
    out["series"] = names;
    out["status"] = rep.passed() ? "pass" : "fail";
    if (rep.timing_seconds) out["timing_seconds"] = *rep.timing_seconds;
    return out;
}

inline std::string to_csv(const Report& rep) {
    std::ostringstream os;
    os << "name,value_re,value_im,text,expected_re,expected_im,expected_text,deviation,tolerance,verdict\n";
    auto opt = [](const std::optional<double>& v) { return v ? detail::fmt(*v) : std::string(); };
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    for (const auto& r : rep.rows) {
        os << quote(r.name) << ',' << (r.value ? detail::fmt(r.value->real()) : "") << ','
           << (r.value ? detail::fmt(r.value->imag()) : "") << ',' << quote(r.text) << ','
           << (r.expected ? detail::fmt(r.expected->real()) : "") << ','
           << (r.expected ? detail::fmt(r.expected->imag()) : "") << ',' << quote(r.expected_text) << ','
           << opt(r.deviation) << ',' << opt(r.tolerance) << ',' << to_string(r.verdict) << '\n';
    }
    return os.str();
}

/// Tab-separated table of a named series with a one-line header.
inline std::string emit_plot_data(const Report& rep, const std::string& name) {
    const Series& s = rep.find_series(name);
    std::ostringstream os;
    for (std::size_t i = 0; i < s.columns.size(); ++i) os << (i ? "\t" : "") << s.columns[i];
    os << '\n';
    for (const auto& row : s.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << detail::fmt(row[i]);
        os << '\n';
    }
    return os.str();
}

}  // namespace xhyp
