#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <variant>

#include "xhyp/contour.hpp"
#include "xhyp/densities.hpp"
#include "xhyp/errors.hpp"

using namespace xhyp;

namespace {

// Antiderivative (1 - r^2)^{-1/2} continued from r = 0 over the upper detour.
cplx branch_oracle(double r) { return lower_pow(1.0 - r * r, -0.5) - 1.0; }

}  // namespace

TEST(BuildContour, Shapes) {
    const auto c = build_contour(0.0, 2.0, {1.0}, 0.1);
    ASSERT_EQ(c.size(), 3u);
    const auto& l0 = std::get<LineSegment>(c.segments()[0]);
    EXPECT_EQ(l0.start, cplx(0.0));
    EXPECT_NEAR(l0.end.real(), 0.9, 1e-15);
    const auto& arc = std::get<ArcSegment>(c.segments()[1]);
    EXPECT_EQ(arc.center, cplx(1.0));
    EXPECT_EQ(arc.radius, 0.1);
    EXPECT_EQ(arc.angle_start, std::numbers::pi);
    EXPECT_EQ(arc.angle_end, 0.0);
    EXPECT_GT(c.point(1.5).imag(), 0.0);

    EXPECT_EQ(build_contour(-1.0, 1.0, {}, 0.3).size(), 1u);
    const auto pure = build_contour(-0.05, 0.05, {0.0}, 0.05);
    ASSERT_EQ(pure.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<ArcSegment>(pure.segments()[0]));

    EXPECT_THROW(build_contour(0.0, 2.0, {1.0}, 1.5), std::invalid_argument);
    EXPECT_THROW(build_contour(0.0, 2.0, {0.8, 1.0}, 0.2), std::invalid_argument);
    EXPECT_THROW(build_contour(0.0, 2.0, {3.0}, 0.1), std::invalid_argument);
}

TEST(IntegratePath, ResidueExamples) {
    const auto c = build_contour(-1.0, 1.0, {0.0}, 0.1);
    const auto a = integrate_path([](cplx z) { return 1.0 / z; }, c, 1e-12);
    EXPECT_NEAR(a.value.real(), 0.0, 1e-10);
    EXPECT_NEAR(a.value.imag(), -std::numbers::pi, 1e-10);
    const auto b = integrate_path([](cplx z) { return 1.0 / (z * z); }, c, 1e-12);
    EXPECT_NEAR(b.value.real(), -2.0, 1e-10);
    EXPECT_NEAR(b.value.imag(), 0.0, 1e-10);
    const Contour line({LineSegment{0.0, 1.0}}, 0.0);
    EXPECT_NEAR(integrate_path([](cplx z) { return z * z; }, line, 1e-14).value.real(), 1.0 / 3.0, 1e-15);
}

TEST(IntegratePath, NonFiniteCarriesPoint) {
    const Contour line({LineSegment{-1.0, 1.0}}, 0.0);
    try {
        integrate_path([](cplx z) { return z.real() > 0.3 ? cplx(NAN, 0.0) : z; }, line, 1e-10);
        FAIL() << "expected numerical_error";
    } catch (const numerical_error& e) {
        EXPECT_NE(std::string(e.what()).find("z = "), std::string::npos);
    }
}

TEST(TrackedPowerTest, BranchOracle) {
    const auto c = build_contour(0.0, 2.0, {1.0}, 0.1);
    const auto p = tracked_power_integrand([](cplx z) { return 1.0 - z * z; }, 1.5, c);
    // Start of the path: principal value.
    const cplx start = p(0.5, 0.5 / 0.9);
    EXPECT_NEAR(start.real(), std::pow(0.75, -1.5), 1e-12);
    EXPECT_NEAR(start.imag(), 0.0, 1e-12);
    // After the detour the argument of 1 - z^2 has moved to -pi.
    EXPECT_NEAR(p.tracked_arg(2.0, 3.0), -std::numbers::pi, 1e-12);
    const auto r = integrate_path([&](cplx z, double s) { return z * p(z, s); }, c, 1e-12);
    const cplx oracle = branch_oracle(2.0);
    EXPECT_NEAR(r.value.real(), oracle.real(), 1e-8);
    EXPECT_NEAR(r.value.imag(), oracle.imag(), 1e-8);
    EXPECT_NEAR(oracle.imag(), 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_GE(p.table_size(), 3u * 64u);
}

TEST(TrackedPowerTest, ArgumentContinuousAlongPath) {
    const auto c = build_contour(0.0, 2.0, {1.0}, 0.05);
    const TrackedPower p([](cplx z) { return 1.0 - z * z; }, 1.5, c);
    double prev = p.tracked_arg(c.point(0.0), 0.0);
    for (int k = 1; k <= 3000; ++k) {
        const double s = 3.0 * k / 3000.0;
        const double a = p.tracked_arg(c.point(s), s);
        ASSERT_LT(std::abs(a - prev), std::numbers::pi / 4.0);
        prev = a;
    }
}

TEST(Deformation, AnalyticIntegrandsPass) {
    const auto a = deformation_check([](cplx z) { return 1.0 / z; }, -1.0, 1.0, {0.0}, {0.05, 0.1, 0.2}, 1e-9);
    EXPECT_TRUE(a.pass);
    EXPECT_LT(a.spread, 1e-9);
    auto make = [](const Contour& c) {
        TrackedPower p([](cplx z) { return 1.0 - z * z; }, 1.5, c);
        return [p](cplx z, double s) { return z * p(z, s); };
    };
    const auto b = deformation_check(make, 0.0, 2.0, {1.0}, {0.05, 0.1}, 1e-8);
    EXPECT_TRUE(b.pass);
}

TEST(Deformation, NonAnalyticIntegrandFails) {
    // The detour of radius d picks up -i pi d^2.
    const auto r = deformation_check([](cplx z) { return std::conj(z); }, -1.0, 1.0, {0.0}, {0.05, 0.2}, 1e-6);
    EXPECT_FALSE(r.pass);
}

TEST(Deformation, RegularizedDensityNeedsNoDetour) {
    // Poles of the eps-density lie below the axis, so the real segment and
    // the upper detour give the same integral.
    const double eps = 0.05;
    const std::vector<double> t{0.3};
    auto f = [&](cplx xn) { return density_mu_eps(t, xn, 2, eps); };
    const auto straight = integrate_path(f, build_contour(-0.5, 0.5, {}, 0.0), 1e-12);
    const auto detour = integrate_path(f, build_contour(-0.5, 0.5, {0.0}, 0.2), 1e-12);
    EXPECT_LT(std::abs(straight.value - detour.value), 1e-9);
    auto g = [&](cplx xn) { return density_flattened_eps(t, xn, 2, eps); };
    const auto s2 = integrate_path(g, build_contour(-0.5, 0.5, {}, 0.0), 1e-12);
    const auto d2 = integrate_path(g, build_contour(-0.5, 0.5, {0.0}, 0.2), 1e-12);
    EXPECT_LT(std::abs(s2.value - d2.value), 1e-9);
}
