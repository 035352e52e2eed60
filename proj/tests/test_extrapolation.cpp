#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "xhyp/extrapolation.hpp"
#include "xhyp/quadrature.hpp"

using namespace xhyp;

TEST(Schedule, GeometricDefaults) {
    const auto s = EpsSchedule::geometric();
    ASSERT_EQ(s.eps_values.size(), 13u);
    EXPECT_DOUBLE_EQ(s.eps_values.front(), 0.1);
    EXPECT_DOUBLE_EQ(s.eps_values[1], 0.05);
    EXPECT_EQ(s.extrapolation_order, 4);
    EXPECT_THROW(EpsSchedule::geometric(0.1, 1.5), std::invalid_argument);
    EpsSchedule bad{{0.1, 0.2}, 2};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(EpsLimit, LinearIsExact) {
    const auto r = eps_limit([](double e) { return cplx(3.0 + 2.0 * e); }, EpsSchedule::geometric(0.1, 0.5, 13, 1));
    EXPECT_NEAR(r.value.real(), 3.0, 1e-12);
    EXPECT_FALSE(r.divergence_suspected);
}

TEST(EpsLimit, PolynomialsUpToOrderAreExact) {
    for (int order = 0; order <= 5; ++order) {
        auto poly = [order](double e) {
            cplx v = 0.0;
            for (int k = order; k >= 0; --k) v = v * e + cplx(1.0 + k, -0.5 * k);
            return v;
        };
        const auto r = eps_limit(poly, EpsSchedule::geometric(0.1, 0.5, 13, order));
        EXPECT_NEAR(r.value.real(), 1.0, 1e-12) << order;
        EXPECT_NEAR(r.value.imag(), 0.0, 1e-12) << order;
    }
}

TEST(EpsLimit, Sokhotski) {
    auto integral = [](double eps) {
        const std::vector<double> pts{-1.0, 0.0, 1.0};
        return integrate_adaptive([eps](double x) { return 1.0 / cplx(x, eps); }, std::span<const double>(pts),
                                  AdaptiveOptions{1e-13, 0.0});
    };
    std::vector<cplx> trace;
    const auto r = eps_limit(integral, EpsSchedule::geometric(), &trace);
    EXPECT_EQ(trace.size(), 13u);
    EXPECT_NEAR(r.value.real(), 0.0, 1e-6);
    EXPECT_NEAR(r.value.imag(), -std::numbers::pi, 1e-6);
    EXPECT_GT(r.evaluations, 13);
}

TEST(EpsLimit, DivergenceFlag) {
    const auto r = eps_limit([](double e) { return cplx(1.0 / e); }, EpsSchedule::geometric());
    EXPECT_TRUE(r.divergence_suspected);
    EXPECT_FALSE(r.converged);
}
