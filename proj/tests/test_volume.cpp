#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "xhyp/errors.hpp"
#include "xhyp/volume.hpp"

using namespace xhyp;

namespace {

constexpr double kPi = std::numbers::pi;

// Sector oracle: Theta ((1 - R^2)^{-1/2} - 1) with the antiderivative continued over the upper detour.
cplx sector_oracle(double theta, double r) { return theta * (lower_pow(1.0 - r * r, -0.5) - 1.0); }

const double kDiskArea = 2.0 * kPi * (2.0 / std::sqrt(3.0) - 1.0);

void expect_close(cplx a, cplx b, double tol) { EXPECT_LT(std::abs(a - b), tol) << a << " vs " << b; }

}  // namespace

TEST(Slice, BoxClosedFormMatchesDirectQuadrature) {
    // The x1 = 0 strip of the box slice at x3 = 1/2.
    const double s = 0.5;
    const cplx closed = detail::strip_kernel(0.0, 0.5, 0.0, 1.0) / (2.0 * 0.25);
    EXPECT_NEAR(closed.real(), (1.0 / (2.0 * 0.25)) * (1.0 / s) * std::atan(1.0 / s), 1e-14);
    EXPECT_NEAR(closed.real(), 4.42860, 1e-5);
    const std::vector<double> t{0.0, 0.0};
    auto direct = integrate_adaptive(
        [&](double x2) {
            const std::vector<double> tr{0.0, x2};
            return density_flattened_exact(tr, 0.5, 3);
        },
        0.0, 1.0, AdaptiveOptions{1e-14, 0.0});
    EXPECT_NEAR(direct.value.real(), closed.real(), 1e-12);

    // Whole slice against a 2D quadrature of the density.
    const Box3D box = make_box(-0.5, 0.5, -0.5, 0.5, 0.5);
    const cplx slice = slice_integral(box, -0.3);
    auto outer = integrate_adaptive(
        [&](double x1) {
            return integrate_adaptive(
                       [&](double x2) {
                           const std::vector<double> tr{x1, x2};
                           return density_flattened_exact(tr, -0.3, 3);
                       },
                       -0.5, 0.5, AdaptiveOptions{1e-14, 0.0})
                .value;
        },
        -0.5, 0.5, AdaptiveOptions{1e-13, 0.0});
    expect_close(slice, outer.value, 1e-11);
}

TEST(Slice, SectorAndTriangleAngularMeasure) {
    EXPECT_NEAR(angular_measure(Sector2D{kPi / 6.0, 2.0}, 0.7).real(), kPi / 6.0, 1e-15);
    EXPECT_NEAR(angular_measure(Sector2D{kPi / 6.0, 2.0}, 1.7).real(), kPi / 6.0, 1e-15);
    EXPECT_NEAR(angular_measure(make_polygon({{0, 0}, {2, 0}, {0, 2}}), 0.1).real(), kPi / 2.0, 1e-14);
}

TEST(Slice, ArctanCutIsRejected) {
    // s = 0.5 i makes x2 / s hit the cut of arctan for x2 = 0.5.
    EXPECT_THROW(detail::strip_kernel(0.0, cplx(1.0, 0.5), 0.0, 0.5), numerical_error);
}

TEST(Slice, OutsideAnalyticityRegion) {
    const auto tri = make_polygon({{0.46, 0.0}, {1.28, 0.0}, {0.46, 1.77}});
    EXPECT_THROW(slice_integral(tri, cplx(1.0, 0.5)), std::domain_error);
}

TEST(MuContour, SectorOracles) {
    expect_close(mu_contour(Sector2D{2.0 * kPi, std::numbers::sqrt2}, 1e-10).value, sector_oracle(2.0 * kPi, std::sqrt(2.0)),
                 1e-8);
    expect_close(mu_contour(Sector2D{2.0 * kPi, std::numbers::sqrt2}).value, cplx(-2.0 * kPi, 2.0 * kPi), 1e-8);
    expect_close(mu_contour(Sector2D{kPi / 6.0, 2.0}, 1e-10).value, (kPi / 6.0) * cplx(-1.0, 1.0 / std::sqrt(3.0)), 1e-8);
}

TEST(MuContour, DetourRadiusDoesNotMatter) {
    const Sector2D s{2.0 * kPi, 1.3};
    const cplx a = mu_contour(s, 1e-10, 0.02).value;
    const cplx b = mu_contour(s, 1e-10, 0.2).value;
    expect_close(a, b, 1e-8);
    EXPECT_THROW(mu_contour(s, 1e-10, 0.5), std::invalid_argument);
}

TEST(MuContour, InteriorDomainsMatchDirect) {
    const Sector2D disk{2.0 * kPi, 0.5};
    expect_close(mu_contour(disk).value, kDiskArea, 1e-10);
    expect_close(mu_direct(disk).value, kDiskArea, 1e-10);
    const Ball3D ball{{0, 0, 0}, 0.5};
    // 4 pi int_0^R r^2 (1 - r^2)^{-2} dr.
    const double r = 0.5;
    const double oracle = 4.0 * kPi * (r / (2.0 * (1.0 - r * r)) - 0.5 * std::atanh(r));
    expect_close(mu_contour(ball).value, oracle, 1e-10);
    expect_close(mu_direct(ball).value, oracle, 1e-10);
}

TEST(MuContour, UnsupportedFamilies) {
    EXPECT_THROW(mu_contour(Cone3D{}), unsupported_error);
    EXPECT_THROW(mu_contour(HolderGraph2D{}), unsupported_error);
}

TEST(MuEps, Theorem21Equivalence) {
    const auto sched = EpsSchedule::geometric();
    const std::vector<DomainSpec> domains{Sector2D{2.0 * kPi, std::numbers::sqrt2}, Sector2D{1.0, 1.6, 0.3, 2.0},
                                          make_polygon({{0, 0}, {2, 0}, {0, 2}}), make_box(-0.5, 0.5, -0.5, 0.5, 0.5),
                                          make_box(0.2, 0.7, -0.1, 0.4, 0.3), Ball3D{{0.3, 0.2, 0.0}, 1.0}};
    for (const auto& d : domains) {
        const auto c = mu_contour(d, 1e-9);
        for (DensityKind k : {DensityKind::KleinEps, DensityKind::MuEps}) {
            const auto e = mu_eps(d, k, sched, 1e-4);
            const double bound = std::max(1e-3, 10.0 * (c.error_estimate + e.error_estimate));
            EXPECT_LT(std::abs(c.value - e.value), bound) << domain_name(d) << " " << to_string(k);
        }
    }
}

TEST(MuEps, Remark36MuVersusFlattened) {
    const auto sched = EpsSchedule::geometric();
    for (const DomainSpec& d : {DomainSpec(make_box(-0.5, 0.5, -0.5, 0.5, 0.5)), DomainSpec(make_box(0.1, 0.9, 0.0, 0.5, 0.2))}) {
        const auto a = mu_eps(d, DensityKind::MuEps, sched, 1e-4);
        const auto b = mu_eps(d, DensityKind::FlattenedEps, sched, 1e-4);
        EXPECT_LT(std::abs(a.value - b.value), 1e-3);
    }
}

TEST(MuEps, InteriorDiskAllVariants) {
    const Sector2D disk{2.0 * kPi, 0.5};
    for (DensityKind k : {DensityKind::KleinEps, DensityKind::FlattenedEps, DensityKind::MuEps}) {
        std::vector<cplx> trace;
        const auto r = mu_eps(disk, k, EpsSchedule::geometric(), 1e-8, &trace);
        expect_close(r.value, kDiskArea, 1e-6);
        EXPECT_EQ(trace.size(), 13u);
    }
}

TEST(MuEps, RejectsExactVariantsAndImproperDomains) {
    EXPECT_THROW(mu_eps(Sector2D{}, DensityKind::KleinExact), std::invalid_argument);
    EXPECT_THROW(mu_eps(Cone3D{}, DensityKind::MuEps), unsupported_error);
}

TEST(MuEps, WedgePairCancellation) {
    Wedge3D w;
    w.x1_lo = -0.4;
    w.x1_hi = 0.6;
    w.c_coeffs = {0.1, 0.2, -0.3};
    w.d_coeffs = {1.0, 0.5};
    w.height = 0.4;
    const auto c = mu_contour(w, 1e-9);
    EXPECT_TRUE(std::isfinite(c.value.real()) && std::isfinite(c.value.imag()));
    const auto e = mu_eps(w, DensityKind::MuEps, EpsSchedule::geometric(), 1e-4);
    EXPECT_LT(std::abs(c.value - e.value), 1e-3);
}

TEST(SideSigns, LorentzDomains) {
    const auto s2 = mu_direct(Sector2D{1.0, 3.0, 1.5});
    EXPECT_LE(std::abs(s2.value.real()), 1e-12 * std::abs(s2.value));
    EXPECT_LT(s2.value.imag(), 0.0);
    expect_close(s2.value, sector_oracle(1.0, 3.0) - sector_oracle(1.0, 1.5), 1e-10);
    const auto tri = mu_direct(make_polygon({{1.5, -0.3}, {2.5, -0.2}, {2.0, 1.0}}));
    EXPECT_LE(std::abs(tri.value.real()), 1e-12 * std::abs(tri.value));
    EXPECT_LT(tri.value.imag(), 0.0);
    const auto box = mu_direct(Box3D{-0.5, 0.5, -0.5, 0.5, 0.1, 0.5});
    EXPECT_GT(box.value.real(), 0.0);
    EXPECT_LE(std::abs(box.value.imag()), 1e-12 * std::abs(box.value));
    EXPECT_THROW(mu_direct(Sector2D{}), std::invalid_argument);
}

TEST(MuDirect, ConeAndHolderGraphs) {
    const auto cone = mu_direct(Cone3D{1.0, 1e-3}, 1e-12);
    // Oracle: pi int_0^delta log1p(x^2 / (x - 1)^2) / (2 x^2) dx, integrand ~ pi / 2 near 0.
    const auto oracle = integrate_adaptive(
        [](double x) { return kPi * std::log1p(x * x / ((x - 1.0) * (x - 1.0))) / (2.0 * x * x); }, 0.0, 1e-3,
        AdaptiveOptions{1e-16, 0.0});
    EXPECT_NEAR(cone.value.real(), oracle.value, 1e-12);
    EXPECT_FALSE(cone.divergence_suspected);

    HolderGraph3D g;
    DivergenceProfile prof;
    const auto h = mu_direct(g, 1e-8, &prof);
    EXPECT_FALSE(h.divergence_suspected);
    EXPECT_EQ(prof.fitted_model, GrowthModel::Convergent);
    // arctan(g / s) / s <= g / s^2 <= 4 g, so the slice is at most 2 x^{-1/2}.
    EXPECT_GT(h.value.real(), 0.0);
    EXPECT_LT(h.value.real(), 4.0 * std::sqrt(0.5));

    HolderGraph3D log_graph;
    log_graph.profile = GraphProfile::LogRatio;
    log_graph.alpha = 0.0;
    EXPECT_TRUE(mu_direct(log_graph).divergence_suspected);

    EXPECT_TRUE(mu_direct(HolderGraph2D{0.4, 1.0, 0.5}).divergence_suspected);
    const auto conv = mu_direct(HolderGraph2D{0.7, 1.0, 0.5});
    EXPECT_FALSE(conv.divergence_suspected);
    EXPECT_EQ(conv.value.real(), 0.0);
    EXPECT_LT(conv.value.imag(), 0.0);
}

TEST(Invariance, TriangleBoostAndRotation) {
    const auto tri = make_polygon({{0, 0}, {2, 0}, {0, 2}});
    EXPECT_LT(mu_invariance_test(tri, Isometry::boost(2, 0, 0.5), 1e-11).deviation, 1e-5);
    EXPECT_LT(mu_invariance_test(tri, Isometry::rotation(2, 0, 1, kPi / 4.0), 1e-11).deviation, 1e-8);
    EXPECT_LT(mu_invariance_test(tri, Isometry::boost(2, 1, -0.3).then(Isometry::rotation(2, 0, 1, 0.4)), 1e-11).deviation,
              1e-6);
}

TEST(Invariance, BoxReflectionAndSectorRotation) {
    const auto box = make_box(0.1, 0.6, -0.5, 0.5, 0.5);
    EXPECT_LT(mu_invariance_test(box, Isometry::flattened_reflection(3, 0), 1e-10).deviation, 1e-6);
    EXPECT_THROW(mu_invariance_test(box, Isometry::boost(3, 0, 0.2)), unsupported_error);
    const Sector2D s{1.0, 1.5, 0.0, 0.3};
    const auto r = mu_invariance_test(s, Isometry::rotation(2, 0, 1, 0.9), 1e-10);
    EXPECT_NEAR(std::get<Sector2D>(r.image).start, 1.2, 1e-14);
    EXPECT_LT(r.deviation, 1e-8);
}

TEST(Invariance, ImageThroughInfinityIsRejected) {
    const auto tri = make_polygon({{0, 0}, {3, 0}, {0, 3}});
    EXPECT_THROW(image_domain(tri, Isometry::boost(2, 0, -1.0)), unsupported_error);
}

TEST(Additivity, ThreeSplits) {
    EXPECT_LT(additivity_test(Sector2D{}, Hyperplane{{0.0, 1.0}, 0.0}, 1e-11).deviation, 1e-8);
    const auto s = split_domain(Sector2D{}, Hyperplane{{0.0, 1.0}, 0.0});
    ASSERT_EQ(s.positive.size(), 1u);
    ASSERT_EQ(s.negative.size(), 1u);
    EXPECT_NEAR(std::get<Sector2D>(s.positive[0]).angle, kPi, 1e-15);

    const auto tri = make_polygon({{0, 0}, {2, 0}, {0, 2}});
    EXPECT_LT(additivity_test(tri, Hyperplane{{1.0, -1.0}, 0.0}, 1e-11).deviation, 1e-6);
    EXPECT_LT(additivity_test(tri, Hyperplane{{1.0, 0.0}, 0.7}, 1e-11).deviation, 1e-6);
    EXPECT_LT(additivity_test(make_box(-0.5, 0.5, -0.5, 0.5, 0.5), Hyperplane{{1.0, 0.0, 0.0}, 0.0}, 1e-10).deviation,
              1e-6);
    EXPECT_THROW(split_domain(make_box(-0.5, 0.5, -0.5, 0.5, 0.5), Hyperplane{{0.0, 0.0, 1.0}, 0.0}), unsupported_error);
}
