#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "xhyp/errors.hpp"
#include "xhyp/geometry.hpp"

using namespace xhyp;

TEST(Minkowski, InnerProductSigns) {
    const auto t = ModelPoint::ambient({1, 0, 0});
    const auto s = ModelPoint::ambient({0, 1, 0});
    const auto l = ModelPoint::ambient({1, 1, 0});
    EXPECT_DOUBLE_EQ(minkowski_inner(t, t), -1.0);
    EXPECT_DOUBLE_EQ(minkowski_inner(s, s), 1.0);
    EXPECT_DOUBLE_EQ(minkowski_inner(l, l), 0.0);
    EXPECT_THROW(minkowski_inner(t, ModelPoint::ambient({1, 0, 0, 0})), std::invalid_argument);
}

TEST(ModelPointTest, CoordinateCountsAndClassification) {
    EXPECT_THROW(ModelPoint::klein({0.1, 0.2, 0.3, 0.4}), std::invalid_argument);
    EXPECT_EQ(classify(ModelPoint::klein({0.3, 0.4})), Region::Hyperbolic);
    EXPECT_EQ(classify(ModelPoint::klein({1.0, 1.0})), Region::Lorentz);
    EXPECT_EQ(classify(ModelPoint::klein({0.6, 0.8})), Region::LightCone);
    EXPECT_EQ(classify(ModelPoint::flattened({0.3, -0.2})), Region::Hyperbolic);
    EXPECT_EQ(classify(ModelPoint::flattened({0.3, 0.2, 0.1})), Region::Lorentz);
    EXPECT_EQ(classify(ModelPoint::flattened({0.3, 0.0})), Region::LightCone);
}

TEST(Cayley, Examples) {
    const auto a = cayley(ModelPoint::klein({0.0, 0.0}));
    EXPECT_EQ(a.model(), Model::Flattened);
    EXPECT_NEAR(a[0], 0.0, 1e-15);
    EXPECT_NEAR(a[1], -1.0, 1e-15);
    const auto b = cayley(ModelPoint::klein({1.0, 0.0}));
    EXPECT_NEAR(b[0], 1.0, 1e-15);
    EXPECT_NEAR(b[1], 0.0, 1e-15);
    const auto c = cayley(cayley(ModelPoint::klein({0.3, 0.4})));
    EXPECT_EQ(c.model(), Model::Klein);
    EXPECT_NEAR(c[0], 0.3, 1e-12);
    EXPECT_NEAR(c[1], 0.4, 1e-12);
    EXPECT_THROW(cayley(ModelPoint::klein({0.0, 1.0})), singular_point_error);
}

TEST(Cayley, InvolutionOnRandomPoints) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> logr(std::log(0.1), std::log(10.0));
    for (int n : {2, 3}) {
        for (int k = 0; k < 10000; ++k) {
            std::vector<double> dir(n);
            double norm = 0.0;
            for (auto& d : dir) {
                d = u(rng);
                norm += d * d;
            }
            norm = std::sqrt(norm);
            const double r = std::exp(logr(rng));
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) x[i] = r * dir[i] / norm + (i == n - 1 ? 1.0 : 0.0);
            const ModelPoint p(Model::Klein, n, x);
            const auto q = cayley(cayley(p));
            for (int i = 0; i < n; ++i) ASSERT_NEAR(q[i], p[i], 1e-10 * std::max(1.0, std::abs(p[i])));
        }
    }
}

TEST(Cayley, JacobianMatchesFiniteDifferences) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n : {2, 3}) {
        for (int k = 0; k < 200; ++k) {
            std::vector<double> x(n);
            for (auto& v : x) v = u(rng);
            if (cayley_alpha(x) < 0.1) continue;
            // Central differences of sigma, determinant by cofactor expansion.
            const double h = 1e-6;
            double J[3][3] = {};
            for (int j = 0; j < n; ++j) {
                std::vector<double> p = x, m = x;
                p[j] += h;
                m[j] -= h;
                cayley_inplace(p);
                cayley_inplace(m);
                for (int i = 0; i < n; ++i) J[i][j] = (p[i] - m[i]) / (2 * h);
            }
            const double det = n == 2 ? J[0][0] * J[1][1] - J[0][1] * J[1][0]
                                      : J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                                            J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                                            J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
            const double jac = cayley_jacobian(x);
            ASSERT_NEAR(std::abs(det), jac, 1e-6 * jac);
        }
    }
}

TEST(Cayley, SidesCorrespond) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 2000; ++k) {
        const auto p = ModelPoint::klein({u(rng), u(rng), u(rng)});
        if (std::abs(p.norm2() - 1.0) < 1e-6 || cayley_alpha(p.coords()) < 1e-6) continue;
        const auto q = cayley(p);
        ASSERT_EQ(classify(q), classify(p));
    }
}

TEST(AxisMap, ValuesAndMonotonicity) {
    EXPECT_NEAR(axis_coordinate_map(1.0), 0.0, 1e-15);
    EXPECT_NEAR(axis_coordinate_map(3.0), 0.5, 1e-15);
    double prev = -INFINITY;
    for (double r = 0.1; r <= 5.0 + 1e-12; r += 0.1) {
        const double v = axis_coordinate_map(r);
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_THROW(axis_coordinate_map(0.0), std::domain_error);
}

TEST(IsometryTest, IdentityAndBoost) {
    const auto p = apply_isometry(Isometry::identity(2), ModelPoint::klein({0.5, 0.2}));
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.2);
    const auto q = apply_isometry(Isometry::boost(2, 0, 1.0), ModelPoint::klein({0.0, 0.0}));
    EXPECT_NEAR(q[0], std::tanh(1.0), 1e-15);
    EXPECT_NEAR(q[1], 0.0, 1e-15);
    EXPECT_LT(q.norm2(), 1.0);
}

TEST(IsometryTest, FlattenedReflection) {
    const auto g0 = Isometry::flattened_reflection(3, 0);
    const auto p = apply_isometry(g0, ModelPoint::flattened({0.1, 0.2, 0.3}));
    EXPECT_DOUBLE_EQ(p[0], -0.1);
    EXPECT_DOUBLE_EQ(p[1], 0.2);
    EXPECT_DOUBLE_EQ(p[2], 0.3);
    EXPECT_THROW(apply_isometry(g0, ModelPoint::ambient({1, 0, 0, 0})), std::invalid_argument);
    EXPECT_THROW(Isometry::flattened_reflection(3, 2), std::invalid_argument);
}

TEST(IsometryTest, ProjectiveInfinity) {
    // The boost sends x1 = -tanh(t)^{-1} to infinity.
    const double t = 0.7;
    EXPECT_THROW(apply_isometry(Isometry::boost(2, 0, t), ModelPoint::klein({-1.0 / std::tanh(t), 0.3})),
                 singular_point_error);
}

TEST(IsometryTest, RejectsNonLorentzMatrix) {
    IsoMatrix m = IsoMatrix::Identity(3, 3);
    m(1, 1) = 2.0;
    EXPECT_THROW(Isometry::lorentz(m), std::invalid_argument);
}

TEST(IsometryTest, RandomCompositionsPreserveFormAndSphere) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_int_distribution<int> pick(0, 1);
    for (int n : {2, 3}) {
        std::uniform_int_distribution<int> axis(0, n - 1);
        for (int k = 0; k < 200; ++k) {
            Isometry g = Isometry::identity(n);
            for (int s = 0; s < 5; ++s) {
                if (pick(rng) == 0) {
                    g = g.then(Isometry::boost(n, axis(rng), u(rng)));
                } else {
                    const int i = axis(rng);
                    const int j = (i + 1) % n;
                    g = g.then(Isometry::rotation(n, i, j, 2.0 * u(rng)));
                }
            }
            ASSERT_TRUE(g.preserves_form(1e-10));
            std::vector<double> x(n);
            double norm = 0.0;
            for (auto& v : x) {
                v = u(rng);
                norm += v * v;
            }
            for (auto& v : x) v /= std::sqrt(norm);
            try {
                const auto y = apply_isometry(g, ModelPoint(Model::Klein, n, x));
                ASSERT_NEAR(y.norm2(), 1.0, 1e-10 * std::max(1.0, y.norm2()));
            } catch (const singular_point_error&) {
                // Image at infinity; the sphere is still preserved projectively.
            }
        }
    }
}

TEST(IsometryTest, FlattenedActionConjugatesByCayley) {
    const auto g = Isometry::boost(2, 0, 0.4);
    const auto x = ModelPoint::flattened({0.2, -0.3});
    const auto direct = apply_isometry(g, x);
    const auto via = cayley(apply_isometry(g, cayley(x)));
    EXPECT_NEAR(direct[0], via[0], 1e-14);
    EXPECT_NEAR(direct[1], via[1], 1e-14);
    EXPECT_EQ(classify(direct), Region::Hyperbolic);
}
