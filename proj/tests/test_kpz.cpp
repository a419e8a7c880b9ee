#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <fredhier/kpz.hpp>
#include <fredhier/tau.hpp>

#include "oracle_values.hpp"

using namespace fredhier;

TEST(Kpz, AgainstGradedAiryKernelOracle) {
    for (const auto& o : oracle::kKpz)
        EXPECT_NEAR(droplet_generating_function({o.t, o.s}), o.det, 1e-10) << "t=" << o.t << " s=" << o.s;
}

TEST(Kpz, LiftedRouteAgrees) {
    for (const KpzQuery q : {KpzQuery{1.0, -1.0}, KpzQuery{50.0, 0.5}, KpzQuery{1e4, -2.0}})
        EXPECT_NEAR(droplet_generating_function(q), droplet_lifted(q), 1e-12) << q.t << " " << q.s;
}

// 1 - Det = Tr(sigma K_Ai) - O(Tr^2); at (t, s) = (1, 8) that is 1.03e-4
TEST(Kpz, FarRightIsFirstOrderTrace) {
    const KpzQuery q{1.0, 8.0};
    const MeasureSpec sig = q.weight();
    const double trace = integrate_adaptive([&](double u) { return sig.sigma(u) * airy_kernel(u, u); }, -60.0, 30.0,
                                            1e-20, 1e-13);
    const double delta = 1.0 - droplet_generating_function(q);
    EXPECT_NEAR(delta, trace, 1e-7);
    EXPECT_LT(delta, 1e-3);
    EXPECT_GT(droplet_generating_function({1.0, 30.0}), 1.0 - 1e-10);
}

TEST(Kpz, ModerateTimeNearF2) {
    EXPECT_NEAR(droplet_generating_function({1000.0, 0.0}), tracy_widom(2, 0.0), 5e-2);
}

TEST(Kpz, AiryKernelDiagonalIsContinuous) {
    for (double x : {-5.0, -0.3, 2.0})
        EXPECT_NEAR(airy_kernel(x, x), airy_kernel(x, x + 1e-6), 1e-6) << x;
}

TEST(Kpz, GridAndErrors) {
    EXPECT_EQ(kpz_grid({1.0, 0.0}).kind, GridKind::RealLineTruncated);
    const QuadratureGrid g = kpz_grid({1e6, 0.0});
    EXPECT_EQ(g.kind, GridKind::GradedAtPoint);
    EXPECT_EQ(g.split, 0.0);
    EXPECT_THROW(droplet_generating_function({0.0, 0.0}), Error);
    EXPECT_THROW(droplet_generating_function({-1.0, 0.0}), Error);
}

TEST(KpzProperty, SymmetrizedWeightEquivalence) {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> lt(0.0, 6.0), us(-3.0, 3.0);
    for (int k = 0; k < 5; ++k) {
        const KpzQuery q{std::pow(10.0, lt(gen)), us(gen)};
        const QuadratureGrid g = kpz_grid(q);
        EXPECT_NEAR(fredholm_det(kpz_operator(q, g, true)), fredholm_det(kpz_operator(q, g, false)), 1e-10)
            << q.t << " " << q.s;
    }
}

TEST(KpzProperty, MonotoneInS) {
    for (double t : {1.0, 100.0}) {
        double prev = 0.0;
        for (double s = -5.0; s <= 5.0; s += 0.5) {
            const double d = droplet_generating_function({t, s});
            EXPECT_GT(d, prev) << t << " " << s;
            EXPECT_LT(d, 1.0);
            prev = d;
        }
    }
}

// |Det - F2| over t = 10, 1e3, 1e6. The signed gap changes sign between t = 3
// and t = 10 at s = -2, so there the t = 10 gap undercuts the t = 1e3 one; the
// graded oracle shows the same ordering.
TEST(KpzProperty, LongTimeCollapse) {
    for (double s : {-2.0, 0.0, 2.0}) {
        const double f2 = tracy_widom(2, s);
        const double g1 = std::abs(droplet_generating_function({10.0, s}) - f2);
        const double g2 = std::abs(droplet_generating_function({1e3, s}) - f2);
        const double g3 = std::abs(droplet_generating_function({1e6, s}) - f2);
        EXPECT_LT(g3, 1e-2) << s;
        EXPECT_LT(g3, g2) << s;
        if (s == -2.0) {
            EXPECT_GT(g2, g1);
            EXPECT_LT(droplet_generating_function({3.0, s}) - f2, 0.0);
            EXPECT_GT(droplet_generating_function({10.0, s}) - f2, 0.0);
        } else {
            EXPECT_LT(g2, g1) << s;
        }
    }
}
