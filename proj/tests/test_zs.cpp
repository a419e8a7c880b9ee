#include <cmath>

#include <gtest/gtest.h>

#include <fredhier/tau.hpp>
#include <fredhier/zs.hpp>

using namespace fredhier;

namespace {
const KernelFunction kGauss = KernelFunction::gaussian();
const MeasureSpec kDelta = MeasureSpec::projector();

double dist(const Mat2& a, const Mat2& b) { return (a - b).cwiseAbs().maxCoeff(); }
}  // namespace

TEST(Reflection, GaussianClosedForm) {
    for (double gamma : {0.3, 1.0})
        for (double z : {-1.5, 0.0, 0.7, 2.0}) {
            const Cplx r = reflection_coefficient(KernelFunction::gaussian(gamma), z);
            EXPECT_NEAR(std::abs(r - (-kI * std::sqrt(gamma) * std::exp(-z * z / 4.0))), 0.0, 1e-15);
        }
    EXPECT_NEAR(std::abs(reflection_coefficient(kGauss, 0.0) + kI), 0.0, 1e-15);
}

// Int e^{-izu} Ai(u) du = e^{iz^3/3}
TEST(Reflection, AiryQuadratureOnAxis) {
    const KernelFunction ai = KernelFunction::airy();
    const Cplx a = fourier_profile(ai, 1.3, 80.0), b = fourier_profile(ai, 1.3, 160.0);
    EXPECT_LT(std::abs(a - b), 1e-8);
    EXPECT_LT(std::abs(a - std::exp(kI * std::pow(1.3, 3) / 3.0)), 1e-8);
}

TEST(Reflection, DivergentCases) {
    try {
        fourier_profile(KernelFunction::airy(), Cplx(1.0, -0.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::DivergentIntegral);
    }
    EXPECT_THROW(fourier_profile(KernelFunction::higher_airy(2), 1.0), Error);
}

TEST(Laurent, FarRightStructure) {
    const auto T = compute_table(kGauss, kDelta, 6.0, 1);
    const LaurentStack st = laurent_stack(T, 2);
    const double q0 = T.q[0](0), u0 = T.u[0](0, 0);
    EXPECT_NEAR(q0, eval(kGauss, 0, 6.0), 1e-20);
    EXPECT_NEAR(u0, integrate_adaptive([](double y) { double a = eval(kGauss, 0, 6.0 + y); return a * a; }, 0.0, 10.0, 1e-40, 1e-13), 1e-30);
    Mat2 X1;
    X1 << -kI * u0, q0, q0, kI * u0;
    EXPECT_EQ(dist(st.X[0], X1), 0.0);
}

TEST(Laurent, ConservationReproducesInvariants) {
    const auto T = compute_table(kGauss, kDelta, 0.0, 6);
    for (int p : {2, 4, 6}) EXPECT_LT(conservation_defect(T, p), 1e-8) << p;
    EXPECT_LT(flow_invariant(T, 0).I, 1e-8);
    EXPECT_LT(flow_invariant(T, 1).I, 1e-8);
}

TEST(Laurent, Errors) {
    const auto T = compute_table(kGauss, kDelta, 0.0, 2);
    EXPECT_THROW(laurent_stack(T, 5), Error);
    EXPECT_THROW(laurent_stack(compute_table(KernelFunction::airy(), MeasureSpec::fermi(1.0), 0.0, 1), 1), Error);
}

TEST(Laurent, TailDecaysFasterThanTruncationOrder) {
    const int P = 3;
    const LaurentTail lt = laurent_tail(kGauss, 0.0, P, {10.0, 20.0, 40.0});
    EXPECT_LE(lt.slope, -(P + 1) + 0.2);
}

// far right X - I is the r(z) e^{isz} term alone: 1.6e-4 at z = 2+i, 1.3e-10 at z = 2+3i
TEST(Rhp, FarRightUpperHalf) {
    const double s = 8.0;
    for (Cplx z : {Cplx(2.0, 1.0), Cplx(2.0, 3.0)}) {
        const Mat2 X = evaluate_X(kGauss, s, z).X;
        Mat2 ref = Mat2::Identity();
        ref(1, 0) = reflection_coefficient(kGauss, z) * std::exp(kI * s * z);
        EXPECT_LT(dist(X, ref), 1e-7) << z;
    }
    EXPECT_LT(dist(evaluate_X(kGauss, s, Cplx(2.0, 3.0)).X, Mat2::Identity()), 1e-7);
}

TEST(Rhp, AtOriginMatchesTauIntegral) {
    const double s = -0.5;
    const Mat2 X = evaluate_X(kGauss, s, 0.0, RhpBranch::Principal).X;
    const double mu = -tau_profile(kGauss, s).int_q0;
    Mat2 ref;
    ref << std::cosh(mu), kI * std::sinh(mu), -kI * std::sinh(mu), std::cosh(mu);
    EXPECT_LT(dist(X, ref), 1e-9);
}

TEST(Rhp, JumpResiduals) {
    EXPECT_LT(jump_residual(kGauss, 0.0, 1.0), 1e-6);
    EXPECT_LT(jump_residual(KernelFunction::gaussian(0.3), -1.0, 0.5), 1e-6);
    EXPECT_LT(jump_residual(KernelFunction::airy(), 0.0, 1.0), 1e-6);
    EXPECT_EQ(jump_residual(KernelFunction::gaussian(0.0), 0.0, 0.8), 0.0);
}

TEST(Rhp, ZsOdeResiduals) {
    const auto r = zs_ode_residual(kGauss, 0.0, Cplx(1.0, 0.5), 1e-3);
    EXPECT_LT(r.direct, 1e-5);
    EXPECT_LT(r.inverse, 1e-5);
}

// Far right X - I is the single term r e^{isz} (or its lower-half analogue),
// whose central difference is off by (h^2/6)|z|^3 |X - I|; that is the whole residual.
TEST(Rhp, ZsOdeFarRightIsTruncationError) {
    const double s = 8.0;
    for (Cplx z : {Cplx(0.5, 0.0), Cplx(1.5, 1.0), Cplx(-2.0, -0.5)}) {
        const RhpBranch br = z.imag() == 0.0 ? RhpBranch::BoundaryPlus : interior_branch(z);
        const double off = (evaluate_X(kGauss, s, z, br).X - Mat2::Identity()).cwiseAbs().maxCoeff();
        for (double h : {1e-3, 1e-4}) {
            const auto f = zs_ode_residual(kGauss, s, z, h);
            const double bound = 1.1 * h * h / 6.0 * std::pow(std::abs(z), 3) * off + 1e-12;
            EXPECT_LT(f.direct, bound) << z << " h=" << h;
            EXPECT_LT(f.inverse, bound) << z << " h=" << h;
        }
        EXPECT_LT(zs_ode_residual(kGauss, s, z, 1e-4).direct, 1e-8) << z;
    }
}

TEST(Rhp, Errors) {
    const ZsSolution sol(kGauss, 0.0, zs_grid(kGauss, 0.0));
    try {
        sol.evaluate(Cplx(1.0, 10.0), RhpBranch::UpperHalf);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ExponentialOverflow);
    }
    EXPECT_THROW(sol.evaluate(Cplx(1.0, 0.0), RhpBranch::UpperHalf), Error);
    EXPECT_THROW(sol.evaluate(Cplx(1.0, 0.5), RhpBranch::BoundaryPlus), Error);
    EXPECT_THROW(sol.evaluate(Cplx(1.0, 0.0), RhpBranch::Principal), Error);
    EXPECT_THROW(evaluate_X(kGauss, 0.0, 1.0), Error);
    const ZsSolution other(kGauss, 0.001, zs_grid(kGauss, 0.001));
    try {
        zs_ode_residual(ZsSolution(kGauss, -0.001, zs_grid(kGauss, -0.001)), sol, other, 1.0, 1e-3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::GridMismatch);
    }
}

TEST(RhpProperty, UnitDeterminant) {
    for (double s : {-2.0, -1.0, 0.0, 1.0, 3.0}) {
        const ZsSolution sol(kGauss, s, zs_grid(kGauss, s));
        for (Cplx z : {Cplx(0.5, 0.0), Cplx(2.0, 0.0), Cplx(1.0, 0.7), Cplx(-0.5, 1.5), Cplx(1.2, -0.8)}) {
            const RhpBranch br = z.imag() == 0.0 ? RhpBranch::BoundaryMinus : interior_branch(z);
            EXPECT_LT(std::abs(sol.evaluate(z, br).X.determinant() - 1.0), 1e-9) << s << " " << z;
        }
    }
}

TEST(RhpProperty, FirstCoefficientOffDiagonalRealAndEqual) {
    for (const KernelFunction& f : {kGauss, KernelFunction::airy(0.5), KernelFunction::higher_airy(2)})
        for (double s : {-1.0, 0.0, 2.0}) {
            const LaurentStack st = laurent_stack(compute_table(f, kDelta, s, 3), 4);
            EXPECT_EQ(st.X[0](0, 1).imag(), 0.0);
            EXPECT_EQ(st.X[0](0, 1), st.X[0](1, 0));
        }
}
