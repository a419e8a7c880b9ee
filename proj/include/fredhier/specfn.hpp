#ifndef FREDHIER_SPECFN_HPP
#define FREDHIER_SPECFN_HPP

#include <array>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "error.hpp"
#include "quadrature.hpp"

namespace fredhier {

inline constexpr int kMaxDerivative = 12;

enum class Family { Gaussian, Airy, HigherAiry };

inline const char* family_name(Family f) {
    switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Airy: return "airy";
    case Family::HigherAiry: return "higher-airy";
    }
    return "?";
}

// Profile A entering A_s(x, y) = A(x + y + s).
//   Gaussian:   A(x) = amplitude * exp(-x^2) / sqrt(pi)
//   Airy:       A = amplitude * Ai
//   HigherAiry: A = amplitude * Ai_{2n+1}, the solution of A^(2n) = x A that
//               decays at +infinity (Laplace contour with rays at +-(pi - pi/(2n+1))).
// amplitude is sqrt(gamma) for a thinned problem.
struct KernelFunction {
    Family family = Family::Airy;
    int n = 1;
    double amplitude = 1.0;

    static KernelFunction gaussian(double gamma = 1.0) {
        return {Family::Gaussian, 0, std::sqrt(gamma)};
    }
    static KernelFunction airy(double gamma = 1.0) { return {Family::Airy, 1, std::sqrt(gamma)}; }
    static KernelFunction higher_airy(int order, double gamma = 1.0) {
        if (order < 1 || order > 4)
            throw Error(Errc::UnsupportedOrder, "higher Airy order must be in 1..4");
        return {Family::HigherAiry, order, std::sqrt(gamma)};
    }
    bool airy_type() const { return family != Family::Gaussian; }
    KernelFunction with_gamma(double gamma) const {
        KernelFunction k = *this;
        k.amplitude = std::sqrt(gamma);
        return k;
    }
    std::string describe() const {
        std::string d = family_name(family);
        if (family == Family::HigherAiry) d += "(n=" + std::to_string(n) + ")";
        return d;
    }
};

namespace detail {

// Ai and Ai' for real x: Maclaurin series in extended precision on [-8, 2],
// steepest-descent integral for x > 2, asymptotic expansion for x < -8.
inline std::array<double, 2> airy_pair(double x) {
    constexpr long double c1 = 0.355028053887817239260063186004183L;
    constexpr long double c2 = 0.258819403792806798405183560189203L;
    if (x >= -8.0 && x <= 2.0) {
        const long double X = x, x3 = X * X * X;
        long double f = 1, g = X, t = 1, u = X;
        long double df = 0, dg = 1, a = X * X / 2, b = 1;
        df = a;
        for (int k = 1; k < 200; ++k) {
            t *= x3 / ((3.0L * k - 1) * (3.0L * k));
            u *= x3 / ((3.0L * k) * (3.0L * k + 1));
            if (k >= 2) {
                a *= x3 / ((3.0L * k - 3) * (3.0L * k - 1));
                df += a;
            }
            b *= x3 / ((3.0L * k) * (3.0L * k - 2));
            f += t;
            g += u;
            dg += b;
            const long double m = std::fabs(t) + std::fabs(u) + std::fabs(a) + std::fabs(b);
            if (k > 4 && m < 1e-24L) break;
        }
        return {double(c1 * f - c2 * g), double(c1 * df - c2 * dg)};
    }
    if (x > 2.0) {
        static const GaussRule rule = gauss_legendre(96);
        constexpr double wmax = 6.5;
        const double sx = std::sqrt(x), q = std::pow(x, -0.25), zeta = 2.0 / 3.0 * x * sx;
        double ia = 0.0, ib = 0.0;
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            const double w = 0.5 * wmax * (rule.x[k] + 1.0), wt = 0.5 * wmax * rule.w[k];
            const double v = w * q, ph = v * v * v / 3.0, e = std::exp(-w * w) * wt;
            ia += e * std::cos(ph);
            ib += e * (sx * std::cos(ph) + v * std::sin(ph));
        }
        const double pre = std::exp(-zeta) / std::numbers::pi * q;
        return {pre * ia, -pre * ib};
    }
    const double y = -x, zeta = 2.0 / 3.0 * y * std::sqrt(y);
    double su0 = 0, su1 = 0, sv0 = 0, sv1 = 0;
    double uk = 1.0, zp = 1.0, last = 1e300;
    for (int k = 0; k < 80; ++k) {
        if (k > 0) uk *= (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
        const double vk = k == 0 ? 1.0 : -(6.0 * k + 1) / (6.0 * k - 1) * uk;
        const double tu = uk / zp, tv = vk / zp;
        if (std::abs(tu) > last) break;
        last = std::abs(tu);
        const double sg = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            su0 += sg * tu;
            sv0 += sg * tv;
        } else {
            su1 += sg * tu;
            sv1 += sg * tv;
        }
        if (last < 1e-18) break;
        zp *= zeta;
    }
    const double ph = zeta - std::numbers::pi / 4, c = std::cos(ph), s = std::sin(ph);
    const double y4 = std::pow(y, 0.25), rp = 1.0 / std::sqrt(std::numbers::pi);
    return {rp / y4 * (c * su0 + s * su1), rp * y4 * (s * sv0 - c * sv1)};
}

// Ai^(0..pmax) via A^(k+2) = x A^(k) + k A^(k-1).
inline void airy_derivs(double x, int pmax, double* out) {
    auto [a0, a1] = airy_pair(x);
    out[0] = a0;
    if (pmax >= 1) out[1] = a1;
    for (int k = 0; k + 2 <= pmax; ++k)
        out[k + 2] = x * out[k] + (k >= 1 ? k * out[k - 1] : 0.0);
}

using CVec = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1, 0, kMaxDerivative + 1, 1>;

// Ai_{2n+1}^(0..pmax)(x) = (1/pi) Im[ e^{ia} Int_0^inf (r e^{ia})^p exp(-r^m/m + x r e^{ia}) dr ],
// m = 2n+1, a = pi - pi/m.
inline void contour_airy_derivs(int n, double x, int pmax, double* out) {
    const int m = 2 * n + 1;
    const double alpha = std::numbers::pi - std::numbers::pi / m;
    const std::complex<double> e(std::cos(alpha), std::sin(alpha));
    const double c = std::cos(std::numbers::pi / m);
    auto logmag = [&](double r) {
        return -std::pow(r, m) / m - x * c * r + pmax * std::log(std::max(r, 1.0));
    };
    const double rpk = x < 0 ? std::pow(-x * c, 1.0 / (m - 1)) : 0.0;
    const double gpeak = std::max(logmag(rpk), logmag(std::max(rpk, 1.0)));
    double R = std::max(2.0, 2.0 * rpk);
    while (logmag(R) > gpeak - 42.0) R *= 1.25;
    auto integrand = [&](double r) {
        CVec v(pmax + 1);
        const std::complex<double> t = r * e;
        std::complex<double> base = e * std::exp(-std::pow(r, m) / m + x * t);
        for (int p = 0; p <= pmax; ++p) {
            v[p] = base;
            base *= t;
        }
        return v;
    };
    CVec zero = CVec::Zero(pmax + 1);
    // split at the peak so the adaptive rule sees the bump
    const double abs_tol = 1e-17 * std::exp(gpeak) * R;
    CVec total = zero;
    if (rpk > 0 && rpk < R) {
        total += integrate_adaptive(integrand, 0.0, rpk, zero, abs_tol, 0.0);
        total += integrate_adaptive(integrand, rpk, R, zero, abs_tol, 0.0);
    } else {
        total = integrate_adaptive(integrand, 0.0, R, zero, abs_tol, 0.0);
    }
    for (int p = 0; p <= pmax; ++p) out[p] = total[p].imag() / std::numbers::pi;
}

inline void gaussian_derivs(double x, int pmax, double* out) {
    // A^(p) = (-1)^p H_p(x) e^{-x^2} / sqrt(pi), physicists' Hermite
    const double g = std::exp(-x * x) / std::sqrt(std::numbers::pi);
    double h0 = 1.0, h1 = 2.0 * x;
    out[0] = g;
    if (pmax >= 1) out[1] = -h1 * g;
    for (int k = 1; k + 1 <= pmax; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
        out[k + 1] = ((k + 1) % 2 == 0 ? 1.0 : -1.0) * h2 * g;
    }
}

inline void check_args(const KernelFunction& f, int pmax, double x) {
    if (!std::isfinite(x)) throw Error(Errc::NonFinite, "profile argument is not finite");
    if (pmax < 0 || pmax > kMaxDerivative)
        throw Error(Errc::UnsupportedOrder, "derivative order " + std::to_string(pmax) +
                                                " outside 0.." + std::to_string(kMaxDerivative));
    (void)f;
}

}  // namespace detail

// A^(0..pmax)(x) written to out[0..pmax].
inline void eval_upto(const KernelFunction& f, int pmax, double x, double* out) {
    detail::check_args(f, pmax, x);
    switch (f.family) {
    case Family::Gaussian: detail::gaussian_derivs(x, pmax, out); break;
    case Family::Airy: detail::airy_derivs(x, pmax, out); break;
    case Family::HigherAiry: detail::contour_airy_derivs(f.n, x, pmax, out); break;
    }
    for (int p = 0; p <= pmax; ++p) out[p] *= f.amplitude;
}

inline double eval(const KernelFunction& f, int p, double x) {
    std::array<double, kMaxDerivative + 1> buf{};
    eval_upto(f, p, x, buf.data());
    return buf[p];
}

// |A^(2n)(x) - x A(x)| from the evaluator's own derivatives.
inline double ode_residual(const KernelFunction& f, double x) {
    if (!f.airy_type()) throw Error(Errc::UnsupportedFamily, "ode_residual needs an Airy-type profile");
    std::array<double, kMaxDerivative + 1> buf{};
    eval_upto(f, 2 * f.n, x, buf.data());
    return std::abs(buf[2 * f.n] - x * buf[0]);
}

// Upper envelope |A(x)| <= env(x) for x >= envelope_origin.
struct Envelope {
    double c = 1.0;
    double kappa = 1.0;
    double expo = 2.0;
    double operator()(double x) const { return c * std::exp(-kappa * std::pow(std::max(x, 0.0), expo)); }
};

inline constexpr double kEnvelopeOrigin = 1.0;

namespace detail {

inline Envelope calibrate_airy_envelope(Family fam, int n) {
    KernelFunction f{fam, n, 1.0};
    const double e = (2.0 * n + 1) / (2.0 * n);
    const double kwkb = 2.0 * n / (2.0 * n + 1);
    // least-squares line through (x^e, log|A|) at x = 3, 5, 7
    const double xs[3] = {3.0, 5.0, 7.0};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double x : xs) {
        const double u = std::pow(x, e), v = std::log(std::abs(eval(f, 0, x)));
        sx += u;
        sy += v;
        sxx += u * u;
        sxy += u * v;
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    // a steeper fitted exponent than the WKB one would undercut |A| far out
    const double kappa = std::min(-slope, kwkb);
    double c = 0.0;
    for (double x = kEnvelopeOrigin; x <= 40.0; x += 0.05) {
        const double a = std::abs(eval(f, 0, x));
        if (a < 1e-13) break;
        c = std::max(c, a * std::exp(kappa * std::pow(x, e)));
    }
    return {1.05 * c, kappa, e};
}

}  // namespace detail

// Decay envelope for |A| on [envelope_origin, inf), scaled by the amplitude.
inline Envelope envelope(const KernelFunction& f) {
    if (f.family == Family::Gaussian)
        return {f.amplitude / std::sqrt(std::numbers::pi), 1.0, 2.0};
    static std::once_flag flags[2][5];
    static Envelope cache[2][5];
    const int fi = f.family == Family::Airy ? 0 : 1;
    const int ni = std::clamp(f.n, 1, 4);
    std::call_once(flags[fi][ni], [&] { cache[fi][ni] = detail::calibrate_airy_envelope(f.family, ni); });
    Envelope e = cache[fi][ni];
    e.c *= f.amplitude;
    return e;
}

// Smallest x >= 0 with env(x) <= tol.
inline double decay_cutoff(const KernelFunction& f, double tol) {
    const Envelope e = envelope(f);
    if (e.c <= tol) return 0.0;
    return std::pow(std::log(e.c / tol) / e.kappa, 1.0 / e.expo);
}

}  // namespace fredhier

#endif
