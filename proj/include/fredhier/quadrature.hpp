#ifndef FREDHIER_QUADRATURE_HPP
#define FREDHIER_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

namespace fredhier {

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // one more evaluation at the converged point for the weight
        double p1 = 1.0, p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
            double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
        }
        pp = n * (z * p1 - p2) / (z * z - 1.0);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

inline double quad_norm(double v) { return std::abs(v); }
inline double quad_norm(std::complex<double> v) { return std::abs(v); }
template <class V>
double quad_norm(const V& v) {
    double m = 0.0;
    for (const auto& e : v) m = std::max(m, std::abs(e));
    return m;
}

namespace detail {

// Kronrod 15 / Gauss 7 abscissae and weights.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F, class V>
std::pair<V, double> gk15(const F& f, double a, double b, const V& zero) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    V fc = f(c);
    V resk = fc * kWgk[7];
    V resg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        V f1 = f(c - dx), f2 = f(c + dx);
        V s = f1 + f2;
        resk = resk + s * kWgk[j];
        if (j % 2 == 1) resg = resg + s * kWg[j / 2];
    }
    (void)zero;
    V diff = resk - resg;
    return {resk * h, quad_norm(diff) * h};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod 15 on [a, b]; the interval with the largest
// error estimate is bisected until the summed estimate meets the tolerance.
template <class F, class V>
V integrate_adaptive(const F& f, double a, double b, const V& zero, double abs_tol,
                     double rel_tol, int max_intervals = 4000, double* err_out = nullptr) {
    struct Piece {
        double a, b;
        V val;
        double err;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    std::priority_queue<Piece> heap;
    auto [v0, e0] = detail::gk15(f, a, b, zero);
    heap.push({a, b, v0, e0});
    V total = v0;
    double err = e0;
    int count = 1;
    while (err > std::max(abs_tol, rel_tol * quad_norm(total)) && count < max_intervals) {
        Piece p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        auto [vl, el] = detail::gk15(f, p.a, m, zero);
        auto [vr, er] = detail::gk15(f, m, p.b, zero);
        total = total - p.val + vl + vr;
        err = err - p.err + el + er;
        heap.push({p.a, m, vl, el});
        heap.push({m, p.b, vr, er});
        ++count;
    }
    // re-sum to avoid drift from the running update
    V sum = zero;
    double esum = 0.0;
    while (!heap.empty()) {
        sum = sum + heap.top().val;
        esum += heap.top().err;
        heap.pop();
    }
    if (err_out) *err_out = esum;
    return sum;
}

template <class F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-15,
                          double rel_tol = 1e-14) {
    return integrate_adaptive(f, a, b, 0.0, abs_tol, rel_tol);
}

}  // namespace fredhier

#endif
