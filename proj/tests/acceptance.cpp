// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <fredhier/fredhier.hpp>

using namespace fredhier;

namespace {

struct Resolution {
    int nodes = 120;
    double stretch = 1.0;
    int per_panel = GridOptions{}.per_panel;
    int s_panel = TauOptions{}.panel_nodes;
    int kpz_panel = PanelOptions{}.per_panel;

    GridOptions hierarchy() const { return {nodes, 2.0, per_panel, stretch}; }
    TauOptions tau() const { return {nodes, stretch, s_panel}; }
    ZsOptions zs() const { return {nodes, stretch}; }
    PanelOptions panels() const { return {2.0, kpz_panel, stretch}; }

    Resolution refined(double nodes_factor, double window_factor) const {
        auto up = [&](int n) { return int(std::lround(n * nodes_factor)); };
        return {up(nodes), stretch * window_factor, up(per_panel), up(s_panel), up(kpz_panel)};
    }
};

struct Outcome {
    bool pass = true;
    std::vector<double> residuals;
    double worst = 0.0;  // max residual / tolerance
    std::string note;
    double seconds = 0.0;

    void below(double r, double tol) {
        residuals.push_back(r);
        if (!(r < tol)) pass = false;
        worst = std::max(worst, r / tol);
    }
    // a property that does not hold; the residuals stay comparable
    void violated(const std::string& why) {
        pass = false;
        if (!note.empty()) note += "; ";
        note += why;
    }
    // no value at all
    void fail(const std::string& why) {
        violated(why);
        residuals.push_back(std::numeric_limits<double>::quiet_NaN());
    }
};

using Check = std::function<void(const Resolution&, Outcome&)>;

const KernelFunction kAi = KernelFunction::airy();
const MeasureSpec kDelta = MeasureSpec::projector();

// FD derivatives of log Det against u0 and -q0^2.
void tau_representation(const Resolution& res, Outcome& o) {
    const double h = 1e-3;
    for (double s : {-4.0, -2.0, 0.0, 2.0}) {
        const auto g = default_grids(kAi, kDelta, s - h, res.hierarchy());
        const auto lo = compute_table(kAi, kDelta, s - h, 0, g), mid = compute_table(kAi, kDelta, s, 0, g),
                   hi = compute_table(kAi, kDelta, s + h, 0, g);
        const double d1 = (hi.log_det - lo.log_det) / (2 * h);
        const double d2 = (hi.log_det - 2 * mid.log_det + lo.log_det) / (h * h);
        o.below(std::abs(d1 - tau_first(mid)), 1e-5);
        o.below(std::abs(d2 - tau_second(mid)), 1e-4);
    }
}

void factorization(const Resolution& res, Outcome& o) {
    for (double s : {-2.0, 0.0, 2.0}) {
        const DualRoute ortho = perturbed_det(PerturbKind::Ortho, kAi, s, 1.0, res.tau(), false);
        o.below(std::abs(ortho.direct - ortho.factorized), 1e-9);
        const DualRoute sympl = perturbed_det(PerturbKind::Sympl, kAi, s, 1.0, res.tau(), false);
        o.below(std::abs(sympl.direct - sympl.factorized), 1e-9);
        for (double alpha : {0.0, 0.5, 1.0}) {
            const DualRoute th = perturbed_det(PerturbKind::OrthoThinned, kAi, s, alpha, res.tau(), false);
            o.below(std::abs(th.direct - th.factorized), 1e-8);
        }
    }
}

void flow_invariants(const Resolution& res, Outcome& o) {
    for (const KernelFunction& f : {kAi, KernelFunction::gaussian()})
        for (double s : {-2.0, 0.0, 2.0}) {
            const auto T = compute_table(f, kDelta, s, 3, res.hierarchy());
            for (int n : {0, 1}) o.below(flow_invariant(T, n).I, 1e-8);
        }
    for (double s : {-2.0, 0.0, 2.0}) {
        const auto T = compute_table(kAi, MeasureSpec::fermi(1.0), s, 1, res.hierarchy());
        const auto r = flow_invariant(T, 0);
        o.below(r.I, 1e-7);
        o.below(r.J, 1e-7);
    }
}

void tracy_widom_dual(const Resolution& res, Outcome& o) {
    for (int k = 0; k <= 14; ++k) {
        const double s = -5.0 + 0.5 * k;
        o.below(std::abs(tracy_widom(2, s, res.tau()) - f2_via_ode(s)), 1e-6);
    }
}

void painleve(const Resolution& res, Outcome& o) {
    for (double s : {-2.0, 0.0, 2.0}) {
        for (double beta : {0.5, 1.0, 2.0})
            o.below(pii_residual(1, kAi, MeasureSpec::fermi(beta), s, res.hierarchy()).residual_max, 1e-6);
        o.below(pii_residual(1, kAi, kDelta, s, res.hierarchy()).residual_max, 1e-8);
    }
    const KernelFunction a2 = KernelFunction::higher_airy(2);
    for (double s : {-2.0, 0.0, 2.0})
        o.below(std::abs(pii2_reduced_defect(compute_table(a2, kDelta, s, 4, res.hierarchy()))), 1e-6);
    try {
        o.below(pii_residual(2, a2, MeasureSpec::fermi(1.0), 0.0, res.hierarchy()).residual_max, 1e-5);
    } catch (const Error& e) {
        o.fail(std::string("member 2, Fermi beta=1: ") + e.what());
    }
}

void zakharov_shabat(const Resolution& res, Outcome& o) {
    for (double gamma : {0.3, 1.0}) {
        const KernelFunction f = KernelFunction::gaussian(gamma);
        for (double s : {-1.0, 0.0, 1.0}) {
            const ZsSolution sol(f, s, zs_grid(f, s, res.zs()));
            for (double z : {0.5, 1.0, 2.0}) {
                o.below(jump_residual(sol, f, z), 1e-6);
                o.below(std::abs(sol.evaluate(z, RhpBranch::BoundaryPlus).X.determinant() - 1.0), 1e-8);
            }
            const auto ode = zs_ode_residual(f, s, Cplx(1.0, 0.5), 1e-3, res.zs());
            o.below(std::max(ode.direct, ode.inverse), 1e-5);
        }
    }
    const int P = 3;
    const LaurentTail lt = laurent_tail(KernelFunction::gaussian(), 0.0, P, {10.0, 20.0, 40.0}, 1.0, res.zs());
    // slope bound as a residual: how far the fitted slope sits above -(P+1)
    o.below(std::max(lt.slope + P + 1, 0.0), 0.2);
    const GinibreValue bb = ginibre_cdf(0.0, 1.0, res.tau());
    o.below(std::abs(bb.radicand - bb.baik_bothner), 1e-6);
}

void closure(const Resolution& res, Outcome& o) {
    for (double s : {-2.0, 0.0, 2.0}) {
        o.below(closure_residual(compute_table(kAi, kDelta, s, 2, res.hierarchy()), 1), 1e-8);
        o.below(closure_residual(compute_table(kAi, MeasureSpec::fermi(1.0), s, 2, res.hierarchy()), 1), 1e-6);
        const KernelFunction a2 = KernelFunction::higher_airy(2);
        o.below(closure_residual(compute_table(a2, kDelta, s, 4, res.hierarchy()), 2), 1e-6);
    }
}

void kpz_collapse(const Resolution& res, Outcome& o) {
    for (double s : {-2.0, 0.0, 2.0}) {
        const double f2 = tracy_widom(2, s, res.tau());
        double prev = std::numeric_limits<double>::infinity();
        for (double t : {10.0, 1e3, 1e6}) {
            const KpzQuery q{t, s};
            const double gap = std::abs(fredholm_det(kpz_operator(q, kpz_grid(q, res.panels()))) - f2);
            if (!(gap < prev)) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "gap grows at s=%g, t=%g (%.3e after %.3e)", s, t, gap, prev);
                o.violated(buf);
            }
            if (t < 1e6) o.residuals.push_back(gap);
            prev = gap;
        }
        o.below(prev, 1e-2);
    }
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    Check run;
};

Outcome evaluate(const Criterion& c, const Resolution& res) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        c.run(res, o);
    } catch (const std::exception& e) {
        o.fail(e.what());
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return o;
}

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("%s  %d %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "tau-representation", 10, tau_representation},
        {2, "factorization identities", 10, factorization},
        {3, "flow invariants", 30, flow_invariants},
        {4, "dual-route Tracy-Widom", 60, tracy_widom_dual},
        {5, "integro-differential PII", 300, painleve},
        {6, "Zakharov-Shabat", 120, zakharov_shabat},
        {7, "closure relation", 120, closure},
        {8, "KPZ collapse", 60, kpz_collapse},
    };
    const Resolution base;
    const Resolution fine = base.refined(1.5, 1.2);
    // residuals this small are rounding, and their ratio carries no information
    const double noise_floor = 1e-13;

    bool all = true;
    std::vector<Outcome> first;
    for (const auto& c : criteria) {
        Outcome o = evaluate(c, base);
        const bool in_time = o.seconds < c.budget_s;
        char buf[160];
        std::snprintf(buf, sizeof buf, "worst residual/tol %.2e, %.1f s (limit %.0f s)", o.worst, o.seconds,
                      c.budget_s);
        std::string detail = buf;
        if (!in_time) detail += ", over time";
        if (!o.note.empty()) detail += "; " + o.note;
        report(c.id, c.name, o.pass && in_time, detail);
        all = all && o.pass && in_time;
        first.push_back(std::move(o));
    }

    bool robust = true;
    std::string detail;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const Outcome o = evaluate(criteria[k], fine);
        double ratio = 1.0;
        const auto& a = first[k].residuals;
        const auto& b = o.residuals;
        bool comparable = a.size() == b.size();
        for (std::size_t i = 0; comparable && i < a.size(); ++i) {
            if (std::isnan(a[i]) || std::isnan(b[i])) {
                comparable = false;
                break;
            }
            const double x = std::max(a[i], noise_floor), y = std::max(b[i], noise_floor);
            ratio = std::max(ratio, std::max(x / y, y / x));
        }
        const bool ok = o.pass && comparable && ratio < 10.0;
        robust = robust && ok;
        char buf[96];
        if (comparable)
            std::snprintf(buf, sizeof buf, "%s%d:%s(x%.2g)", detail.empty() ? "" : " ", criteria[k].id,
                          ok ? "ok" : "no", ratio);
        else
            std::snprintf(buf, sizeof buf, "%s%d:no(failed)", detail.empty() ? "" : " ", criteria[k].id);
        detail += buf;
    }
    report(9, "grid robustness", robust, "nodes x1.5, window +20%: " + detail);
    all = all && robust;
    return all ? 0 : 1;
}
