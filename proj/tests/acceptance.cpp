// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
#include "sew/calculus.hpp"
#include "sew/catalog.hpp"
#include "sew/counterexample.hpp"
#include "sew/critical_set.hpp"
#include "sew/elliptic.hpp"
#include "sew/flux.hpp"
#include "sew/moving_plane.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace sew;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %2d: %s  %s (%s) [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), dt);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Point polar(double r, double a) { return {r * std::cos(a), r * std::sin(a)}; }

/// Taylor coefficients in n = r - 1 of psi'' + psi'/r = 2 - n^5 (psi/n^2)^{5/2},
/// psi(1) = psi'(1) = 0, from the binomial series of (psi/n^2)^{5/2}.
std::vector<double> radial_taylor(int N) {
    std::vector<double> a(N + 1, 0.0);
    auto mul = [N](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> z(N + 1, 0.0);
        for (int i = 0; i <= N; ++i)
            for (int j = 0; i + j <= N; ++j) z[i + j] += x[i] * y[j];
        return z;
    };
    for (int m = 0; m + 2 <= N; ++m) {
        std::vector<double> w(N + 1, 0.0), Q(N + 1, 0.0), wp(N + 1, 0.0);
        for (int k = 1; k + 2 <= N; ++k) w[k] = a[k + 2];
        wp[0] = 1.0;
        double binom = 1.0;
        for (int j = 0; j <= N; ++j) {
            for (int k = 0; k <= N; ++k) Q[k] += binom * wp[k];
            binom *= (2.5 - j) / (j + 1.0);
            wp = mul(wp, w);
        }
        // (1 + n)(psi'' + psi'/r) = (1 + n) R with R = 2 - n^5 Q.
        std::vector<double> R(N + 1, 0.0);
        R[0] = 2.0;
        for (int j = 5; j <= N; ++j) R[j] = -Q[j - 5];
        const double rhs = R[m] + (m >= 1 ? R[m - 1] : 0.0);
        a[m + 2] = (rhs - (m + 1.0) * (m + 1.0) * a[m + 1]) / ((m + 2.0) * (m + 1.0));
    }
    return a;
}

ChartPtr ellipse_chart() { return build_fermi_chart(JordanCurve::ellipse(1.3, 0.8), 0.2); }

std::function<bool(Point)> half_tube(const ChartPtr& chart) {
    return [chart](Point p) {
        const auto tn = chart->invert(p);
        return tn && std::abs(tn->second) <= 0.5 * chart->half_width();
    };
}

FluxAnalysisOptions tube_flux(const ChartPtr& chart) {
    FluxAnalysisOptions o;
    o.region = half_tube(chart);
    o.critical_values = std::vector<double>{0.0};
    o.branch_label = [chart](Point p) {
        const auto tn = chart->invert(p);
        return (tn && tn->second < 0.0) ? -1 : 1;
    };
    for (int i = 0; i < 8; ++i) {
        const double t = 2 * kPi * (i + 0.3) / 8;
        for (double s : {-1.0, 1.0})
            o.rays_a.push_back({chart->map(t, 0.0), s * chart->curve().normal(t), 0.1, s < 0 ? -1 : 1});
    }
    return o;
}

/// Shared between criteria 8 to 10.
struct Ellipse {
    ChartPtr chart = ellipse_chart();
    TubeSeriesSolution sol = solve_tube_series(*chart, 16, 32);
    FieldPtr psi = export_field(sol, chart);
};

const Ellipse& ellipse() {
    static const Ellipse e;
    return e;
}

Outcome criterion1() {
    double worst = 0.0;
    std::string worst_name;
    const std::vector<std::pair<std::string, ParamMap>> steady = {
        {"sinsin", {}}, {"disk-eigen", {}}, {"radial-poly", {{"p", 2}}}, {"radial-poly", {{"p", 3}}},
        {"shear", {}},  {"two-bump", {}}};
    for (const auto& [name, params] : steady) {
        const double r = steady_residual(catalog_field(name, params), Norm::Sup);
        if (r > worst) {
            worst = r;
            worst_name = name;
        }
    }
    const double pert = steady_residual(catalog_field("perturbed"), Norm::Sup);
    return {worst <= 1e-9 && pert >= 1e-2,
            fmt("steady max %.2e on %s, perturbed %.3g", worst, worst_name.c_str(), pert)};
}

Outcome criterion2() {
    struct Row {
        const char* field;
        ParamMap params;
        Point p;
        int degree;
    };
    // By hand: sin x sin y has nondegenerate critical points at the lattice
    // (k pi / 2), sin^2 x sin^2 y vanishes to order 4 at (k pi, l pi) and to
    // order 2 across the lines x = k pi, y = l pi, (1 - r^2)^p to order p on r = 1.
    const std::vector<Row> table = {
        {"sinsin", {}, {0, 0}, 2},
        {"sinsin", {}, {kPi, 0}, 2},
        {"sinsin", {}, {0, kPi}, 2},
        {"sinsin", {}, {kPi, kPi}, 2},
        {"sinsin", {}, {kPi / 2, kPi / 2}, 2},
        {"sinsin", {}, {3 * kPi / 2, kPi / 2}, 2},
        {"sinsin", {}, {kPi / 2, 3 * kPi / 2}, 2},
        {"sinsin", {}, {3 * kPi / 2, 3 * kPi / 2}, 2},
        {"sinsin", {}, {0.3, 1.1}, 1},
        {"sin2sin2", {}, {0, 0}, 4},
        {"sin2sin2", {}, {kPi, kPi}, 4},
        {"sin2sin2", {}, {0, kPi}, 4},
        {"sin2sin2", {}, {1.0, 0}, 2},
        {"sin2sin2", {}, {2.0, 0}, 2},
        {"sin2sin2", {}, {0, 0.7}, 2},
        {"sin2sin2", {}, {kPi, 2.0}, 2},
        {"sin2sin2", {}, {kPi / 2, kPi / 2}, 2},
        {"radial-poly", {{"p", 2}}, polar(1.0, 0.4), 2},
        {"radial-poly", {{"p", 2}}, polar(1.0, 2.0), 2},
        {"radial-poly", {{"p", 2}}, {0, 0}, 2},
        {"radial-poly", {{"p", 3}}, polar(1.0, 0.4), 3},
        {"radial-poly", {{"p", 3}}, polar(1.0, 4.0), 3},
        {"radial-poly", {{"p", 4}}, polar(1.0, 1.0), 4},
        {"radial-poly", {{"p", 4}}, polar(1.0, 5.5), 4},
    };
    int wrong = 0;
    std::string first;
    for (const auto& r : table) {
        const int d = vanishing_degree(*catalog_field(r.field, r.params), r.p).degree;
        if (d != r.degree) {
            if (!wrong) first = fmt(", first miss %s at (%.3f, %.3f): %d vs %d", r.field, r.p.x, r.p.y, d, r.degree);
            ++wrong;
        }
    }
    return {table.size() >= 20 && wrong == 0, fmt("%zu points, %d misclassified", table.size(), wrong) + first};
}

Outcome criterion3() {
    int checked = 0, wrong = 0;
    for (int p : {3, 4}) {
        const FieldPtr lap = laplacian(catalog_field("radial-poly", {{"p", double(p)}}));
        for (int k = 0; k < 16; ++k) {
            const Point x = polar(1.0, 2 * kPi * (k + 0.25) / 16);
            ++checked;
            if (vanishing_degree(*lap, x).degree != p - 2) ++wrong;
        }
    }
    return {checked >= 32 && wrong == 0, fmt("%d curve points, %d with degree of Laplacian != p - 2", checked, wrong)};
}

Outcome criterion4() {
    auto psi = catalog_field("radial-poly", {{"p", 2}});
    const auto fa = analyze_flux(psi);
    if (!fa.relation.F) return {false, "no single-valued F"};
    // Delta (1 - q)^2 with q = r^2 is 16 q - 8 = 8 - 16 sqrt(s).
    double err = 0.0;
    for (int i = 0; i <= 980; ++i) {
        const double s = 0.01 + 0.001 * i;
        err = std::max(err, std::abs((*fa.relation.F)(s) - (8.0 - 16.0 * std::sqrt(s))));
    }
    const double v = verify_flux_residual(psi, fa.relation);
    return {err <= 1e-5 && v <= 1e-6, fmt("sup |F - (8 - 16 sqrt s)| = %.2e, verify residual %.2e", err, v)};
}

Outcome criterion5() {
    // 1 - r^4: F = -16 (1 - s)^{1/2}. (1 - r^2)^2: F = 8 - 16 s^{1/2}.
    const auto fb = analyze_flux(catalog_field("radial-quartic", {{"m", 2}}));
    if (!fb.puiseux_b) return {false, "no endpoint-b fit"};
    const auto& b = *fb.puiseux_b;
    const double a1 = b.coefficient(1);
    const auto fa = analyze_flux(catalog_field("radial-poly", {{"p", 2}}));
    if (!fa.puiseux_a) return {false, "no endpoint-a fit"};
    const auto& a = *fa.puiseux_a;
    const double a0 = a.coefficient(0);
    const bool ok_b = b.k0 == 2 && a1 >= -16.5 && a1 <= -15.5 && a1 < 0.0 && b.leading_sign;
    const bool ok_a = std::abs(a.leading_exponent - 0.5) <= 0.05 && a0 >= 7.9 && a0 <= 8.1;
    return {ok_b && ok_a, fmt("b: k0 = %d, a1 = %.6f; a: exponent %.4f, a0 = %.6f", b.k0, a1, a.leading_exponent, a0)};
}

Outcome criterion6() {
    FluxAnalysisOptions o;
    o.companion = catalog_field("bump-of-f");
    const auto ex1 = analyze_flux(catalog_field("sinsin"), o);
    int wide = 0;
    for (const auto& row : ex1.relation.table)
        if (row.branches.size() >= 2 && row.spread >= 0.1) ++wide;
    const bool ok1 = ex1.relation.verdict == FluxVerdict::BranchDiscrepancy && wide > 0;

    auto f = catalog_field("sin2sin2");
    auto g = catalog_field("sinsin");
    const auto br = poisson_bracket(f, g);
    const GridSpec spec = grid_for(f->domain(), 256, 256);
    double sup = 0.0;
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) sup = std::max(sup, std::abs(br->value(spec.node(i, j))));
    FluxAnalysisOptions og;
    og.companion = g;
    const auto ex2 = analyze_flux(f, og);
    // Against its own Laplacian the flux is extracted over the whole cell; the
    // critical set carries the degree-2 walls.
    const auto self = analyze_flux(f);
    const auto cs = find_critical_set(*f);
    bool wall = false;
    for (const auto& c : cs.components) wall = wall || (c.is_curve() && c.degree() == 2);
    const bool ok2 = sup <= 1e-10 && ex2.relation.verdict == FluxVerdict::BranchDiscrepancy && wall;
    return {ok1 && ok2,
            fmt("sinsin with bump-of-f: %s, %d levels with spread >= 0.1, max %.3f; sin2sin2 with sinsin: sup |{f,g}| = %.1e, %s, "
                "self-flux %s, degree-2 wall %s",
                to_string(ex1.relation.verdict).c_str(), wide, ex1.relation.max_spread, sup,
                to_string(ex2.relation.verdict).c_str(), to_string(self.relation.verdict).c_str(),
                wall ? "present" : "missing")};
}

Outcome criterion7() {
    const auto circle = BoundaryCurve::circle({0, 0}, 1.0);
    const auto a = distance_bound_check(*catalog_field("radial-poly", {{"p", 2}}), {circle});
    const auto b =
        distance_bound_check(*catalog_field("radial-quartic", {{"m", 2}}, Domain::annulus({0, 0}, 0.9, 1.0)), {circle});
    return {a.pass && a.C <= 4.1 && !b.pass && b.C > 1e6, fmt("(1-r^2)^2: C = %.4f; 1-r^4: C = %.3g", a.C, b.C)};
}

Outcome criterion8() {
    // Radial field.
    auto rp = catalog_field("radial-poly", {{"p", 2}});
    const Region disk = Region::from_domain(rp->domain());
    const auto rep = moving_plane(rp, disk, 16);
    int sym = 0;
    for (const auto& d : rep.directions) sym += d.symmetric;
    const double cerr = norm(rep.verdict.center);
    const bool ok_radial = sym == 16 && rep.verdict.verdict == GlobalVerdict::Radial && cerr <= 1e-6;

    // Ellipse counterexample on the interior side of the curve.
    const auto& E = ellipse();
    const Region inner = Region::interior_of(E.chart->center_curve());
    const auto er = moving_plane(E.psi, inner, 16);
    int esym = 0;
    for (const auto& d : er.directions) esym += d.symmetric;
    bool principal = er.verdict.axes.size() == 2;
    for (double a : er.verdict.axes)
        principal = principal && (std::abs(a) <= 1e-6 || std::abs(a - kPi / 2) <= 1e-6);
    const bool ok_ellipse = esym == 2 && principal;

    // Coefficient audit over admissible lambda, with exact F on each side.
    double M = 0.0;
    std::size_t audited = 0;
    bool finite = true;
    auto audit = [&](FieldPtr psi, const Region& region, const std::function<double(double)>& F, Point e) {
        const auto ctx = make_context(psi, region);
        const auto states = reflect_sweep(ctx, e);
        for (std::size_t k = 0; k < states.size(); k += 4) {
            if (!states[k].admissible) continue;
            const auto a = coefficient_audit(ctx, F, e, states[k].lambda);
            finite = finite && std::isfinite(a.value);
            M = std::max(M, a.value);
            ++audited;
        }
    };
    audit(rp, disk, [](double s) { return 8.0 - 16.0 * std::sqrt(std::max(s, 0.0)); }, {1, 0});
    audit(catalog_field("disk-eigen"), disk,
          [](double s) { return -kBesselJ0Zero1 * kBesselJ0Zero1 * s; }, {std::cos(0.7), std::sin(0.7)});
    auto inner_F = [](double s) { return 2.0 + std::pow(std::max(s, 0.0), 2.5); };
    audit(E.psi, inner, inner_F, {1, 0});
    audit(E.psi, inner, inner_F, {0, 1});

    // Sign of the (b - s)^{1/k0}-singular difference quotient for 1 - r^{2m}.
    std::size_t qs = 0, qv = 0;
    for (int m : {2, 3}) {
        auto q = catalog_field("radial-quartic", {{"m", double(m)}});
        const auto ctx = make_context(q, disk);
        for (Point e : {Point{1, 0}, Point{std::cos(1.1), std::sin(1.1)}}) {
            const auto states = reflect_sweep(ctx, e);
            for (std::size_t k = 0; k < states.size(); k += 8) {
                if (!states[k].admissible) continue;
                const auto r = singular_quotient_check(ctx, e, states[k].lambda, m, -4.0 * m * m, 1.0);
                qs += r.samples;
                qv += r.violations;
            }
        }
    }
    const bool ok_audit = finite && audited > 0 && qs > 0 && qv == 0;
    return {ok_radial && ok_ellipse && ok_audit,
            fmt("radial-poly: %d/16 symmetric, center error %.1e; ellipse: %d symmetric, %zu axes; audit M = %.4g "
                "over %zu lambdas; singular quotient %zu samples, %zu violations",
                sym, cerr, esym, er.verdict.axes.size(), M, audited, qs, qv)};
}

Outcome criterion9() {
    // Circle against the radial Taylor oracle.
    auto circle = build_fermi_chart(JordanCurve::circle(), 0.3);
    const auto cs = solve_tube_series(*circle, 8, 1);
    const auto oracle = radial_taylor(8);
    double cerr = 0.0;
    for (int k = 0; k <= 8; ++k)
        for (double t : {0.0, 1.3, 4.0}) cerr = std::max(cerr, std::abs(cs.coefficient(k, t) - oracle[k]));

    // Ellipse: PDE residual from Cartesian jets of the exported field.
    const auto& E = ellipse();
    const FieldPtr lap = laplacian(E.psi);
    double pde = 0.0, c2 = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double t = 2 * kPi * (i + 0.5) / 64;
        c2 = std::max(c2, std::abs(E.sol.coefficient(2, t) - 1.0));
        for (int j = -8; j <= 8; ++j) {
            const double n = 0.1 * j / 8;
            const Point p = E.chart->map(t, n);
            const double v = E.psi->value(p);
            const double rhs = n < 0 ? 2.0 + std::pow(std::max(v, 0.0), 2.5) : 2.0 - std::pow(std::max(v, 0.0), 2.5);
            pde = std::max(pde, std::abs(lap->value(p) - rhs));
        }
    }
    c2 = std::max(c2, E.sol.c2_error);

    const auto fa = analyze_flux(E.psi, tube_flux(E.chart));
    double e_in = NAN, e_out = NAN;
    if (fa.branch_a.count(-1)) e_in = fa.branch_a.at(-1).leading_exponent;
    if (fa.branch_a.count(1)) e_out = fa.branch_a.at(1).leading_exponent;
    const bool ok = cerr <= 1e-10 && pde <= 1e-6 && c2 <= 1e-12 && std::abs(e_in - 2.5) <= 0.05 &&
                    std::abs(e_out - 2.5) <= 0.05;
    return {ok, fmt("circle coefficient error %.1e; ellipse (Nn, Ns) = (%d, %d): PDE residual %.2e, |c2 - 1| = %.1e, "
                    "branch exponents %.4f inside, %.4f outside",
                    cerr, E.sol.Nn, E.sol.Ns, pde, c2, e_in, e_out)};
}

Outcome criterion10() {
    // (1 - r^2)^2: d_nn = 8 = F(0) on the critical circle.
    auto rp = catalog_field("radial-poly", {{"p", 2}});
    const auto cs = find_critical_set(*rp);
    double vp = 0.0, gp = 0.0, dp = 0.0;
    std::size_t np = 0;
    for (const auto& c : cs.components) {
        if (!c.is_curve()) continue;
        for (const Point& x : c.points) {
            const Jet j = rp->jet(x, 2);
            const Point nu = (1.0 / norm(x)) * x;
            vp = std::max(vp, std::abs(j.value()));
            gp = std::max(gp, std::hypot(j(1, 0), j(0, 1)));
            const double dnn = 2.0 * (j(2, 0) * nu.x * nu.x + j(1, 1) * nu.x * nu.y + j(0, 2) * nu.y * nu.y);
            dp = std::max(dp, std::abs(dnn - 8.0));
            ++np;
        }
    }
    // Counterexample: d_nn = 2 c_2 = 2 = F(0) on the curve.
    const auto& E = ellipse();
    double vc = 0.0, gc = 0.0, dc = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double t = 2 * kPi * i / 256;
        const Point x = E.chart->map(t, 0.0);
        const Point nu = E.chart->curve().normal(t);
        const Jet j = E.psi->jet(x, 2);
        vc = std::max(vc, std::abs(j.value()));
        gc = std::max(gc, std::hypot(j(1, 0), j(0, 1)));
        const double dnn = 2.0 * (j(2, 0) * nu.x * nu.x + j(1, 1) * nu.x * nu.y + j(0, 2) * nu.y * nu.y);
        dc = std::max(dc, std::abs(dnn - 2.0));
    }
    const bool ok = np > 0 && vp <= 1e-10 && gp <= 1e-10 && dp <= 1e-6 && vc <= 1e-10 && gc <= 1e-10 && dc <= 1e-6;
    return {ok, fmt("(1-r^2)^2 on %zu curve points: |psi| %.1e, |grad| %.1e, |d_nn - 8| %.1e; tube: |psi| %.1e, "
                    "|grad| %.1e, |d_nn - 2| %.1e",
                    np, vp, gp, dp, vc, gc, dc)};
}

Outcome criterion11() {
    double lo = INFINITY;
    std::ostringstream os;
    for (const char* op : {"laplacian", "bracket"})
        for (const char* f : {"sinsin", "disk-eigen"}) {
            const auto pr = convergence_probe(op, catalog_field(f), {32, 64, 128});
            const double s = pr.exact ? INFINITY : pr.slope;
            lo = std::min(lo, s);
            os << op << "/" << f << " " << fmt("%.2f", pr.slope) << (pr.exact ? " (exact)" : "") << "; ";
        }
    std::string d = os.str();
    d.resize(d.size() - 2);
    return {lo >= 5.0, d};
}

}  // namespace

int main() {
    report(1, "steadiness discrimination", criterion1);
    report(2, "degree classification", criterion2);
    report(3, "degree relation", criterion3);
    report(4, "flux round-trip", criterion4);
    report(5, "Puiseux structure", criterion5);
    report(6, "branch discrepancy", criterion6);
    report(7, "dist^2 bounds", criterion7);
    report(8, "moving plane", criterion8);
    report(9, "counterexample", criterion9);
    report(10, "overdetermined boundary", criterion10);
    report(11, "operator quality", criterion11);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures ? 1 : 0;
}
