#include "doctest.h"
#include "sew/calculus.hpp"
#include "sew/catalog.hpp"
#include "sew/elliptic.hpp"
#include "sew/flux.hpp"

#include <cmath>
#include <numbers>

using namespace sew;

namespace {

const double j01 = kBesselJ0Zero1;

SemilinearProblem problem(std::function<double(double)> F) {
    SemilinearProblem p;
    p.F = std::move(F);
    return p;
}

double quartic(double r) { return std::pow(1.0 - r * r, 2); }

}  // namespace

TEST_CASE("radial shooting") {
    SUBCASE("constant F") {
        const auto prof = solve_radial(problem([](double) { return 4.0; }), -1.0);
        for (double r : {0.0, 0.3, 0.77, 1.0}) CHECK(prof.value(r) == doctest::Approx(r * r - 1.0).epsilon(1e-12));
        CHECK(prof.psi_R == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("J0 eigenfunction") {
        const auto prof = solve_radial(problem([](double s) { return -j01 * j01 * s; }), 1.0);
        CHECK(std::abs(prof.psi_R) <= 1e-8);
        for (double r : {0.1, 0.5, 0.9}) CHECK(std::abs(prof.value(r) - std::cyl_bessel_j(0.0, j01 * r)) <= 1e-8);
        CHECK(prof.dpsi_R == doctest::Approx(-j01 * std::cyl_bessel_j(1.0, j01)).epsilon(1e-7));
    }
    SUBCASE("square-root F") {
        const auto prof = solve_radial(problem([](double s) { return 8.0 - 16.0 * std::sqrt(s); }), 1.0);
        double err = 0.0;
        for (int k = 0; k <= 1000; ++k) err = std::max(err, std::abs(prof.value(k / 1000.0) - quartic(k / 1000.0)));
        CHECK(err <= 1e-8);
        CHECK(std::abs(prof.dpsi_R) <= 1e-7);
        CHECK(prof.d2psi_R == doctest::Approx(8.0).epsilon(1e-6));
    }
    SUBCASE("blow-up") {
        // psi'' + psi'/r = psi^2 from a large center value blows up before r = 1.
        CHECK_THROWS_AS(solve_radial(problem([](double s) { return 50.0 * s * s * s; }), 40.0), SolverError);
    }
    SUBCASE("F outside its domain") {
        CHECK_THROWS_AS(solve_radial(problem([](double s) { return std::log(s); }), -1.0), SolverError);
    }
}

TEST_CASE("radial profile field") {
    const auto prof = solve_radial(problem([](double s) { return 8.0 - 16.0 * std::sqrt(s); }), 1.0);
    auto f = radial_field(prof, Domain::disk({0, 0}, 1.0));
    const Jet j = f->jet({0.3, 0.4}, 2);
    CHECK(j.value() == doctest::Approx(quartic(0.5)).epsilon(1e-8));
    // Delta (1 - r^2)^2 = 8 - 16 (1 - r^2) at r = 0.5.
    CHECK(2 * (j(2, 0) + j(0, 2)) == doctest::Approx(8.0 - 16.0 * 0.75).epsilon(1e-6));
    CHECK(f->value({1e-4, 0.0}) == doctest::Approx(quartic(1e-4)));
}

TEST_CASE("disk newton") {
    SUBCASE("exact quadratic") {
        const auto s = solve_disk_newton(problem([](double) { return 4.0; }), [](Point) { return 0.0; });
        CHECK(s.converged);
        CHECK(s.residual <= 1e-9);
        for (Point p : {Point{0, 0}, Point{0.3, -0.5}, Point{-0.7, 0.1}})
            CHECK(s.field->value(p) == doctest::Approx(p.x * p.x + p.y * p.y - 1.0).epsilon(1e-10));
        CHECK(std::abs(s.field->value({1.0, 0.0})) <= 1e-10);
    }
    SUBCASE("square-root F from the exact guess") {
        auto rp = catalog_field("radial-poly", {{"p", 2}});
        const auto s = solve_disk_newton(problem([](double v) { return 8.0 - 16.0 * std::sqrt(v); }), *rp);
        CHECK(s.converged);
        CHECK(s.method == "newton");
        CHECK(s.iterations <= 5);
        CHECK(s.residual <= 1e-9);
        const auto prof = solve_radial(problem([](double v) { return 8.0 - 16.0 * std::sqrt(v); }), 1.0);
        double err = 0.0;
        for (std::size_t k = 0; k < s.nodes.size(); ++k) err = std::max(err, std::abs(s.values[k] - prof.value(norm(s.nodes[k]))));
        CHECK(err <= 1e-8);
        // Strict positivity inside.
        for (double v : s.values) CHECK(v > 0.0);
    }
    SUBCASE("square-root F from a perturbed guess") {
        // psi and grad psi both vanish on the circle, so the Dirichlet problem
        // is degenerate there and nearby discrete solutions differ at ~1e-6.
        auto F = [](double v) { return 8.0 - 16.0 * std::sqrt(v); };
        const auto s = solve_disk_newton(problem(F), [](Point p) {
            const double q = 1.0 - p.x * p.x - p.y * p.y;
            return q * q * (1.0 + 0.1 * q);
        });
        CHECK(s.converged);
        CHECK(s.residual <= 1e-9);
        for (Point p : {Point{0, 0}, Point{0.2, 0.5}, Point{-0.6, -0.6}})
            CHECK(std::abs(s.field->value(p) - quartic(norm(p))) <= 1e-5);
    }
    SUBCASE("radial and 2D agree") {
        auto F = [](double v) { return 4.0 + v; };
        // Radial oracle: secant on psi(0) until psi(1) = 0.
        double a = -1.0, b = -0.8;
        double fa = solve_radial(problem(F), a).psi_R, fb = solve_radial(problem(F), b).psi_R;
        for (int it = 0; it < 40 && std::abs(fb) > 1e-14; ++it) {
            const double c = b - fb * (b - a) / (fb - fa);
            a = b;
            fa = fb;
            b = c;
            fb = solve_radial(problem(F), b).psi_R;
        }
        const auto prof = solve_radial(problem(F), b);
        const auto s = solve_disk_newton(problem(F), [](Point p) { return p.x * p.x + p.y * p.y - 1.0 + 0.1 * p.x; });
        CHECK(s.converged);
        CHECK(s.residual <= 1e-9);
        CHECK(s.iterations <= 5);
        for (Point p : {Point{0, 0}, Point{0.2, 0.5}, Point{-0.6, -0.6}, Point{0.99, 0.0}})
            CHECK(std::abs(s.field->value(p) - prof.value(norm(p))) <= 1e-7);
    }
    SUBCASE("eigenfunction shape") {
        const auto s = solve_disk_newton(problem([](double v) { return -j01 * j01 * v; }),
                                         [](Point p) { return 2.0 * (1.0 - p.x * p.x - p.y * p.y); });
        CHECK(s.converged);
        CHECK(s.method == "inverse-iteration");
        // Normalize the peak and compare with J0.
        const double peak = s.field->value({0, 0});
        CHECK(peak == doctest::Approx(2.0).epsilon(1e-3));
        for (Point p : {Point{0.5, 0.0}, Point{0.3, 0.6}, Point{-0.1, -0.9}})
            CHECK(std::abs(s.field->value(p) / peak - std::cyl_bessel_j(0.0, j01 * norm(p))) <= 1e-8);
    }
    SUBCASE("non-disk domain") {
        SemilinearProblem p = problem([](double) { return 1.0; });
        p.domain = Domain::periodic_rectangle(1, 1);
        CHECK_THROWS_AS(solve_disk_newton(p, [](Point) { return 0.0; }), SolverError);
    }
}

TEST_CASE("manufactured round trip") {
    auto F = [](double v) { return 8.0 - 16.0 * std::sqrt(v); };
    auto rp = catalog_field("radial-poly", {{"p", 2}});
    const auto s = solve_disk_newton(problem(F), [](Point p) {
        const double q = 1.0 - p.x * p.x - p.y * p.y;
        return q * q * (1.0 - 0.1 * q * q);
    });
    REQUIRE(s.converged);
    FluxAnalysisOptions o;
    o.resolution = 192;
    const auto fa = analyze_flux(s.field, o);
    REQUIRE(fa.relation.F);
    const auto R = fa.relation.range;
    double err = 0.0;
    for (int k = 0; k <= 900; ++k) {
        const double v = R.a + R.width() * (0.05 + 0.001 * k);
        err = std::max(err, std::abs((*fa.relation.F)(v) - F(v)));
    }
    CHECK(err <= 1e-5);
}

TEST_CASE("overdetermined boundary") {
    const auto circle = BoundaryCurve::circle({0, 0}, 1.0);
    auto rp = catalog_field("radial-poly", {{"p", 2}});
    const auto a = overdetermined_check(*rp, circle, 8.0);
    CHECK(a.sup_psi <= 1e-10);
    CHECK(a.sup_grad <= 1e-10);
    REQUIRE(a.sup_dnn);
    CHECK(*a.sup_dnn <= 1e-10);
    CHECK(a.pass);
    CHECK(a.samples.size() == 256);

    auto eig = catalog_field("disk-eigen");
    const auto b = overdetermined_check(*eig, circle);
    CHECK(b.sup_psi <= 1e-10);
    CHECK(b.sup_grad > 0.3);
    CHECK(b.sup_grad == doctest::Approx(j01 * std::cyl_bessel_j(1.0, j01)).epsilon(1e-8));
    CHECK_FALSE(b.pass);

    const auto poly = BoundaryCurve::from_polyline({{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
    CHECK_THROWS_AS(overdetermined_check(*rp, poly), SolverError);
}

TEST_CASE("distance bounds") {
    const auto circle = BoundaryCurve::circle({0, 0}, 1.0);
    auto rp = catalog_field("radial-poly", {{"p", 2}});
    const auto a = distance_bound_check(*rp, {circle});
    CHECK(a.pass);
    CHECK(a.C <= 4.01);
    CHECK(a.C >= 3.9);
    CHECK(a.min_ratio >= 1.0 - 1e-9);

    // psi = 1 - r^4 vanishes to first order on r = 1.
    auto q = catalog_field("radial-quartic", {{"m", 2}}, Domain::annulus({0, 0}, 0.9, 1.0));
    const auto b = distance_bound_check(*q, {circle});
    CHECK_FALSE(b.pass);
    CHECK(b.C > 1e6);

    auto s = catalog_field("sinsin");
    CHECK_THROWS_AS(distance_bound_check(*s, {circle}), SolverError);
}
