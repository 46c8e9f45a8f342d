#include "doctest.h"
#include "sew/calculus.hpp"
#include "sew/catalog.hpp"
#include "sew/critical_set.hpp"

#include <cmath>
#include <numbers>

using namespace sew;
constexpr double pi = std::numbers::pi;

namespace {

// Hand-derived degree of sin x sin y: gradient (cos x sin y, sin x cos y),
// Hessian [[-sin x sin y, cos x cos y], [cos x cos y, -sin x sin y]].
int sinsin_degree(Point p) {
    const double sx = std::sin(p.x), cx = std::cos(p.x), sy = std::sin(p.y), cy = std::cos(p.y);
    if (std::hypot(cx * sy, sx * cy) > 1e-12) return 1;
    if (std::hypot(sx * sy, cx * cy) > 1e-12) return 2;
    return 3;
}

// sin^2 x sin^2 y = (sin x sin y)^2: degree 1 off the zero set of the
// product's gradient, twice the sinsin degree on {sin x sin y = 0}.
int sin2sin2_degree(Point p) {
    const double g = std::sin(p.x) * std::sin(p.y);
    if (std::abs(g) > 1e-12) return sinsin_degree(p) == 1 ? 1 : 2;
    // g = 0: f = g^2 vanishes to twice the order of g.
    return 2 * (std::hypot(std::cos(p.x) * std::sin(p.y), std::sin(p.x) * std::cos(p.y)) > 1e-12 ? 1 : 2);
}

}  // namespace

TEST_CASE("degree table") {
    int checked = 0;
    auto sinsin = catalog_field("sinsin");
    for (Point p : {Point{0, 0}, Point{pi, 0}, Point{pi / 2, pi / 2}, Point{pi / 4, pi / 4}, Point{3 * pi / 2, pi / 2},
                    Point{1.0, 2.0}, Point{pi, pi}}) {
        CHECK(vanishing_degree(*sinsin, p).degree == sinsin_degree(p));
        ++checked;
    }
    auto s2 = catalog_field("sin2sin2");
    for (Point p : {Point{0, 0}, Point{pi, 0}, Point{0, pi}, Point{0, 1.0}, Point{0, 2.5}, Point{1.3, 0}, Point{pi, 1.9},
                    Point{4.0, pi}, Point{pi / 2, pi / 2}, Point{0.7, 0.4}}) {
        INFO("sin2sin2 at ", p.x, ",", p.y);
        CHECK(vanishing_degree(*s2, p).degree == sin2sin2_degree(p));
        ++checked;
    }
    for (int p : {2, 3, 4, 5}) {
        auto f = catalog_field("radial-poly", {{"p", static_cast<double>(p)}});
        for (double a : {0.0, 1.1, 2.9}) {
            CHECK(vanishing_degree(*f, {std::cos(a), std::sin(a)}).degree == p);
            ++checked;
        }
    }
    CHECK(checked >= 20);
    CHECK(vanishing_degree(*s2, {0, 0}).degree == 4);
    CHECK(vanishing_degree(*sinsin, {0, 0}).degree == 2);
    CHECK(vanishing_degree(*sinsin, {pi / 4, pi / 4}).degree == 1);
}

TEST_CASE("degree is rotation invariant") {
    auto f = catalog_field("sin2sin2");
    const double a = pi / 2;
    auto g = rotated(f, a);
    for (Point x : {Point{0, 0}, Point{0, 1.0}, Point{0.7, 0.4}, Point{pi / 2, pi / 2}}) {
        const Point rinv{std::cos(a) * x.x + std::sin(a) * x.y, -std::sin(a) * x.x + std::cos(a) * x.y};
        CHECK(vanishing_degree(*g, rinv).degree == vanishing_degree(*f, x).degree);
    }
}

TEST_CASE("degree errors and flat zones") {
    auto f = catalog_field("disk-eigen");
    CHECK_THROWS_AS(vanishing_degree(*f, {2.0, 0.0}), FieldError);
    auto tb = catalog_field("two-bump");
    const auto d = vanishing_degree(*tb, {0.1, 2.5});
    CHECK(d.exceeds);
}

TEST_CASE("critical set of sin2sin2") {
    auto f = catalog_field("sin2sin2");
    const auto rep = find_critical_set(*f, {.resolution = 128});
    int arcs = 0, maxima = 0;
    for (const auto& c : rep.components) {
        if (c.kind == ComponentKind::Arc) {
            ++arcs;
            CHECK(c.degree() == 2);
            CHECK(c.constant_degree);
            for (std::size_t k = 1; k + 1 < c.points.size(); ++k) {
                const Point p = c.points[k];
                const double off = std::min({std::abs(std::sin(p.x)), std::abs(std::sin(p.y))});
                CHECK(off < 1e-8);
            }
        }
        if (c.kind == ComponentKind::IsolatedPoint) {
            ++maxima;
            CHECK(c.degree() == 2);
        }
    }
    CHECK(arcs == 8);
    CHECK(maxima == 4);
    REQUIRE(rep.branch_points.size() == 4);
    for (const auto& b : rep.branch_points) {
        CHECK(b.degree == 4);
        CHECK(std::abs(std::sin(b.point.x)) < 1e-8);
        CHECK(std::abs(std::sin(b.point.y)) < 1e-8);
    }
    const auto dec = innermost_loop(rep, f->domain());
    REQUIRE(dec.innermost);
    CHECK(dec.cells.size() == 4);
    const auto& cell = dec.cells[static_cast<std::size_t>(*dec.innermost)];
    CHECK(cell.simply_connected);
    CHECK(cell.area == doctest::Approx(pi * pi).epsilon(0.1));
    REQUIRE(cell.critical_points.size() == 1);
}

TEST_CASE("critical set of radial-poly") {
    auto f = catalog_field("radial-poly", {{"p", 2}});
    const auto rep = find_critical_set(*f, {.resolution = 128});
    int loops = 0, centers = 0;
    for (const auto& c : rep.components) {
        if (c.kind == ComponentKind::Loop) {
            ++loops;
            CHECK(c.degree() == 2);
            CHECK(c.max_turning < 0.1);
            for (const Point& p : c.points) CHECK(std::abs(norm(p) - 1.0) < 1e-9);
        }
        if (c.kind == ComponentKind::IsolatedPoint) {
            ++centers;
            CHECK(norm(c.points[0]) < 1e-9);
            CHECK(c.degree() == 2);
        }
    }
    CHECK(loops == 1);
    CHECK(centers == 1);
    const auto dec = innermost_loop(rep, f->domain());
    REQUIRE(dec.innermost);
    CHECK(dec.cells[static_cast<std::size_t>(*dec.innermost)].area == doctest::Approx(pi).epsilon(0.1));
    CHECK(dec.loop_cells.size() == 1);
}

TEST_CASE("critical set of sinsin has no curves") {
    auto f = catalog_field("sinsin");
    const auto rep = find_critical_set(*f, {.resolution = 96});
    CHECK(rep.components.size() == 8);
    for (const auto& c : rep.components) CHECK(c.kind == ComponentKind::IsolatedPoint);
    const auto dec = innermost_loop(rep, f->domain());
    CHECK(dec.no_critical_curves);
    CHECK(dec.cells.size() == 1);
}

TEST_CASE("degree-2 constancy on traced curves") {
    for (const std::string name : {"sin2sin2", "shear", "radial-poly"}) {
        auto f = catalog_field(name);
        const auto rep = find_critical_set(*f, {.resolution = 96});
        for (const auto& c : rep.components) {
            if (!c.is_curve()) continue;
            bool any2 = false;
            for (std::size_t k = 0; k < c.points.size(); ++k) {
                const bool branch_end = (k == 0 || k + 1 == c.points.size()) && c.kind == ComponentKind::Arc;
                if (!branch_end) any2 = any2 || c.degrees[k] == 2;
            }
            if (!any2) continue;
            for (std::size_t k = 1; k + 1 < c.points.size(); ++k) CHECK(c.degrees[k] == 2);
        }
    }
}

TEST_CASE("degree relation") {
    for (int p : {3, 4}) {
        auto f = catalog_field("radial-poly", {{"p", static_cast<double>(p)}});
        const auto rep = find_critical_set(*f, {.resolution = 96});
        const CriticalComponent* loop = nullptr;
        for (const auto& c : rep.components)
            if (c.kind == ComponentKind::Loop) loop = &c;
        REQUIRE(loop);
        CHECK(loop->degree() == p);
        const auto dr = degree_relation_check(f, *loop, 16);
        CHECK(dr.mode == "d-2");
        CHECK(dr.samples.size() >= 16);
        CHECK(dr.pass);
        for (const auto& s : dr.samples) CHECK(s.degree_laplacian == p - 2);
    }
    {
        auto f = catalog_field("radial-poly", {{"p", 2}});
        const auto rep = find_critical_set(*f, {.resolution = 96});
        for (const auto& c : rep.components) {
            if (c.kind != ComponentKind::Loop) continue;
            const auto dr = degree_relation_check(f, c);
            CHECK(dr.mode == "laplacian-nonzero");
            CHECK(dr.pass);
            // Delta psi = 8 - 16 (1 - r^2) on r = 1.
            for (const auto& s : dr.samples) CHECK(s.laplacian == doctest::Approx(8.0).epsilon(1e-9));
        }
    }
    {
        auto f = catalog_field("shear");
        const auto rep = find_critical_set(*f, {.resolution = 64});
        int curves = 0;
        for (const auto& c : rep.components) {
            if (!c.is_curve()) continue;
            ++curves;
            const auto dr = degree_relation_check(f, c);
            CHECK(dr.pass);
            for (const auto& s : dr.samples) CHECK(std::abs(std::abs(s.laplacian) - 1.0) < 1e-12);
        }
        CHECK(curves == 2);
    }
}

TEST_CASE("local radiality") {
    auto tb = catalog_field("two-bump");
    const auto rep = find_critical_set(*tb, {.resolution = 128});
    const auto dec = innermost_loop(rep, tb->domain());
    const auto verdicts = detect_local_radiality(*tb, dec);
    std::vector<Point> centers;
    for (const auto& v : verdicts)
        if (v.tested) {
            CHECK(v.radial);
            centers.push_back(v.center);
        }
    REQUIRE(centers.size() == 2);
    const Point c1{-1.0, 0.3}, c2{1.2, -0.4};
    const bool order = norm(centers[0] - c1) < norm(centers[1] - c1);
    CHECK(norm(centers[order ? 0 : 1] - c1) < 1e-6);
    CHECK(norm(centers[order ? 1 : 0] - c2) < 1e-6);

    auto rp = catalog_field("radial-poly", {{"p", 2}});
    const auto rrep = find_critical_set(*rp, {.resolution = 96});
    const auto rdec = innermost_loop(rrep, rp->domain());
    const auto rv = detect_local_radiality(*rp, rdec);
    REQUIRE(!rv.empty());
    CHECK(rv[static_cast<std::size_t>(*rdec.innermost)].radial);
    CHECK(norm(rv[static_cast<std::size_t>(*rdec.innermost)].center) < 1e-6);

    // Hand-built decomposition: the cell (0, pi)^2 of sinsin.
    auto ss = catalog_field("sinsin");
    RegionDecomposition cell;
    cell.grid = grid_for(ss->domain(), 96, 96);
    cell.label.assign(cell.grid.size(), -1);
    std::size_t n = 0;
    for (int j = 0; j < 96; ++j)
        for (int i = 0; i < 96; ++i) {
            const Point p = cell.grid.node(i, j);
            if (p.x > 0.05 && p.x < pi - 0.05 && p.y > 0.05 && p.y < pi - 0.05) {
                cell.label[cell.grid.index(i, j)] = 0;
                ++n;
            }
        }
    cell.cells.push_back({0, n, 0.0, true, {pi / 2, pi / 2}, {{pi / 2, pi / 2}}});
    const auto sv = detect_local_radiality(*ss, cell);
    REQUIRE(sv.size() == 1);
    CHECK(sv[0].tested);
    CHECK(!sv[0].radial);
    // About the max, sin x sin y = cos u cos v; on |(u,v)| = r it varies by
    // cos^2(r/sqrt2) - cos r, about r^4/8 for small r.
    CHECK(sv[0].spread > 1e-3);
}
