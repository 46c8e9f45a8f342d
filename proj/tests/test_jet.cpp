#include "doctest.h"
#include "sew/jet.hpp"

#include <cmath>

using namespace sew;

TEST_CASE("product and quotient coefficients") {
    const Jet x = Jet::variable_x(6, 0.5), y = Jet::variable_y(6, -0.25);
    const Jet p = x * y;
    CHECK(p(0, 0) == doctest::Approx(-0.125));
    CHECK(p(1, 0) == doctest::Approx(-0.25));
    CHECK(p(0, 1) == doctest::Approx(0.5));
    CHECK(p(1, 1) == doctest::Approx(1.0));
    const Jet q = 1.0 / (1.0 - x + 0.5);  // 1/(1 - dx) at x0 = 0.5
    for (int k = 0; k <= 6; ++k) CHECK(q(k, 0) == doctest::Approx(1.0));
}

TEST_CASE("elementary functions match their series") {
    const double x0 = 0.3;
    const Jet x = Jet::variable_x(8, x0);
    const Jet s = sin(x), c = cos(x), e = exp(x);
    double fact = 1.0;
    for (int k = 0; k <= 8; ++k) {
        if (k) fact *= k;
        // d^k sin = sin(x0 + k pi/2)
        CHECK(s(k, 0) == doctest::Approx(std::sin(x0 + k * M_PI / 2) / fact).epsilon(1e-12));
        CHECK(c(k, 0) == doctest::Approx(std::cos(x0 + k * M_PI / 2) / fact).epsilon(1e-12));
        CHECK(e(k, 0) == doctest::Approx(std::exp(x0) / fact).epsilon(1e-12));
    }
    const Jet u = Jet::variable_x(6, 2.0);
    const Jet r = sqrt(u) * sqrt(u);
    CHECK(r(0, 0) == doctest::Approx(2.0));
    CHECK(r(1, 0) == doctest::Approx(1.0));
    for (int k = 2; k <= 6; ++k) CHECK(std::abs(r(k, 0)) < 1e-13);
    const Jet l = log(exp(u));
    CHECK(l(1, 0) == doctest::Approx(1.0));
    CHECK(std::abs(l(3, 0)) < 1e-12);
    const Jet a = atan(u);
    CHECK(a(0, 0) == doctest::Approx(std::atan(2.0)));
    CHECK(a(1, 0) == doctest::Approx(1.0 / 5.0));
    CHECK(a(2, 0) == doctest::Approx(-2.0 / 25.0));  // (1/2) d/dx 1/(1+x^2) = -x/(1+x^2)^2
}

TEST_CASE("fractional power") {
    const Jet u = Jet::variable_x(5, 1.0);
    const Jet p = pow(u, 2.5);
    // binomial coefficients of (1+h)^2.5
    double c = 1.0;
    for (int k = 0; k <= 5; ++k) {
        CHECK(p(k, 0) == doctest::Approx(c).epsilon(1e-12));
        c *= (2.5 - k) / (k + 1);
    }
}

TEST_CASE("derivative scaling and d_dx") {
    const Jet x = Jet::variable_x(5, 1.0), y = Jet::variable_y(5, 2.0);
    const Jet f = pow(x, 3) * pow(y, 2);
    CHECK(f.derivative(3, 2) == doctest::Approx(12.0));
    CHECK(f.derivative(1, 1) == doctest::Approx(3 * 1.0 * 2 * 2.0));
    const Jet fx = f.d_dx();
    CHECK(fx.order() == 4);
    CHECK(fx.value() == doctest::Approx(3 * 4.0));
    CHECK(fx.derivative(0, 1) == doctest::Approx(12.0));
}

TEST_CASE("compose with bivariate jets") {
    // f(u, v) = u v about (1, 2); u = x + y, v = x - y about (1.5, -0.5).
    Jet f(4, 0.0);
    f.coef(0, 0) = 2.0;
    f.coef(1, 0) = 2.0;
    f.coef(0, 1) = 1.0;
    f.coef(1, 1) = 1.0;
    const Jet x = Jet::variable_x(4, 1.5), y = Jet::variable_y(4, -0.5);
    const Jet r = compose(f, x + y, x - y);
    const Jet direct = (x + y) * (x - y);
    for (int k = 0; k <= 4; ++k)
        for (int j = 0; j <= k; ++j) CHECK(r(k - j, j) == doctest::Approx(direct(k - j, j)).epsilon(1e-13));
}
