#include "sew/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sew {

namespace {

constexpr double kPi = std::numbers::pi;

double param(const ParamMap& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void require_known(const ParamMap& p, std::initializer_list<const char*> known, const std::string& entry) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw std::invalid_argument("catalog entry '" + entry + "' has no parameter '" + k + "'");
    }
}

Jet radius_squared(const Jet& x, const Jet& y, Point c) {
    const Jet dx = x - c.x, dy = y - c.y;
    return dx * dx + dy * dy;
}

/// Smooth bump exp(1 - (1 - s0)/(s - s0)) for s > s0, zero otherwise; equals 1 at s = 1.
Jet level_bump(const Jet& s, double s0) {
    if (s.value() <= s0) return Jet(s.order(), 0.0);
    return exp(1.0 - (1.0 - s0) * reciprocal(s - s0));
}

/// Compactly supported radial bump A exp(1 - R^2 / (R^2 - q)) in q = |x - c|^2.
Jet radial_bump(const Jet& q, double radius, double amplitude) {
    const double r2 = radius * radius;
    if (q.value() >= r2) return Jet(q.order(), 0.0);
    return amplitude * exp(1.0 - r2 * reciprocal(r2 - q));
}

/// J0(j sqrt(q)) as an entire function of q, composed with a jet.
Jet bessel_of_q(const Jet& q, double j) {
    constexpr int kTerms = 60;
    const double a = j * j / 4.0;
    double coeff[kTerms];
    coeff[0] = 1.0;
    for (int k = 1; k < kTerms; ++k) coeff[k] = -coeff[k - 1] * a / (static_cast<double>(k) * k);
    std::vector<double> d(static_cast<std::size_t>(q.order()) + 1, 0.0);
    const double q0 = q.value();
    for (int m = 0; m <= q.order(); ++m) {
        double s = 0.0;
        // sum_k coeff[k] k!/(k-m)! q0^(k-m), Horner in q0.
        for (int k = kTerms - 1; k >= m; --k) {
            double falling = 1.0;
            for (int t = 0; t < m; ++t) falling *= static_cast<double>(k - t);
            s = s * q0 + coeff[k] * falling;
        }
        d[static_cast<std::size_t>(m)] = s;
    }
    return apply_univariate(q, d);
}

CatalogTruth torus_sinsin_truth() {
    CatalogTruth t;
    for (double x : {0.0, kPi})
        for (double y : {0.0, kPi}) t.critical_points.push_back({{x, y}, 2});
    for (double x : {kPi / 2, 3 * kPi / 2})
        for (double y : {kPi / 2, 3 * kPi / 2}) t.critical_points.push_back({{x, y}, 2});
    t.flux = [](double s) { return -2.0 * s; };
    t.flux_formula = "-2 s";
    return t;
}

CatalogTruth torus_sin2sin2_truth() {
    CatalogTruth t;
    for (double x : {0.0, kPi})
        for (double y : {0.0, kPi}) t.critical_points.push_back({{x, y}, 4});
    for (double x : {0.0, kPi})
        for (double y : {kPi / 2, 1.0, 2.0, 3 * kPi / 2, 5.0}) {
            t.critical_points.push_back({{x, y}, 2});
            t.critical_points.push_back({{y, x}, 2});
        }
    for (double x : {kPi / 2, 3 * kPi / 2})
        for (double y : {kPi / 2, 3 * kPi / 2}) t.critical_points.push_back({{x, y}, 2});
    return t;
}

}  // namespace

CatalogField::CatalogField(std::string name, ParamMap params, Domain domain, ClosedFormField::Expr expr,
                           CatalogTruth truth)
    : name_(name), params_(std::move(params)), impl_(std::move(name), std::move(domain), std::move(expr), kCatalogOrder),
      truth_(std::move(truth)) {}

double bessel_j0_series(double z, int terms) {
    const double a = z * z / 4.0;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < terms; ++k) {
        term *= -a / (static_cast<double>(k) * k);
        sum += term;
    }
    return sum;
}

std::vector<std::string> catalog_names() {
    return {"sinsin",     "sin2sin2", "bump-of-f", "radial-poly", "radial-quartic",
            "disk-eigen", "shear",    "two-bump",  "perturbed",   "polynomial"};
}

CatalogPtr polynomial_field(const ParamMap& coefficients, Domain domain) {
    struct Term {
        int i, j;
        double c;
    };
    std::vector<Term> terms;
    int degree = 0;
    for (const auto& [key, c] : coefficients) {
        if (key.size() != 3 || key[0] != 'c' || !std::isdigit(static_cast<unsigned char>(key[1])) ||
            !std::isdigit(static_cast<unsigned char>(key[2])))
            throw std::invalid_argument("polynomial coefficient keys must look like c21 (x^2 y^1): " + key);
        const int i = key[1] - '0', j = key[2] - '0';
        terms.push_back({i, j, c});
        degree = std::max(degree, i + j);
    }
    auto expr = [terms](const Jet& x, const Jet& y) {
        Jet r(x.order(), 0.0);
        for (const auto& t : terms) r += pow(x, t.i) * pow(y, t.j) * t.c;
        return r;
    };
    CatalogTruth truth;
    return std::make_shared<CatalogField>("polynomial", coefficients, std::move(domain), expr, truth);
}

CatalogPtr catalog_field(const std::string& name, const ParamMap& params, std::optional<Domain> domain) {
    const Domain torus = Domain::periodic_rectangle(2 * kPi, 2 * kPi);
    auto pick = [&](Domain fallback) { return domain ? *domain : fallback; };

    if (name == "sinsin") {
        require_known(params, {}, name);
        auto expr = [](const Jet& x, const Jet& y) { return sin(x) * sin(y); };
        return std::make_shared<CatalogField>(name, params, pick(torus), expr, torus_sinsin_truth());
    }
    if (name == "sin2sin2") {
        require_known(params, {}, name);
        auto expr = [](const Jet& x, const Jet& y) {
            const Jet g = sin(x) * sin(y);
            return g * g;
        };
        return std::make_shared<CatalogField>(name, params, pick(torus), expr, torus_sin2sin2_truth());
    }
    if (name == "bump-of-f") {
        require_known(params, {"threshold"}, name);
        const double s0 = param(params, "threshold", 0.1);
        if (!(s0 > 0.0 && s0 < 1.0)) throw std::invalid_argument("bump-of-f threshold must lie in (0, 1)");
        auto expr = [s0](const Jet& x, const Jet& y) {
            const bool q1 = x.value() > 0.0 && x.value() < kPi && y.value() > 0.0 && y.value() < kPi;
            if (!q1) return Jet(x.order(), 0.0);
            return level_bump(sin(x) * sin(y), s0);
        };
        CatalogTruth truth;
        return std::make_shared<CatalogField>(name, params, pick(torus), expr, truth);
    }
    if (name == "radial-poly" || name == "perturbed") {
        require_known(params, {"p", "cx", "cy", "eps"}, name);
        const double pd = param(params, "p", 2.0);
        if (pd < 2.0 || pd != std::floor(pd)) throw std::invalid_argument("radial-poly requires integer p >= 2");
        const int p = static_cast<int>(pd);
        const Point c{param(params, "cx", 0.0), param(params, "cy", 0.0)};
        const double eps = name == "perturbed" ? param(params, "eps", 0.1) : 0.0;
        if (name == "radial-poly" && params.count("eps")) throw std::invalid_argument("radial-poly has no eps");
        auto expr = [p, c, eps](const Jet& x, const Jet& y) {
            Jet r = pow(1.0 - radius_squared(x, y, c), p);
            if (eps != 0.0) r += (x - c.x) * (y - c.y) * eps;
            return r;
        };
        CatalogTruth truth;
        if (eps == 0.0) {
            truth.critical_points.push_back({c, 2});
            for (int k = 0; k < 8; ++k) {
                const double a = 2 * kPi * k / 8.0 + 0.1;
                truth.critical_points.push_back({{c.x + std::cos(a), c.y + std::sin(a)}, p});
            }
            truth.flux = [p](double s) {
                const double u = std::pow(std::max(s, 0.0), 1.0 / p);  // 1 - r^2
                return 4.0 * p * ((p - 1) * (1.0 - u) * std::pow(u, p - 2) - std::pow(u, p - 1));
            };
            truth.flux_formula = "4p[(p-1)(1-s^(1/p)) s^((p-2)/p) - s^((p-1)/p)]";
            truth.radial = true;
            truth.symmetry_center = c;
            truth.boundary_value = 0.0;
        } else {
            truth.boundary_value = std::nullopt;
        }
        return std::make_shared<CatalogField>(name, params, pick(Domain::disk(c, 1.0)), expr, truth);
    }
    if (name == "radial-quartic") {
        require_known(params, {"m", "cx", "cy"}, name);
        const double md = param(params, "m", 2.0);
        if (md < 1.0 || md != std::floor(md)) throw std::invalid_argument("radial-quartic requires integer m >= 1");
        const int m = static_cast<int>(md);
        const Point c{param(params, "cx", 0.0), param(params, "cy", 0.0)};
        auto expr = [m, c](const Jet& x, const Jet& y) { return 1.0 - pow(radius_squared(x, y, c), m); };
        CatalogTruth truth;
        truth.critical_points.push_back({c, 2 * m});
        truth.flux = [m](double s) { return -4.0 * m * m * std::pow(std::max(1.0 - s, 0.0), (m - 1.0) / m); };
        truth.flux_formula = "-4 m^2 (1-s)^((m-1)/m)";
        truth.radial = true;
        truth.symmetry_center = c;
        truth.boundary_value = 0.0;
        return std::make_shared<CatalogField>(name, params, pick(Domain::disk(c, 1.0)), expr, truth);
    }
    if (name == "disk-eigen") {
        require_known(params, {"cx", "cy"}, name);
        const Point c{param(params, "cx", 0.0), param(params, "cy", 0.0)};
        auto expr = [c](const Jet& x, const Jet& y) { return bessel_of_q(radius_squared(x, y, c), kBesselJ0Zero1); };
        CatalogTruth truth;
        truth.critical_points.push_back({c, 2});
        truth.flux = [](double s) { return -kBesselJ0Zero1 * kBesselJ0Zero1 * s; };
        truth.flux_formula = "-j01^2 s";
        truth.radial = true;
        truth.symmetry_center = c;
        truth.boundary_value = 0.0;
        return std::make_shared<CatalogField>(name, params, pick(Domain::disk(c, 1.0)), expr, truth);
    }
    if (name == "shear") {
        require_known(params, {}, name);
        auto expr = [](const Jet&, const Jet& y) { return cos(y); };
        CatalogTruth truth;
        for (double y : {0.0, kPi})
            for (double x : {0.3, 1.7, 4.0}) truth.critical_points.push_back({{x, y}, 2});
        truth.flux = [](double s) { return -s; };
        truth.flux_formula = "-s";
        return std::make_shared<CatalogField>(name, params, pick(torus), expr, truth);
    }
    if (name == "two-bump") {
        require_known(params, {}, name);
        const Point c1{-1.0, 0.3}, c2{1.2, -0.4};
        auto expr = [c1, c2](const Jet& x, const Jet& y) {
            return radial_bump(radius_squared(x, y, c1), 1.0, 1.0) + radial_bump(radius_squared(x, y, c2), 0.8, 0.6);
        };
        CatalogTruth truth;
        truth.critical_points.push_back({c1, 2});
        truth.critical_points.push_back({c2, 2});
        truth.critical_points.push_back({{0.1, 2.5}, 0});
        truth.boundary_value = 0.0;
        return std::make_shared<CatalogField>(name, params, pick(Domain::disk({0.0, 0.0}, 3.0)), expr, truth);
    }
    if (name == "polynomial") return polynomial_field(params, pick(Domain::disk({0.0, 0.0}, 1.0)));
    throw std::invalid_argument("unknown catalog field '" + name + "'");
}

}  // namespace sew
