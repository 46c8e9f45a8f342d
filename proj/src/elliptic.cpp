#include "sew/elliptic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sew {

std::string to_string(SolveMode m) { return m == SolveMode::RadialShoot ? "radial-shoot" : "disk-newton"; }

double evaluate_nonlinearity(const SemilinearProblem& p, double s) {
    if (!p.F) throw SolverError("problem has no nonlinearity");
    double v = p.F(s);
    if (!std::isfinite(v) && s < 1e-12) v = p.F(std::max(s, 0.0));
    if (!std::isfinite(v)) throw SolverError("F evaluation outside its domain at s = " + std::to_string(s));
    return v;
}

namespace {

double F_prime(const SemilinearProblem& p, double s, double step) {
    return (evaluate_nonlinearity(p, s + step) - evaluate_nonlinearity(p, s - step)) / (2.0 * step);
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct State {
    double u, v;
};

}  // namespace

RadialProfile solve_radial(const SemilinearProblem& problem, double psi0, double R, const RadialOptions& opts) {
    RadialProfile prof;
    prof.R = R;
    prof.psi0 = psi0;
    prof.F0 = evaluate_nonlinearity(problem, psi0);
    prof.F0_prime = F_prime(problem, psi0, 1e-6 * std::max(1.0, std::abs(psi0)));
    auto rhs = [&](double r, State y) -> State { return {y.v, evaluate_nonlinearity(problem, y.u) - y.v / r}; };

    double r = opts.r_start * R;
    State y{psi0 + prof.F0 * r * r / 4.0 + prof.F0 * prof.F0_prime * std::pow(r, 4) / 64.0,
            prof.F0 * r / 2.0 + prof.F0 * prof.F0_prime * std::pow(r, 3) / 16.0};
    prof.r.push_back(r);
    prof.psi.push_back(y.u);
    prof.dpsi.push_back(y.v);
    prof.d2psi.push_back(rhs(r, y).v);
    double h = std::min(opts.max_step * R, 1e-3 * R);
    State k1 = rhs(r, y);
    while (r < R) {
        if (prof.steps + prof.rejected > opts.max_steps) throw SolverError("solve_radial: step limit reached");
        h = std::min({h, R - r, opts.max_step * R});
        auto at = [&](double a1, double a2, double a3, double a4, double a5, const State& s1, const State& s2,
                      const State& s3, const State& s4, const State& s5) {
            return State{y.u + h * (a1 * s1.u + a2 * s2.u + a3 * s3.u + a4 * s4.u + a5 * s5.u),
                         y.v + h * (a1 * s1.v + a2 * s2.v + a3 * s3.v + a4 * s4.v + a5 * s5.v)};
        };
        const State z{};
        const State k2 = rhs(r + c2 * h, at(a21, 0, 0, 0, 0, k1, z, z, z, z));
        const State k3 = rhs(r + c3 * h, at(a31, a32, 0, 0, 0, k1, k2, z, z, z));
        const State k4 = rhs(r + c4 * h, at(a41, a42, a43, 0, 0, k1, k2, k3, z, z));
        const State k5 = rhs(r + c5 * h, at(a51, a52, a53, a54, 0, k1, k2, k3, k4, z));
        const State k6 = rhs(r + h, at(a61, a62, a63, a64, a65, k1, k2, k3, k4, k5));
        const State yn = at(b1, 0, b3, b4, b5, k1, k2, k3, k4, k5);
        const State tmp{yn.u + h * b6 * k6.u, yn.v + h * b6 * k6.v};
        const State k7 = rhs(r + h, tmp);
        const double eu = h * (e1 * k1.u + e3 * k3.u + e4 * k4.u + e5 * k5.u + e6 * k6.u + e7 * k7.u);
        const double ev = h * (e1 * k1.v + e3 * k3.v + e4 * k4.v + e5 * k5.v + e6 * k6.v + e7 * k7.v);
        const double err = std::max(std::abs(eu) / (opts.tol * std::max(1.0, std::abs(tmp.u))),
                                    std::abs(ev) / (opts.tol * std::max(1.0, std::abs(tmp.v))));
        if (!std::isfinite(tmp.u) || !std::isfinite(tmp.v))
            throw SolverError("solve_radial: blow-up before reaching R (r = " + std::to_string(r) + ")");
        if (err <= 1.0) {
            r = (R - r - h <= 1e-15 * R) ? R : r + h;
            y = tmp;
            k1 = k7;
            prof.r.push_back(r);
            prof.psi.push_back(y.u);
            prof.dpsi.push_back(y.v);
            prof.d2psi.push_back(k7.v);
            ++prof.steps;
        } else {
            ++prof.rejected;
        }
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= fac;
        if (h < 1e-14 * R) throw SolverError("solve_radial: step size underflow");
    }
    prof.psi_R = prof.psi.back();
    prof.dpsi_R = prof.dpsi.back();
    prof.d2psi_R = evaluate_nonlinearity(problem, prof.psi_R) - prof.dpsi_R / R;
    return prof;
}

namespace {

// Hermite basis on [0, 1].
struct Hermite {
    double h00, h10, h01, h11;
};

}  // namespace

double RadialProfile::value(double radius) const {
    if (radius <= r.front())
        return psi0 + F0 * radius * radius / 4.0 + F0 * F0_prime * std::pow(radius, 4) / 64.0;
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), radius) - r.begin());
    const std::size_t i = std::min(k, r.size() - 1) - 1;
    const double dr = r[i + 1] - r[i], t = (radius - r[i]) / dr;
    const Hermite b{2 * t * t * t - 3 * t * t + 1, t * t * t - 2 * t * t + t, -2 * t * t * t + 3 * t * t,
                    t * t * t - t * t};
    return b.h00 * psi[i] + b.h10 * dr * dpsi[i] + b.h01 * psi[i + 1] + b.h11 * dr * dpsi[i + 1];
}

double RadialProfile::derivative(double radius) const {
    if (radius <= r.front()) return F0 * radius / 2.0 + F0 * F0_prime * std::pow(radius, 3) / 16.0;
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), radius) - r.begin());
    const std::size_t i = std::min(k, r.size() - 1) - 1;
    const double dr = r[i + 1] - r[i], t = (radius - r[i]) / dr;
    return ((6 * t * t - 6 * t) * psi[i] + (-6 * t * t + 6 * t) * psi[i + 1]) / dr +
           (3 * t * t - 4 * t + 1) * dpsi[i] + (3 * t * t - 2 * t) * dpsi[i + 1];
}

namespace {

class RadialProfileField final : public ScalarField {
public:
    RadialProfileField(RadialProfile p, Domain d, std::string name)
        : p_(std::move(p)), d_(std::move(d)), name_(std::move(name)) {}
    const Domain& domain() const override { return d_; }
    int max_order() const override { return 2; }
    FieldSource source() const override { return FieldSource::Series; }
    std::string name() const override { return name_; }
    Jet jet(Point pt, int order) const override {
        if (order > 2) throw FieldError("radial profile fields carry derivatives up to order 2");
        const Point c = d_.center();
        const Jet x = Jet::variable_x(order, pt.x) - c.x, y = Jet::variable_y(order, pt.y) - c.y;
        const Jet q = x * x + y * y;
        if (std::sqrt(q.value()) <= p_.r.front()) {
            // Even series in q = r^2 near the center.
            return p_.psi0 + (p_.F0 / 4.0) * q + (p_.F0 * p_.F0_prime / 64.0) * (q * q);
        }
        const Jet r = sqrt(q);
        const double rv = r.value();
        const double d1 = p_.derivative(rv);
        const std::size_t k = static_cast<std::size_t>(std::upper_bound(p_.r.begin(), p_.r.end(), rv) - p_.r.begin());
        const std::size_t i = std::min(k, p_.r.size() - 1) - 1;
        const double w = (rv - p_.r[i]) / (p_.r[i + 1] - p_.r[i]);
        const double d2 = (1.0 - w) * p_.d2psi[i] + w * p_.d2psi[i + 1];
        const double derivs[3] = {p_.value(rv), d1, d2};
        return apply_univariate(r, std::span<const double>(derivs, static_cast<std::size_t>(order) + 1));
    }

private:
    RadialProfile p_;
    Domain d_;
    std::string name_;
};

}  // namespace

FieldPtr radial_field(const RadialProfile& profile, const Domain& domain, std::string name) {
    return std::make_shared<RadialProfileField>(profile, domain, std::move(name));
}

ChebyshevDiskField::ChebyshevDiskField(std::string name, Domain domain, int degree, std::vector<double> coefficients)
    : name_(std::move(name)), domain_(std::move(domain)), degree_(degree), c_(std::move(coefficients)) {
    if (c_.size() != static_cast<std::size_t>((degree + 1) * (degree + 2) / 2))
        throw FieldError("ChebyshevDiskField: coefficient count does not match the degree");
}

namespace {

// Taylor coefficients in d of T_i(x0 + s d), i = 0..n, up to order K.
std::vector<std::array<double, kMaxJetOrder + 1>> chebyshev_taylor(int n, double x0, double s, int K) {
    std::vector<std::array<double, kMaxJetOrder + 1>> T(static_cast<std::size_t>(n) + 1);
    for (auto& a : T) a.fill(0.0);
    T[0][0] = 1.0;
    if (n >= 1) {
        T[1][0] = x0;
        if (K >= 1) T[1][1] = s;
    }
    for (int i = 1; i < n; ++i) {
        auto& out = T[static_cast<std::size_t>(i) + 1];
        const auto& a = T[static_cast<std::size_t>(i)];
        const auto& b = T[static_cast<std::size_t>(i) - 1];
        for (int k = 0; k <= K; ++k) {
            out[static_cast<std::size_t>(k)] = 2.0 * x0 * a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
            if (k >= 1) out[static_cast<std::size_t>(k)] += 2.0 * s * a[static_cast<std::size_t>(k) - 1];
        }
    }
    return T;
}

std::size_t tri_index(int i, int j, int degree) {
    // Row-major over i with j = 0..degree - i.
    return static_cast<std::size_t>(i * (degree + 1) - i * (i - 1) / 2 + j);
}

}  // namespace

Jet ChebyshevDiskField::jet(Point p, int order) const {
    if (order > kMaxJetOrder) throw FieldError("jet order above cap");
    const Point c = domain_.center();
    const double R = domain_.radius();
    const auto tx = chebyshev_taylor(degree_, (p.x - c.x) / R, 1.0 / R, order);
    const auto ty = chebyshev_taylor(degree_, (p.y - c.y) / R, 1.0 / R, order);
    Jet out(order);
    std::array<double, kMaxJetOrder + 1> w{};
    for (int i = 0; i <= degree_; ++i) {
        w.fill(0.0);
        for (int j = 0; j <= degree_ - i; ++j) {
            const double cij = c_[tri_index(i, j, degree_)];
            if (cij == 0.0) continue;
            for (int q = 0; q <= order; ++q) w[static_cast<std::size_t>(q)] += cij * ty[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)];
        }
        for (int a = 0; a <= order; ++a)
            for (int q = 0; a + q <= order; ++q)
                out.coef(a, q) += tx[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(q)];
    }
    return out;
}

namespace {

/// Chebyshev differentiation matrix on x_j = cos(pi j / N).
Eigen::MatrixXd cheb(int N, Eigen::VectorXd& x) {
    x.resize(N + 1);
    for (int j = 0; j <= N; ++j) x(j) = std::cos(std::numbers::pi * j / N);
    Eigen::MatrixXd D(N + 1, N + 1);
    auto cw = [&](int j) { return (j == 0 || j == N ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0); };
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j)
            D(i, j) = i == j ? 0.0 : cw(i) / cw(j) / (x(i) - x(j));
    for (int i = 0; i <= N; ++i) D(i, i) = -D.row(i).sum();
    return D;
}

struct DiskGrid {
    int nr = 0, M = 0;
    std::vector<double> r;
    std::vector<double> theta;
    Eigen::MatrixXd L;  // on the unit disk
    std::size_t idx(int j, int m) const { return static_cast<std::size_t>(j * M + m); }
};

DiskGrid disk_grid(int radii, int angles) {
    if (radii < 4 || angles < 8 || angles % 2) throw SolverError("disk grid needs radii >= 4 and even angles >= 8");
    DiskGrid g;
    g.nr = radii;
    g.M = angles;
    const int N = 2 * radii + 1;
    Eigen::VectorXd x;
    const Eigen::MatrixXd D = cheb(N, x);
    const Eigen::MatrixXd D2 = D * D;
    for (int j = 1; j <= radii; ++j) g.r.push_back(x(j));
    const double h = 2.0 * std::numbers::pi / angles;
    for (int m = 0; m < angles; ++m) g.theta.push_back(m * h);
    Eigen::MatrixXd T2(angles, angles);
    for (int i = 0; i < angles; ++i)
        for (int k = 0; k < angles; ++k) {
            const int d = ((i - k) % angles + angles) % angles;
            T2(i, k) = d == 0 ? -std::numbers::pi * std::numbers::pi / (3.0 * h * h) - 1.0 / 6.0
                              : -0.5 * ((d % 2) ? -1.0 : 1.0) / std::pow(std::sin(h * d / 2.0), 2);
        }
    const int n = radii * angles;
    g.L = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < radii; ++j) {
        const double rj = g.r[static_cast<std::size_t>(j)];
        for (int k = 0; k < radii; ++k) {
            const double A1 = D2(j + 1, k + 1) + D(j + 1, k + 1) / rj;
            const double A2 = D2(j + 1, N - (k + 1)) + D(j + 1, N - (k + 1)) / rj;
            for (int m = 0; m < angles; ++m) {
                const int mp = (m + angles / 2) % angles;
                g.L(static_cast<Eigen::Index>(g.idx(j, m)), static_cast<Eigen::Index>(g.idx(k, m))) += A1;
                g.L(static_cast<Eigen::Index>(g.idx(j, m)), static_cast<Eigen::Index>(g.idx(k, mp))) += A2;
            }
        }
        for (int m = 0; m < angles; ++m)
            for (int m2 = 0; m2 < angles; ++m2)
                g.L(static_cast<Eigen::Index>(g.idx(j, m)), static_cast<Eigen::Index>(g.idx(j, m2))) += T2(m, m2) / (rj * rj);
    }
    return g;
}

bool homogeneous_linear(const SemilinearProblem& p) {
    if (p.boundary_value != 0.0) return false;
    const double f1 = evaluate_nonlinearity(p, 1.0);
    if (std::abs(evaluate_nonlinearity(p, 0.0)) > 1e-14 * std::max(1.0, std::abs(f1))) return false;
    for (double s : {0.3, 0.7, 1.3, -0.4})
        if (std::abs(evaluate_nonlinearity(p, s) - s * f1) > 1e-12 * std::max(1.0, std::abs(f1))) return false;
    return true;
}

}  // namespace

DiskSolution solve_disk_newton(const SemilinearProblem& problem, const ScalarField& guess, const DiskOptions& opts) {
    return solve_disk_newton(problem, [&](Point p) { return guess.value(p); }, opts);
}

DiskSolution solve_disk_newton(const SemilinearProblem& problem, const std::function<double(Point)>& guess,
                               const DiskOptions& opts) {
    if (problem.domain.kind() != DomainKind::Disk) throw SolverError("solve_disk_newton needs a disk domain");
    const DiskGrid g = disk_grid(opts.radii, opts.angles);
    const Point c = problem.domain.center();
    const double R = problem.domain.radius();
    const double b = problem.boundary_value;
    const Eigen::Index n = static_cast<Eigen::Index>(g.L.rows());
    const Eigen::MatrixXd L = g.L / (R * R);

    DiskSolution sol;
    for (int j = 0; j < g.nr; ++j)
        for (int m = 0; m < g.M; ++m) {
            const double rr = R * g.r[static_cast<std::size_t>(j)], th = g.theta[static_cast<std::size_t>(m)];
            sol.nodes.push_back({c.x + rr * std::cos(th), c.y + rr * std::sin(th)});
        }
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = guess(sol.nodes[static_cast<std::size_t>(i)]) - b;

    auto Fvec = [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd f(n);
        for (Eigen::Index i = 0; i < n; ++i) f(i) = evaluate_nonlinearity(problem, w(i) + b);
        return f;
    };
    auto residual = [&](const Eigen::VectorXd& w) { return (L * w - Fvec(w)).cwiseAbs().maxCoeff(); };

    if (homogeneous_linear(problem)) {
        // Delta psi = c psi with psi = 0 on the boundary: eigenfunction, amplitude from the guess.
        sol.method = "inverse-iteration";
        const double shift = evaluate_nonlinearity(problem, 1.0);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        const double peak = v(imax);
        if (peak == 0.0) throw SolverError("inverse iteration needs a nontrivial guess");
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(L - shift * Eigen::MatrixXd::Identity(n, n));
        for (int it = 0; it < opts.max_iterations; ++it) {
            const double res = residual(v);
            sol.history.push_back(res);
            sol.iterations = it;
            if (res <= opts.tol) {
                sol.converged = true;
                break;
            }
            v = lu.solve(v);
            Eigen::Index k = 0;
            v.cwiseAbs().maxCoeff(&k);
            v *= peak / v(k);
        }
    } else {
        sol.method = "newton";
        for (int it = 0; it <= opts.max_iterations; ++it) {
            const Eigen::VectorXd G = L * v - Fvec(v);
            const double res = G.cwiseAbs().maxCoeff();
            sol.history.push_back(res);
            sol.iterations = it;
            if (res <= opts.tol) {
                sol.converged = true;
                break;
            }
            if (it == opts.max_iterations) break;
            const double lo = std::min(v.minCoeff(), 0.0) + b, hi = std::max(v.maxCoeff(), 0.0) + b;
            const double step = 1e-6 * std::max(hi - lo, 1e-6);
            Eigen::VectorXd dF(n);
            bool bounded = true;
            for (Eigen::Index i = 0; i < n; ++i) {
                // Capped relative to |s| so that sqrt-type F near 0 keeps an accurate slope.
                const double si = v(i) + b;
                const double hi_step = std::min(step, std::max(1e-3 * std::abs(si), 1e-14));
                dF(i) = F_prime(problem, si, hi_step);
                bounded = bounded && std::isfinite(dF(i)) && std::abs(dF(i)) < 1e8;
            }
            Eigen::VectorXd next;
            if (bounded) {
                Eigen::MatrixXd J = L;
                J.diagonal() -= dF;
                const Eigen::VectorXd dv = J.partialPivLu().solve(G);
                double lambda = 1.0;
                next = v - dv;
                for (int ls = 0; ls < 10 && residual(next) > res; ++ls) {
                    lambda *= 0.5;
                    next = v - lambda * dv;
                }
            } else {
                sol.method = "picard";
                const Eigen::VectorXd target = L.partialPivLu().solve(Fvec(v));
                next = v + 0.5 * (target - v);
            }
            v = next;
        }
    }
    sol.residual = sol.history.back();
    if (!sol.converged)
        sol.note = "stagnation: last residual " + std::to_string(sol.residual) + " after " +
                   std::to_string(sol.iterations) + " iterations";
    for (Eigen::Index i = 0; i < n; ++i) sol.values.push_back(v(i) + b);

    // Export: least squares in T_i(xi) T_j(eta), i + j <= D, through the
    // collocation nodes and the boundary ring.
    const int D = opts.export_degree > 0 ? opts.export_degree : std::min(2 * opts.radii - 8, opts.angles / 2 - 2);
    std::vector<Point> pts = sol.nodes;
    std::vector<double> vals = sol.values;
    for (int m = 0; m < g.M; ++m) {
        const double th = g.theta[static_cast<std::size_t>(m)] + std::numbers::pi / g.M;
        pts.push_back({c.x + R * std::cos(th), c.y + R * std::sin(th)});
        vals.push_back(b);
        const double th2 = g.theta[static_cast<std::size_t>(m)];
        pts.push_back({c.x + R * std::cos(th2), c.y + R * std::sin(th2)});
        vals.push_back(b);
    }
    const Eigen::Index nb = (D + 1) * (D + 2) / 2;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), nb);
    Eigen::VectorXd y(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double xi = (pts[k].x - c.x) / R, eta = (pts[k].y - c.y) / R;
        std::vector<double> tx(static_cast<std::size_t>(D) + 1), ty(static_cast<std::size_t>(D) + 1);
        tx[0] = ty[0] = 1.0;
        tx[1] = xi;
        ty[1] = eta;
        for (int i = 1; i < D; ++i) {
            tx[static_cast<std::size_t>(i) + 1] = 2 * xi * tx[static_cast<std::size_t>(i)] - tx[static_cast<std::size_t>(i) - 1];
            ty[static_cast<std::size_t>(i) + 1] = 2 * eta * ty[static_cast<std::size_t>(i)] - ty[static_cast<std::size_t>(i) - 1];
        }
        for (int i = 0; i <= D; ++i)
            for (int j = 0; j <= D - i; ++j)
                A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(tri_index(i, j, D))) =
                    tx[static_cast<std::size_t>(i)] * ty[static_cast<std::size_t>(j)];
        y(static_cast<Eigen::Index>(k)) = vals[k];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    sol.export_error = (A * coef - y).cwiseAbs().maxCoeff();
    sol.field = std::make_shared<ChebyshevDiskField>(
        "disk-solution" + (problem.formula.empty() ? std::string() : "[" + problem.formula + "]"), problem.domain, D,
        std::vector<double>(coef.data(), coef.data() + coef.size()));
    return sol;
}

OverdeterminedReport overdetermined_check(const ScalarField& psi, const BoundaryCurve& boundary,
                                          std::optional<double> F0, std::size_t samples, double tol,
                                          double dnn_tol) {
    if (!boundary.parametric()) throw SolverError("overdetermined_check: boundary normals unavailable");
    OverdeterminedReport rep;
    double dev = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        BoundarySample s;
        s.t = static_cast<double>(k) / static_cast<double>(samples);
        s.point = boundary.point(s.t);
        const Point n = boundary.outward_normal(s.t);
        const Jet j = psi.jet(s.point, 2);
        s.psi = j.value();
        s.grad = std::hypot(j(1, 0), j(0, 1));
        s.dnn = 2.0 * j(2, 0) * n.x * n.x + 2.0 * j(1, 1) * n.x * n.y + 2.0 * j(0, 2) * n.y * n.y;
        rep.sup_psi = std::max(rep.sup_psi, std::abs(s.psi));
        rep.sup_grad = std::max(rep.sup_grad, s.grad);
        if (F0) dev = std::max(dev, std::abs(s.dnn - *F0));
        sum += s.dnn;
        rep.samples.push_back(s);
    }
    rep.mean_dnn = sum / static_cast<double>(samples);
    if (F0) rep.sup_dnn = dev;
    rep.pass = rep.sup_psi <= tol && rep.sup_grad <= tol && (!F0 || dev <= dnn_tol);
    return rep;
}

DistanceBoundReport distance_bound_check(const ScalarField& psi, const std::vector<BoundaryCurve>& boundary,
                                         const DistanceBoundOptions& opts) {
    if (boundary.empty()) throw SolverError("distance_bound_check: no boundary curves");
    const Domain& dom = psi.domain();
    auto dist = [&](Point p) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& c : boundary) d = std::min(d, c.distance(p));
        return d;
    };
    std::vector<Point> pts;
    const Box bb = dom.bounding_box();
    const double scale = std::max(bb.width(), bb.height());
    for (int j = 0; j < opts.resolution; ++j)
        for (int i = 0; i < opts.resolution; ++i) {
            const Point p{bb.x0 + bb.width() * (i + 0.5) / opts.resolution,
                          bb.y0 + bb.height() * (j + 0.5) / opts.resolution};
            if (dom.contains(p) && (!opts.region || opts.region(p))) pts.push_back(p);
        }
    const double d0 = opts.max_distance > 0.0 ? opts.max_distance : 0.1 * scale;
    for (const auto& c : boundary) {
        if (!c.parametric()) continue;
        for (std::size_t k = 0; k < opts.ray_bases; ++k) {
            const double t = (k + 0.5) / static_cast<double>(opts.ray_bases);
            const Point q = c.point(t), n = c.outward_normal(t);
            for (double sgn : {-1.0, 1.0})
                for (double d = d0; d >= opts.min_distance * scale; d *= 0.5) {
                    const Point p = q + (sgn * d) * n;
                    if (dom.contains(p) && (!opts.region || opts.region(p))) pts.push_back(p);
                }
        }
    }
    DistanceBoundReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    rep.max_ratio = 0.0;
    double vmax = 0.0;
    std::vector<std::pair<double, double>> pairs;
    for (const Point& p : pts) {
        const double d = dist(p);
        if (d <= 0.0 || (opts.max_distance > 0.0 && d > opts.max_distance)) continue;
        const double v = psi.value(p);
        vmax = std::max(vmax, std::abs(v));
        pairs.push_back({v, d});
    }
    for (std::size_t k = 0; k < pairs.size(); ++k)
        if (pairs[k].first < -1e-14 * std::max(vmax, 1e-300))
            throw SolverError("distance_bound_check: psi changes sign in the region");
    double worst = 1.0;
    std::size_t wi = 0;
    std::size_t k = 0;
    for (const Point& p : pts) {
        const double d = dist(p);
        if (d <= 0.0 || (opts.max_distance > 0.0 && d > opts.max_distance)) continue;
        const double q = pairs[k++].first / (d * d);
        rep.min_ratio = std::min(rep.min_ratio, q);
        rep.max_ratio = std::max(rep.max_ratio, q);
        const double c = q > 0.0 ? std::max(q, 1.0 / q) : std::numeric_limits<double>::infinity();
        if (c > worst) {
            worst = c;
            rep.worst = p;
        }
        ++wi;
    }
    rep.samples = wi;
    rep.C = worst;
    rep.pass = rep.samples > 0 && rep.C <= opts.C_max;
    return rep;
}

}  // namespace sew
