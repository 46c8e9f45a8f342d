#include "sew/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sew {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap_t(double t) {
    t = std::fmod(t, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

bool segments_cross(Point a, Point b, Point c, Point d) {
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

JordanCurve::JordanCurve(std::vector<double> cx, std::vector<double> sx, std::vector<double> cy,
                         std::vector<double> sy)
    : cx_(std::move(cx)), sx_(std::move(sx)), cy_(std::move(cy)), sy_(std::move(sy)) {
    const std::size_t m = std::max({cx_.size(), sx_.size(), cy_.size(), sy_.size()});
    if (m < 2) throw CounterexampleError("a Jordan curve needs at least one Fourier mode");
    for (auto* v : {&cx_, &sx_, &cy_, &sy_}) v->resize(m, 0.0);
    // Counterclockwise orientation: flip t -> -t if needed.
    double area = 0.0;
    const int n = 2048;
    for (int i = 0; i < n; ++i) {
        const double t = kTwoPi * i / n;
        area += cross(point(t), derivative(t, 1));
    }
    if (area < 0.0) {
        for (double& v : sx_) v = -v;
        for (double& v : sy_) v = -v;
    }
    for (int i = 0; i < n; ++i) {
        const double t = kTwoPi * i / n;
        length_ += speed(t) * kTwoPi / n;
        kappa_max_ = std::max(kappa_max_, std::abs(curvature(t)));
    }
    if (!(length_ > 0.0)) throw CounterexampleError("degenerate curve");
    for (int i = 0; i < n; ++i)
        if (!(speed(kTwoPi * i / n) > 1e-12 * length_)) throw CounterexampleError("curve is not regular");
}

JordanCurve JordanCurve::circle(Point c, double r) {
    if (!(r > 0.0)) throw CounterexampleError("circle radius must be positive");
    return JordanCurve({c.x, r}, {0.0, 0.0}, {c.y, 0.0}, {0.0, r});
}

JordanCurve JordanCurve::ellipse(double a, double b, Point c) {
    if (!(a > 0.0 && b > 0.0)) throw CounterexampleError("ellipse semi-axes must be positive");
    return JordanCurve({c.x, a}, {0.0, 0.0}, {c.y, 0.0}, {0.0, b});
}

Point JordanCurve::eval(double t, int k) const {
    Point p;
    const double shift = 0.5 * std::numbers::pi * k;
    for (std::size_t j = 0; j < cx_.size(); ++j) {
        if (j == 0) {
            if (k == 0) p = p + Point{cx_[0], cy_[0]};
            continue;
        }
        const double jj = static_cast<double>(j);
        const double f = std::pow(jj, k);
        const double c = std::cos(jj * t + shift), s = std::sin(jj * t + shift);
        p.x += f * (cx_[j] * c + sx_[j] * s);
        p.y += f * (cy_[j] * c + sy_[j] * s);
    }
    return p;
}

double JordanCurve::curvature(double t) const {
    const Point d1 = eval(t, 1), d2 = eval(t, 2);
    return cross(d1, d2) / std::pow(norm(d1), 3);
}

Point JordanCurve::normal(double t) const {
    const Point d = eval(t, 1);
    const double s = norm(d);
    return {d.y / s, -d.x / s};
}

bool JordanCurve::simple(std::size_t samples) const {
    std::vector<Point> p(samples);
    for (std::size_t i = 0; i < samples; ++i) p[i] = point(kTwoPi * static_cast<double>(i) / samples);
    for (std::size_t i = 0; i < samples; ++i)
        for (std::size_t j = i + 2; j < samples; ++j) {
            if (i == 0 && j == samples - 1) continue;
            if (segments_cross(p[i], p[(i + 1) % samples], p[j], p[(j + 1) % samples])) return false;
        }
    return true;
}

const std::vector<double>& JordanCurve::coefficients(int which) const {
    switch (which) {
        case 0: return cx_;
        case 1: return sx_;
        case 2: return cy_;
        default: return sy_;
    }
}

FermiChart::FermiChart(JordanCurve curve, double delta) : curve_(std::move(curve)), delta_(delta) {
    const auto& c = curve_;
    center_ = BoundaryCurve([c](double u) { return c.point(kTwoPi * u); },
                            [c](double u) { return kTwoPi * c.derivative(kTwoPi * u, 1); });
    box_ = {INFINITY, INFINITY, -INFINITY, -INFINITY};
    for (int i = 0; i < 2048; ++i)
        for (double n : {-delta_, 0.0, delta_}) {
            const Point p = map(kTwoPi * i / 2048.0, n);
            box_.x0 = std::min(box_.x0, p.x);
            box_.y0 = std::min(box_.y0, p.y);
            box_.x1 = std::max(box_.x1, p.x);
            box_.y1 = std::max(box_.y1, p.y);
        }
    const double pad = 1e-3 * std::max(box_.width(), box_.height());
    box_ = {box_.x0 - pad, box_.y0 - pad, box_.x1 + pad, box_.y1 + pad};
    // Seeds: parameter of the nearest sample to each cell center.
    raster_ = 192;
    const int ns = 512;
    std::vector<Point> samples(ns);
    for (int i = 0; i < ns; ++i) samples[i] = curve_.point(kTwoPi * i / ns);
    const double hx = box_.width() / raster_, hy = box_.height() / raster_;
    const double reach = 1.5 * delta_ + std::hypot(hx, hy);
    seed_.assign(static_cast<std::size_t>(raster_) * raster_, kNaN);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < raster_; ++j)
        for (int i = 0; i < raster_; ++i) {
            const Point q{box_.x0 + (i + 0.5) * hx, box_.y0 + (j + 0.5) * hy};
            double best = INFINITY;
            int bi = 0;
            for (int k = 0; k < ns; ++k) {
                const double d = norm(samples[k] - q);
                if (d < best) {
                    best = d;
                    bi = k;
                }
            }
            if (best <= reach) seed_[static_cast<std::size_t>(j) * raster_ + i] = kTwoPi * bi / ns;
        }
}

Point FermiChart::map(double t, double n) const { return curve_.point(t) + n * curve_.normal(t); }

Point FermiChart::from_fermi(double u, double n) const { return map(kTwoPi * u, n); }

std::optional<std::pair<double, double>> FermiChart::invert(Point p) const {
    if (p.x < box_.x0 || p.x > box_.x1 || p.y < box_.y0 || p.y > box_.y1) return std::nullopt;
    const int i = std::min(raster_ - 1, static_cast<int>((p.x - box_.x0) / box_.width() * raster_));
    const int j = std::min(raster_ - 1, static_cast<int>((p.y - box_.y0) / box_.height() * raster_));
    double t = seed_[static_cast<std::size_t>(j) * raster_ + i];
    if (std::isnan(t)) return std::nullopt;
    // Newton on (gamma(t) - p) . gamma'(t) = 0.
    for (int it = 0; it < 40; ++it) {
        const Point g = curve_.point(t) - p, d1 = curve_.derivative(t, 1), d2 = curve_.derivative(t, 2);
        const double f = dot(g, d1), fp = dot(d1, d1) + dot(g, d2);
        if (!(fp > 0.0)) return std::nullopt;
        const double dt = f / fp;
        t -= dt;
        if (std::abs(dt) <= 1e-15) break;
    }
    t = wrap_t(t);
    const double n = dot(p - curve_.point(t), curve_.normal(t));
    if (norm(map(t, n) - p) > 1e-10 * (1.0 + norm(p))) return std::nullopt;
    return std::make_pair(t, n);
}

std::optional<std::pair<double, double>> FermiChart::to_fermi(Point p) const {
    auto tn = invert(p);
    if (!tn || std::abs(tn->second) > 1.5 * delta_) return std::nullopt;
    return std::make_pair(tn->first / kTwoPi, tn->second);
}

std::pair<Jet, Jet> FermiChart::inverse_jets(Point p, int order) const {
    const auto tn = invert(p);
    if (!tn) throw FieldError("point outside the Fermi chart");
    const auto [t0, n0] = *tn;
    if (order == 0) return {Jet(0, t0), Jet(0, n0)};
    const Jet X = Jet::variable_x(order, t0), Y = Jet::variable_y(order, n0);
    Jet gx(order), gy(order), dx(order), dy(order);
    const auto &cx = curve_.coefficients(0), &sx = curve_.coefficients(1);
    const auto &cy = curve_.coefficients(2), &sy = curve_.coefficients(3);
    gx += cx[0];
    gy += cy[0];
    for (std::size_t j = 1; j < cx.size(); ++j) {
        const double jj = static_cast<double>(j);
        const Jet c = cos(jj * X), s = sin(jj * X);
        gx += cx[j] * c + sx[j] * s;
        gy += cy[j] * c + sy[j] * s;
        dx += (jj * sx[j]) * c - (jj * cx[j]) * s;
        dy += (jj * sy[j]) * c - (jj * cy[j]) * s;
    }
    const Jet inv = reciprocal(sqrt(dx * dx + dy * dy));
    const Jet Fx = gx + Y * (dy * inv), Fy = gy - Y * (dx * inv);
    const double a00 = Fx(1, 0), a01 = Fx(0, 1), a10 = Fy(1, 0), a11 = Fy(0, 1);
    const double det = a00 * a11 - a01 * a10;
    const Jet tau = X - t0, eta = Y - n0;
    const Jet Nx = Fx - Fx.value() - a00 * tau - a01 * eta;
    const Jet Ny = Fy - Fy.value() - a10 * tau - a11 * eta;
    const Jet zx = Jet::variable_x(order, p.x) - p.x, zy = Jet::variable_y(order, p.y) - p.y;
    auto solve = [&](const Jet& rx, const Jet& ry) {
        return std::make_pair((a11 * rx - a01 * ry) / det, (a00 * ry - a10 * rx) / det);
    };
    auto w = solve(zx, zy);
    // Each pass fixes one more order of the inverse series.
    for (int it = 1; it < order; ++it) {
        const Jet u = w.first + t0, v = w.second + n0;
        w = solve(zx - compose(Nx, u, v), zy - compose(Ny, u, v));
    }
    return {w.first + t0, w.second + n0};
}

ChartPtr build_fermi_chart(const JordanCurve& curve, double delta) {
    if (!(delta > 0.0)) throw CounterexampleError("tube half-width must be positive");
    if (delta * curve.max_curvature() > 0.5)
        throw CounterexampleError("tube too wide: delta * max curvature > 0.5 (Fermi chart not injective)");
    if (!curve.simple()) throw CounterexampleError("curve self-intersects");
    return std::make_shared<FermiChart>(curve, delta);
}

namespace {

/// Real DFT on a uniform grid of M points.
class Spectral {
public:
    explicit Spectral(int M) : M_(M), cos_(M), sin_(M) {
        for (int i = 0; i < M; ++i) {
            cos_[i] = std::cos(kTwoPi * i / M);
            sin_[i] = std::sin(kTwoPi * i / M);
        }
    }
    int size() const { return M_; }
    double node(int i) const { return kTwoPi * i / M_; }
    int max_mode() const { return M_ / 2; }

    void analyze(const std::vector<double>& v, std::vector<double>& a, std::vector<double>& b) const {
        const int J = max_mode();
        a.assign(J + 1, 0.0);
        b.assign(J + 1, 0.0);
        for (int j = 0; j <= J; ++j) {
            double sa = 0.0, sb = 0.0;
            for (int i = 0; i < M_; ++i) {
                const int idx = static_cast<int>((static_cast<long>(j) * i) % M_);
                sa += v[i] * cos_[idx];
                sb += v[i] * sin_[idx];
            }
            const double w = (j == 0 || j == J) ? 1.0 / M_ : 2.0 / M_;
            a[j] = w * sa;
            b[j] = (j == J) ? 0.0 : w * sb;
        }
    }
    std::vector<double> synthesize(const std::vector<double>& a, const std::vector<double>& b) const {
        std::vector<double> v(M_, 0.0);
        for (int i = 0; i < M_; ++i)
            for (std::size_t j = 0; j < a.size(); ++j) {
                const int idx = static_cast<int>((static_cast<long>(j) * i) % M_);
                v[i] += a[j] * cos_[idx] + b[j] * sin_[idx];
            }
        return v;
    }
    std::vector<double> derivative(const std::vector<double>& v) const {
        std::vector<double> a, b;
        analyze(v, a, b);
        std::vector<double> da(a.size(), 0.0), db(a.size(), 0.0);
        for (std::size_t j = 1; j + 1 < a.size(); ++j) {
            da[j] = j * b[j];
            db[j] = -static_cast<double>(j) * a[j];
        }
        return synthesize(da, db);
    }
    void truncate(std::vector<double>& v, int modes, std::vector<double>* a_out = nullptr,
                  std::vector<double>* b_out = nullptr) const {
        std::vector<double> a, b;
        analyze(v, a, b);
        a.resize(std::min<std::size_t>(a.size(), modes + 1));
        b.resize(a.size());
        v = synthesize(a, b);
        if (a_out) *a_out = a;
        if (b_out) *b_out = b;
    }

private:
    int M_;
    std::vector<double> cos_, sin_;
};

using Grid = std::vector<double>;
using Series = std::vector<Grid>;

Series mul(const Series& A, const Series& B, std::size_t terms) {
    const std::size_t M = A.front().size();
    Series C(terms, Grid(M, 0.0));
    for (std::size_t i = 0; i < A.size() && i < terms; ++i)
        for (std::size_t j = 0; j < B.size() && i + j < terms; ++j)
            for (std::size_t q = 0; q < M; ++q) C[i + j][q] += A[i][q] * B[j][q];
    return C;
}

Series d_n(const Series& A) {
    Series D(A.size(), Grid(A.front().size(), 0.0));
    for (std::size_t k = 1; k < A.size(); ++k)
        for (std::size_t q = 0; q < A[k].size(); ++q) D[k - 1][q] = k * A[k][q];
    return D;
}

Series scaled(const Series& A, const Grid& w) {
    Series B = A;
    for (auto& g : B)
        for (std::size_t q = 0; q < g.size(); ++q) g[q] *= w[q];
    return B;
}

/// Coefficients of Delta psi - 2 + n^5 (psi / n^2)^{5/2}, orders 0..N-2.
Series equation_residual(const Series& c, const Grid& kappa, const Grid& inv_sigma, const Spectral& sp) {
    const std::size_t S = c.size(), M = kappa.size();
    Series invh(S, Grid(M));
    for (std::size_t q = 0; q < M; ++q) {
        double v = 1.0;
        for (std::size_t j = 0; j < S; ++j, v *= -kappa[q]) invh[j][q] = v;
    }
    const Series pn = d_n(c), pnn = d_n(pn);
    const Series t2 = scaled(mul(invh, pn, S), kappa);
    Series pt(S);
    for (std::size_t k = 0; k < S; ++k) pt[k] = sp.derivative(c[k]);
    Series A = scaled(mul(invh, pt, S), inv_sigma);
    for (auto& g : A) g = sp.derivative(g);
    const Series t3 = scaled(mul(invh, A, S), inv_sigma);
    const std::size_t orders = S - 2;
    Series E(orders + 1, Grid(M, 0.0));
    for (std::size_t m = 0; m <= orders; ++m)
        for (std::size_t q = 0; q < M; ++q) E[m][q] = pnn[m][q] + t2[m][q] + t3[m][q] - (m == 0 ? 2.0 : 0.0);
    // n^5 Q with Q = P^{5/2}, P_j = c_{j+2}.
    if (orders >= 5) {
        const std::size_t L = orders - 5 + 1;
        const double alpha = 2.5;
        for (std::size_t q = 0; q < M; ++q) {
            const double P0 = c[2][q];
            if (!(P0 > 0.0)) continue;
            std::vector<double> Q(L, 0.0);
            Q[0] = std::pow(P0, alpha);
            for (std::size_t m = 1; m < L; ++m) {
                double s = 0.0;
                for (std::size_t k = 1; k <= m && k + 2 < S; ++k)
                    s += ((alpha + 1.0) * k - m) * c[k + 2][q] * Q[m - k];
                Q[m] = s / (m * P0);
            }
            for (std::size_t m = 0; m < L; ++m) E[m + 5][q] += Q[m];
        }
    }
    return E;
}

int pick_modes(const FermiChart& chart) {
    const auto& curve = chart.curve();
    int Ns = 4 * curve.modes();
    while (Ns < 256) {
        const Spectral sp(std::max(16, 4 * Ns));
        Grid k(sp.size()), s(sp.size());
        for (int i = 0; i < sp.size(); ++i) {
            k[i] = curve.curvature(sp.node(i));
            s[i] = 1.0 / curve.speed(sp.node(i));
        }
        double worst = 0.0;
        for (const Grid* g : {&k, &s}) {
            std::vector<double> a, b;
            sp.analyze(*g, a, b);
            double big = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) big = std::max(big, std::hypot(a[j], b[j]));
            worst = std::max(worst, std::hypot(a[Ns], b[Ns]) / big);
        }
        if (worst <= 1e-12) break;
        Ns *= 2;
    }
    return Ns;
}

}  // namespace

double TubeSeriesSolution::coefficient(int k, double t) const {
    if (k < 0 || k >= static_cast<int>(a.size())) return 0.0;
    double v = 0.0;
    for (std::size_t j = 0; j < a[k].size(); ++j) v += a[k][j] * std::cos(j * t) + b[k][j] * std::sin(j * t);
    return v;
}

double TubeSeriesSolution::coefficient_norm(int k) const {
    double s = 0.0;
    for (int i = 0; i < 256; ++i) s = std::max(s, std::abs(coefficient(k, kTwoPi * i / 256)));
    return s;
}

double TubeSeriesSolution::value(double t, double n) const {
    double v = 0.0;
    for (int k = static_cast<int>(a.size()) - 1; k >= 0; --k) v = v * n + coefficient(k, t);
    return v;
}

TubeSeriesSolution solve_tube_series(const FermiChart& chart, int Nn, int Ns) {
    if (Nn < 6) throw CounterexampleError("the two-sided series needs Nn >= 6");
    if (Ns <= 0) Ns = pick_modes(chart);
    const Spectral sp(std::max(16, 4 * Ns));
    const int M = sp.size();
    const auto& curve = chart.curve();
    Grid kappa(M), inv_sigma(M);
    for (int i = 0; i < M; ++i) {
        kappa[i] = curve.curvature(sp.node(i));
        inv_sigma[i] = 1.0 / curve.speed(sp.node(i));
    }
    TubeSeriesSolution sol;
    sol.Nn = Nn;
    sol.Ns = Ns;
    Series c(Nn + 1, Grid(M, 0.0));
    sol.a.assign(Nn + 1, std::vector<double>(Ns + 1, 0.0));
    sol.b = sol.a;
    for (int m = 0; m + 2 <= Nn; ++m) {
        const int k = m + 2;
        std::fill(c[k].begin(), c[k].end(), 0.0);
        const Series E = equation_residual(c, kappa, inv_sigma, sp);
        for (int q = 0; q < M; ++q) c[k][q] = -E[m][q] / ((m + 2.0) * (m + 1.0));
        if (!std::all_of(c[k].begin(), c[k].end(), [](double v) { return std::isfinite(v); }))
            throw CounterexampleError("series recursion broke down at order " + std::to_string(k));
        sp.truncate(c[k], Ns, &sol.a[k], &sol.b[k]);
        sol.a[k].resize(Ns + 1, 0.0);
        sol.b[k].resize(Ns + 1, 0.0);
    }
    const Series E = equation_residual(c, kappa, inv_sigma, sp);
    for (int m = 0; m + 2 <= Nn; ++m) {
        double e = 0.0, ck = 0.0;
        for (double v : E[m]) e = std::max(e, std::abs(v));
        for (double v : c[m + 2]) ck = std::max(ck, std::abs(v));
        if (ck > 0.0) sol.recursion_residual = std::max(sol.recursion_residual, e / ((m + 2.0) * (m + 1.0) * ck));
    }
    for (double v : c[2]) sol.c2_error = std::max(sol.c2_error, std::abs(v - 1.0));
    for (int k = 0; k <= Nn; ++k)
        for (int j = 1; j <= Ns; ++j)
            sol.nonzero_modes = std::max({sol.nonzero_modes, std::abs(sol.a[k][j]), std::abs(sol.b[k][j])});
    // log ||c_k|| = log A - k log rho over k >= 3.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = 3; k <= Nn; ++k) {
        const double nk = sol.coefficient_norm(k);
        if (!(nk > 0.0)) continue;
        sx += k;
        sy += std::log(nk);
        sxx += static_cast<double>(k) * k;
        sxy += k * std::log(nk);
        ++cnt;
    }
    if (cnt >= 2) {
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        sol.decay_rho = std::exp(-slope);
        double logA = -INFINITY;
        for (int k = 3; k <= Nn; ++k) {
            const double nk = sol.coefficient_norm(k);
            if (nk > 0.0) logA = std::max(logA, std::log(nk) + k * std::log(sol.decay_rho));
        }
        sol.decay_A = std::exp(logA);
    }
    return sol;
}

namespace {

class TubeSeriesField final : public ScalarField {
public:
    TubeSeriesField(TubeSeriesSolution s, ChartPtr chart)
        : s_(std::move(s)), chart_(std::move(chart)), domain_(Domain::jordan_tube(chart_)) {}
    const Domain& domain() const override { return domain_; }
    int max_order() const override { return 6; }
    FieldSource source() const override { return FieldSource::Series; }
    std::string name() const override { return "tube-series"; }

    Jet jet(Point p, int order) const override {
        if (order > max_order()) throw FieldError("tube-series: order exceeds cap");
        const auto tn = chart_->invert(p);
        if (!tn || std::abs(tn->second) > chart_->half_width() * (1.0 + 1e-12))
            throw FieldError("tube-series: point outside |n| <= delta");
        const auto [t0, n0] = *tn;
        if (order == 0) return Jet(0, s_.value(t0, n0));
        const auto [tj, nj] = chart_->inverse_jets(p, order);
        // Taylor coefficients in (tau, eta) about (t0, n0): d^i c_k / dt^i / i!
        // times the binomial expansion of (n0 + eta)^k.
        const int J = s_.Ns, K = s_.Nn;
        std::vector<double> cj(J + 1), sj(J + 1);
        for (int j = 0; j <= J; ++j) {
            cj[j] = std::cos(j * t0);
            sj[j] = std::sin(j * t0);
        }
        std::vector<double> dk((K + 1) * (order + 1), 0.0);
        for (int k = 0; k <= K; ++k)
            for (int j = 0; j <= J; ++j) {
                const double a = s_.a[k][j], b = s_.b[k][j];
                if (a == 0.0 && b == 0.0) continue;
                // d/dt (a cos + b sin) = j (b cos - a sin).
                double ca = a, cb = b, f = 1.0;
                for (int i = 0; i <= order; ++i) {
                    dk[k * (order + 1) + i] += f * (ca * cj[j] + cb * sj[j]);
                    const double na = j * cb, nb = -j * ca;
                    ca = na;
                    cb = nb;
                    f /= (i + 1.0);
                }
            }
        Jet g(order);
        for (int i = 0; i <= order; ++i)
            for (int e = 0; i + e <= order; ++e) {
                double v = 0.0;
                for (int k = e; k <= K; ++k) {
                    double binom = 1.0;
                    for (int q = 0; q < e; ++q) binom *= static_cast<double>(k - q) / (q + 1.0);
                    v += dk[k * (order + 1) + i] * binom * std::pow(n0, k - e);
                }
                g.coef(i, e) = v;
            }
        return compose(g, tj, nj);
    }

private:
    TubeSeriesSolution s_;
    ChartPtr chart_;
    Domain domain_;
};

}  // namespace

FieldPtr export_field(const TubeSeriesSolution& solution, ChartPtr chart) {
    if (!chart) throw CounterexampleError("export needs a chart");
    if (solution.a.empty()) throw CounterexampleError("empty series solution");
    return std::make_shared<TubeSeriesField>(solution, std::move(chart));
}

TubeResidual tube_residual(const ScalarField& psi, const FermiChart& chart, int nt, int nn) {
    TubeResidual r;
    const double d = chart.half_width();
    auto forcing = [](double n, double s) {
        const double p = std::pow(std::max(s, 0.0), 2.5);
        return n < 0.0 ? 2.0 + p : 2.0 - p;
    };
    for (int i = 0; i < nt; ++i) {
        const double t = kTwoPi * (i + 0.25) / nt;
        // Curve samples.
        const Point g = chart.map(t, 0.0);
        const Jet jg = psi.jet(g, 1);
        const Point nu = chart.curve().normal(t);
        r.boundary_psi = std::max(r.boundary_psi, std::abs(jg.value()));
        r.boundary_dn = std::max(r.boundary_dn, std::abs(jg(1, 0) * nu.x + jg(0, 1) * nu.y));
        for (int j = 0; j < 2 * nn; ++j) {
            // First nn offsets cover |n| <= d/2, the rest the outer zone.
            const bool outer = j >= nn;
            const double u = (j % nn + 0.5) / nn;
            for (double sgn : {-1.0, 1.0}) {
                const double n = sgn * (outer ? d * (0.5 + 0.5 * u) : 0.5 * d * u);
                const Point x = chart.map(t, n);
                if (const auto back = chart.invert(x))
                    r.chart_error = std::max(r.chart_error, norm(chart.map(back->first, back->second) - x));
                if (outer && std::abs(n) > d * (1.0 - 1e-9)) continue;
                const Jet j2 = psi.jet(x, 2);
                const double res = std::abs(2.0 * (j2(2, 0) + j2(0, 2)) - forcing(n, j2.value()));
                ++r.samples;
                if (outer)
                    r.outer_zone = std::max(r.outer_zone, res);
                else if (n < 0.0)
                    r.interior = std::max(r.interior, res);
                else
                    r.exterior = std::max(r.exterior, res);
            }
        }
    }
    return r;
}

CircularOracle circular_oracle(double delta, int steps) {
    if (!(delta > 0.0 && delta < 1.0)) throw CounterexampleError("circular oracle needs 0 < delta < 1");
    auto run = [&](double sgn, double side) {
        // side = -1 integrates inward with F = 2 + sgn psi^{5/2} -> sgn = +1.
        auto rhs = [sgn](double r, double y0, double y1, double& f0, double& f1) {
            f0 = y1;
            f1 = 2.0 + sgn * std::pow(std::max(y0, 0.0), 2.5) - y1 / r;
        };
        const double h = side * delta / steps;
        std::vector<double> R{1.0}, P{0.0}, D{0.0}, D2{2.0};
        double r = 1.0, y0 = 0.0, y1 = 0.0;
        for (int i = 0; i < steps; ++i) {
            double k0a, k0b, k1a, k1b, k2a, k2b, k3a, k3b;
            rhs(r, y0, y1, k0a, k0b);
            rhs(r + 0.5 * h, y0 + 0.5 * h * k0a, y1 + 0.5 * h * k0b, k1a, k1b);
            rhs(r + 0.5 * h, y0 + 0.5 * h * k1a, y1 + 0.5 * h * k1b, k2a, k2b);
            rhs(r + h, y0 + h * k2a, y1 + h * k2b, k3a, k3b);
            y0 += h / 6.0 * (k0a + 2 * k1a + 2 * k2a + k3a);
            y1 += h / 6.0 * (k0b + 2 * k1b + 2 * k2b + k3b);
            r = 1.0 + side * delta * (i + 1.0) / steps;
            if (!std::isfinite(y0) || !std::isfinite(y1)) throw CounterexampleError("circular oracle diverged");
            double f0, f1;
            rhs(r, y0, y1, f0, f1);
            R.push_back(r);
            P.push_back(y0);
            D.push_back(y1);
            D2.push_back(f1);
        }
        if (side < 0) {
            std::reverse(R.begin(), R.end());
            std::reverse(P.begin(), P.end());
            std::reverse(D.begin(), D.end());
            std::reverse(D2.begin(), D2.end());
        }
        RadialProfile p;
        p.r = R;
        p.psi = P;
        p.dpsi = D;
        p.d2psi = D2;
        p.R = R.back();
        p.psi_R = P.back();
        p.dpsi_R = D.back();
        p.d2psi_R = D2.back();
        p.steps = static_cast<std::size_t>(steps);
        // Below r.front() value() would use the center series; keep it at the first node.
        p.psi0 = P.front();
        return p;
    };
    CircularOracle o;
    o.inner = run(1.0, -1.0);
    o.outer = run(-1.0, 1.0);
    return o;
}

}  // namespace sew
