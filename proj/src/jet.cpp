#include "sew/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sew {

double factorial(int n) {
    static const auto table = [] {
        std::array<double, 2 * kMaxJetOrder + 2> t{};
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
        return t;
    }();
    if (n < 0 || n >= static_cast<int>(table.size())) throw std::out_of_range("factorial");
    return table[static_cast<std::size_t>(n)];
}

Jet::Jet(int order, double value) : order_(order) {
    if (order < 0 || order > kMaxJetOrder) throw std::out_of_range("jet order exceeds kMaxJetOrder");
    c_[0] = value;
}

Jet Jet::variable_x(int order, double x0) {
    Jet j(order, x0);
    if (order >= 1) j.coef(1, 0) = 1.0;
    return j;
}

Jet Jet::variable_y(int order, double y0) {
    Jet j(order, y0);
    if (order >= 1) j.coef(0, 1) = 1.0;
    return j;
}

Jet Jet::d_dx() const {
    Jet r(std::max(order_ - 1, 0));
    if (order_ == 0) return r;
    for (int k = 0; k <= r.order_; ++k)
        for (int j = 0; j <= k; ++j) {
            const int i = k - j;
            r.coef(i, j) = (*this)(i + 1, j) * (i + 1);
        }
    return r;
}

Jet Jet::d_dy() const {
    Jet r(std::max(order_ - 1, 0));
    if (order_ == 0) return r;
    for (int k = 0; k <= r.order_; ++k)
        for (int j = 0; j <= k; ++j) {
            const int i = k - j;
            r.coef(i, j) = (*this)(i, j + 1) * (j + 1);
        }
    return r;
}

Jet Jet::truncated(int order) const {
    if (order > order_) throw std::invalid_argument("cannot raise jet order by truncation");
    Jet r(order);
    const int n = (order + 1) * (order + 2) / 2;
    std::copy_n(c_.begin(), n, r.c_.begin());
    return r;
}

double Jet::max_coefficient(int k) const {
    double m = 0.0;
    if (k > order_) return m;
    for (int j = 0; j <= k; ++j) m = std::max(m, std::abs((*this)(k - j, j)));
    return m;
}

Jet& Jet::operator+=(const Jet& o) {
    order_ = std::min(order_, o.order_);
    const int n = (order_ + 1) * (order_ + 2) / 2;
    for (int i = 0; i < n; ++i) c_[i] += o.c_[i];
    for (int i = n; i < kMaxJetTerms; ++i) c_[i] = 0.0;
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    order_ = std::min(order_, o.order_);
    const int n = (order_ + 1) * (order_ + 2) / 2;
    for (int i = 0; i < n; ++i) c_[i] -= o.c_[i];
    for (int i = n; i < kMaxJetTerms; ++i) c_[i] = 0.0;
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet Jet::operator-() const {
    Jet r = *this;
    for (auto& v : r.c_) v = -v;
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    const int order = std::min(a.order_, b.order_);
    Jet r(order);
    for (int k = 0; k <= order; ++k) {
        for (int j = 0; j <= k; ++j) {
            const int i = k - j;
            double s = 0.0;
            for (int i1 = 0; i1 <= i; ++i1)
                for (int j1 = 0; j1 <= j; ++j1) s += a(i1, j1) * b(i - i1, j - j1);
            r.coef(i, j) = s;
        }
    }
    return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator/(double s, const Jet& b) { return reciprocal(b) * s; }

Jet apply_univariate(const Jet& a, std::span<const double> derivs) {
    const int order = a.order();
    if (static_cast<int>(derivs.size()) < order + 1) throw std::invalid_argument("apply_univariate: too few derivatives");
    Jet delta = a;
    delta.coef(0, 0) = 0.0;
    Jet result(order, derivs[0]);
    Jet power(order, 1.0);
    for (int m = 1; m <= order; ++m) {
        power = power * delta;
        result += power * (derivs[static_cast<std::size_t>(m)] / factorial(m));
    }
    return result;
}

namespace {

std::vector<double> derivs_buffer(int order) { return std::vector<double>(static_cast<std::size_t>(order) + 1); }

}  // namespace

Jet sin(const Jet& a) {
    auto d = derivs_buffer(a.order());
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const double cycle[4] = {s, c, -s, -c};
    for (std::size_t m = 0; m < d.size(); ++m) d[m] = cycle[m % 4];
    return apply_univariate(a, d);
}

Jet cos(const Jet& a) {
    auto d = derivs_buffer(a.order());
    const double s = std::sin(a.value()), c = std::cos(a.value());
    const double cycle[4] = {c, -s, -c, s};
    for (std::size_t m = 0; m < d.size(); ++m) d[m] = cycle[m % 4];
    return apply_univariate(a, d);
}

Jet exp(const Jet& a) {
    auto d = derivs_buffer(a.order());
    std::fill(d.begin(), d.end(), std::exp(a.value()));
    return apply_univariate(a, d);
}

Jet log(const Jet& a) {
    const double x = a.value();
    if (!(x > 0.0)) throw std::domain_error("log of non-positive jet");
    auto d = derivs_buffer(a.order());
    d[0] = std::log(x);
    for (std::size_t m = 1; m < d.size(); ++m) {
        const int mi = static_cast<int>(m);
        d[m] = ((mi % 2 == 1) ? 1.0 : -1.0) * factorial(mi - 1) / std::pow(x, mi);
    }
    return apply_univariate(a, d);
}

Jet pow(const Jet& a, double alpha) {
    const double x = a.value();
    auto d = derivs_buffer(a.order());
    const bool integral = alpha == std::floor(alpha) && alpha >= 0.0;
    if (!integral && !(x > 0.0)) throw std::domain_error("fractional power of non-positive jet");
    double falling = 1.0;
    for (std::size_t m = 0; m < d.size(); ++m) {
        const double e = alpha - static_cast<double>(m);
        d[m] = (falling == 0.0) ? 0.0 : falling * std::pow(x, e);
        falling *= e;
    }
    return apply_univariate(a, d);
}

Jet pow(const Jet& a, int n) {
    if (n < 0) return reciprocal(pow(a, -n));
    Jet r(a.order(), 1.0);
    Jet base = a;
    while (n > 0) {
        if (n & 1) r = r * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return r;
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet reciprocal(const Jet& a) {
    const double x = a.value();
    if (x == 0.0) throw std::domain_error("reciprocal of zero jet");
    auto d = derivs_buffer(a.order());
    double p = 1.0 / x;
    for (std::size_t m = 0; m < d.size(); ++m) {
        d[m] = ((m % 2 == 0) ? 1.0 : -1.0) * factorial(static_cast<int>(m)) * p;
        p /= x;
    }
    return apply_univariate(a, d);
}

Jet atan(const Jet& a) {
    const int order = a.order();
    const double c = a.value();
    // Taylor coefficients of 1/(1 + (c+t)^2) in t.
    const double q0 = 1.0 + c * c, q1 = 2.0 * c, q2 = 1.0;
    std::vector<double> r(static_cast<std::size_t>(order) + 1, 0.0);
    r[0] = 1.0 / q0;
    for (int k = 1; k <= order; ++k) {
        double s = q1 * r[static_cast<std::size_t>(k - 1)];
        if (k >= 2) s += q2 * r[static_cast<std::size_t>(k - 2)];
        r[static_cast<std::size_t>(k)] = -s / q0;
    }
    auto d = derivs_buffer(order);
    d[0] = std::atan(c);
    for (int m = 1; m <= order; ++m)
        d[static_cast<std::size_t>(m)] = r[static_cast<std::size_t>(m - 1)] / m * factorial(m);
    return apply_univariate(a, d);
}

Jet compose(const Jet& f, const Jet& u, const Jet& v) {
    const int order = std::min({f.order(), u.order(), v.order()});
    Jet du = u.truncated(order), dv = v.truncated(order);
    du.coef(0, 0) = 0.0;
    dv.coef(0, 0) = 0.0;
    std::vector<Jet> pu(static_cast<std::size_t>(order) + 1), pv(static_cast<std::size_t>(order) + 1);
    pu[0] = Jet(order, 1.0);
    pv[0] = Jet(order, 1.0);
    for (int k = 1; k <= order; ++k) {
        pu[static_cast<std::size_t>(k)] = pu[static_cast<std::size_t>(k - 1)] * du;
        pv[static_cast<std::size_t>(k)] = pv[static_cast<std::size_t>(k - 1)] * dv;
    }
    Jet r(order, 0.0);
    for (int k = 0; k <= order; ++k)
        for (int j = 0; j <= k; ++j) {
            const int i = k - j;
            const double fij = f(i, j);
            if (fij == 0.0) continue;
            r += (pu[static_cast<std::size_t>(i)] * pv[static_cast<std::size_t>(j)]) * fij;
        }
    return r;
}

}  // namespace sew
