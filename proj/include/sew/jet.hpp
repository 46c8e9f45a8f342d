/// @file jet.hpp
/// @brief Truncated bivariate Taylor arithmetic.
///
/// A Jet holds the Taylor coefficients c(i,j) of a function about a point,
/// f(x0+dx, y0+dy) = sum c(i,j) dx^i dy^j for i+j <= order. Closed-form fields
/// are evaluated on jets, which yields exact partial derivatives (up to
/// rounding) without finite differences.
#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace sew {

inline constexpr int kMaxJetOrder = 10;
inline constexpr int kMaxJetTerms = (kMaxJetOrder + 1) * (kMaxJetOrder + 2) / 2;

constexpr int jet_index(int i, int j) {
    const int k = i + j;
    return k * (k + 1) / 2 + j;
}

double factorial(int n);

class Jet {
public:
    Jet() = default;
    explicit Jet(int order, double value = 0.0);

    /// Jet of the coordinate function x about x0 (or y about y0).
    static Jet variable_x(int order, double x0);
    static Jet variable_y(int order, double y0);

    int order() const { return order_; }
    double value() const { return c_[0]; }

    double operator()(int i, int j) const { return c_[jet_index(i, j)]; }
    double& coef(int i, int j) { return c_[jet_index(i, j)]; }

    /// Partial derivative d^{i+j} / dx^i dy^j at the expansion point.
    double derivative(int i, int j) const { return (*this)(i, j) * factorial(i) * factorial(j); }

    /// Jet of d/dx (resp. d/dy); the order drops by one.
    Jet d_dx() const;
    Jet d_dy() const;

    Jet truncated(int order) const;

    /// Largest |c(i,j)| over i+j == k.
    double max_coefficient(int k) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator+=(double s) { c_[0] += s; return *this; }
    Jet& operator-=(double s) { c_[0] -= s; return *this; }
    Jet& operator*=(double s);
    Jet& operator/=(double s) { return *this *= (1.0 / s); }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return -a + s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a /= s; }
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator/(double s, const Jet& b);
    Jet operator-() const;

private:
    int order_ = 0;
    std::array<double, kMaxJetTerms> c_{};
};

/// f(a) for a univariate f given its derivatives at a.value():
/// derivs[m] = f^{(m)}(a0), m = 0..a.order().
Jet apply_univariate(const Jet& a, std::span<const double> derivs);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double alpha);
Jet pow(const Jet& a, int n);
Jet reciprocal(const Jet& a);
Jet atan(const Jet& a);

/// Evaluate f(u, v) where f is given as a jet in its own variables about
/// (u.value(), v.value()) and u, v are jets in (x, y).
Jet compose(const Jet& f, const Jet& u, const Jet& v);

}  // namespace sew
