/// @file counterexample.hpp
/// @brief Fourier Jordan curves, Fermi charts, and the two-sided tube series
/// with Delta psi = 2 + psi^{5/2} inside and 2 - psi^{5/2} outside.
///
/// Orientation: curves run counterclockwise, n > 0 on the exterior side.
#pragma once

#include "sew/elliptic.hpp"
#include "sew/field.hpp"

#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace sew {

class CounterexampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// x(t) = sum_j cx[j] cos(j t) + sx[j] sin(j t), likewise y, t in [0, 2 pi).
class JordanCurve {
public:
    JordanCurve(std::vector<double> cx, std::vector<double> sx, std::vector<double> cy, std::vector<double> sy);
    static JordanCurve circle(Point center = {0.0, 0.0}, double radius = 1.0);
    static JordanCurve ellipse(double a, double b, Point center = {0.0, 0.0});

    Point point(double t) const { return eval(t, 0); }
    /// d^k gamma / dt^k.
    Point derivative(double t, int k) const { return eval(t, k); }
    double speed(double t) const { return norm(eval(t, 1)); }
    /// Signed curvature (positive for convex counterclockwise curves).
    double curvature(double t) const;
    /// Outward unit normal.
    Point normal(double t) const;
    int modes() const { return static_cast<int>(cx_.size()) - 1; }
    double length() const { return length_; }
    double max_curvature() const { return kappa_max_; }
    /// Polyline self-intersection test on `samples` points.
    bool simple(std::size_t samples = 1024) const;
    /// (cx, sx, cy, sy).
    const std::vector<double>& coefficients(int which) const;

private:
    Point eval(double t, int k) const;
    std::vector<double> cx_, sx_, cy_, sy_;
    double length_ = 0.0, kappa_max_ = 0.0;
};

/// (t, n) -> gamma(t) + n nu(t). The TubeChart interface uses u = t / (2 pi).
class FermiChart final : public TubeChart {
public:
    FermiChart(JordanCurve curve, double delta);

    std::optional<std::pair<double, double>> to_fermi(Point p) const override;
    Point from_fermi(double u, double n) const override;
    double half_width() const override { return delta_; }
    Box bounding_box() const override { return box_; }
    const BoundaryCurve& center_curve() const override { return center_; }

    /// (t, n) with t in [0, 2 pi); no tube restriction.
    std::optional<std::pair<double, double>> invert(Point p) const;
    Point map(double t, double n) const;
    /// Jets of t(x, y) and n(x, y) about p.
    std::pair<Jet, Jet> inverse_jets(Point p, int order) const;
    const JordanCurve& curve() const { return curve_; }

private:
    JordanCurve curve_;
    double delta_;
    Box box_;
    BoundaryCurve center_;
    /// Initial parameters for Newton on a raster over the box (NaN far away).
    int raster_ = 0;
    std::vector<double> seed_;
};

using ChartPtr = std::shared_ptr<const FermiChart>;

/// Requires delta * max curvature <= 0.5 and a simple curve.
ChartPtr build_fermi_chart(const JordanCurve& curve, double delta);

struct TubeSeriesSolution {
    int Nn = 16;
    int Ns = 32;
    /// Fourier coefficients of c_k(t): a[k][j] cos(j t) + b[k][j] sin(j t), k = 0..Nn.
    std::vector<std::vector<double>> a, b;
    /// sup |c_2 - 1| over the grid.
    double c2_error = 0.0;
    /// sup over orders m <= Nn - 2 of the grid residual coefficient relative to
    /// (m+2)(m+1) ||c_{m+2}|| (nonzero only through Fourier truncation).
    double recursion_residual = 0.0;
    /// Fitted ||c_k|| <= A rho^-k.
    double decay_A = 0.0, decay_rho = 0.0;
    /// Largest |mode >= 1| over all c_k (zero for circles).
    double nonzero_modes = 0.0;

    double coefficient(int k, double t) const;
    /// sup_t |c_k(t)|.
    double coefficient_norm(int k) const;
    /// sum_k c_k(t) n^k.
    double value(double t, double n) const;
};

/// Order-by-order recursion on a t-grid; Fourier truncation at Ns modes.
/// Ns <= 0 picks 4x the curve's modes, doubled until the last retained mode of
/// kappa and 1/|gamma'| is below 1e-12 of the largest.
TubeSeriesSolution solve_tube_series(const FermiChart& chart, int Nn = 16, int Ns = 0);

/// The series as a field on the jordan-tube domain.
FieldPtr export_field(const TubeSeriesSolution& solution, ChartPtr chart);

struct TubeResidual {
    /// |Delta psi - (2 + psi^{5/2})| for n < 0 and |Delta psi - (2 - psi^{5/2})| for n > 0.
    double interior = 0.0, exterior = 0.0;
    /// Same over delta/2 < |n| <= delta.
    double outer_zone = 0.0;
    /// sup |psi| and |d_n psi| on the curve.
    double boundary_psi = 0.0, boundary_dn = 0.0;
    /// sup |chart(invert(x)) - x| over the samples.
    double chart_error = 0.0;
    std::size_t samples = 0;
};

/// Samples on a (t, n) grid with |n| <= delta/2 for the main figures.
TubeResidual tube_residual(const ScalarField& psi, const FermiChart& chart, int nt = 64, int nn = 16);

struct CircularOracle {
    /// r ascending on [1 - delta, 1] and [1, 1 + delta].
    RadialProfile inner, outer;
};

/// psi'' + psi'/r = 2 + psi^{5/2} for r < 1, 2 - psi^{5/2} for r > 1,
/// psi(1) = psi'(1) = 0, by classical RK4 from r = 1.
CircularOracle circular_oracle(double delta, int steps = 4000);

}  // namespace sew
