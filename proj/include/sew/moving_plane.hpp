/// @file moving_plane.hpp
/// @brief Moving-plane sweeps: reflection monotonicity, lambda_0, tangency
/// classification, coefficient audit, Hopf sign checks and global verdicts.
#pragma once

#include "sew/field.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sew {

class MovingPlaneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A bounded planar region given by closed boundary curves (even-odd rule),
/// with a raster accelerating membership tests.
class Region {
public:
    explicit Region(std::vector<BoundaryCurve> boundary, int raster = 512);
    /// Disk and annulus domains; jordan-tube domains use their two edges.
    static Region from_domain(const Domain& d);
    static Region interior_of(const BoundaryCurve& c);

    bool contains(Point p) const;
    /// Distance to the boundary curves.
    double boundary_distance(Point p) const;
    const std::vector<BoundaryCurve>& boundary() const { return boundary_; }
    Box bounding_box() const { return box_; }
    double diameter() const { return std::hypot(box_.width(), box_.height()); }

private:
    bool exact_contains(Point p) const;
    std::vector<BoundaryCurve> boundary_;
    Box box_;
    int n_ = 0;
    /// 0 outside, 1 inside, 2 near the boundary (exact test).
    std::vector<std::uint8_t> cells_;
};

/// pi_lambda(x) = x - 2 (x . e - lambda) e.
Point reflect(Point x, Point e, double lambda);

/// h_lambda = psi - psi o pi_lambda as a field with jets.
FieldPtr reflection_difference(FieldPtr psi, Point e, double lambda);

struct ReflectionState {
    Point e;
    double lambda = 0.0;
    bool admissible = true;
    /// Samples of the reflected cap where both x and pi(x) are evaluable.
    std::size_t samples = 0;
    double min_h = 0.0;
    Point argmin;
    double sup_h = 0.0;
    /// Worst boundary overshoot of the reflected cap (<= 0 when inside).
    double overshoot = 0.0;
    Point overshoot_point;
};

struct SweepOptions {
    int lambdas = 256;
    /// Sample grid over the region's bounding box.
    int resolution = 80;
    /// Boundary samples per curve for the admissibility test.
    int boundary_samples = 1024;
    /// Relative to ||psi||_sup.
    double tol_mp = 1e-9;
    /// Relative to the region diameter.
    double clip_tol = 1e-9;
};

/// Sample set shared by all sweeps of one field.
struct SweepContext {
    FieldPtr psi;
    const Region* region = nullptr;
    std::vector<Point> points;
    std::vector<double> values;
    std::vector<Point> boundary_points;
    double psi_sup = 0.0;
    SweepOptions opts;
};

SweepContext make_context(FieldPtr psi, const Region& region, const SweepOptions& opts = {});

ReflectionState reflection_state(const SweepContext& ctx, Point e, double lambda);

/// States on a uniform lambda grid from the region's extent in direction e,
/// up to and including the first inadmissible one.
std::vector<ReflectionState> reflect_sweep(const SweepContext& ctx, Point e);

enum class TangencyKind { Internal, Boundary };
std::string to_string(TangencyKind k);

struct TangencyEvent {
    TangencyKind kind = TangencyKind::Internal;
    Point contact;
    double lambda0 = 0.0;
    /// h vanishes on the reflected cap at lambda_0.
    bool h_zero = false;
    /// "inadmissible" or "monotonicity".
    std::string cause;
};

struct Lambda0Result {
    double lambda0 = 0.0;
    TangencyEvent event;
    ReflectionState state;
    int bisections = 0;
};

/// Bisection between the last monotone admissible and the first failing state.
Lambda0Result find_lambda0(const SweepContext& ctx, const std::vector<ReflectionState>& states,
                           double tol_lambda = 1e-8);

struct DirectionReport {
    Point e;
    double angle = 0.0;
    double lambda0 = 0.0;
    TangencyEvent event;
    bool symmetric = false;
    double sup_h = 0.0;
    /// (lambda, min h) over the sweep.
    std::vector<std::pair<double, double>> profile;
    std::string note;
};

DirectionReport sweep_direction(const SweepContext& ctx, Point e);

enum class GlobalVerdict { Radial, AxisSymmetric, Asymmetric };
std::string to_string(GlobalVerdict v);

struct SymmetryVerdict {
    GlobalVerdict verdict = GlobalVerdict::Asymmetric;
    Point center;
    /// Largest |center . e - lambda_0| over symmetric directions.
    double center_residual = 0.0;
    /// Angles of the symmetric directions' axes (the axis is normal to e).
    std::vector<double> axes;
};

/// tol_center relative to the region diameter.
SymmetryVerdict symmetry_verdict(const std::vector<DirectionReport>& reports, double diameter,
                                 double tol_center = 1e-6);

struct MovingPlaneReport {
    std::vector<DirectionReport> directions;
    SymmetryVerdict verdict;
    /// max over admissible lambda of the coefficient audit, when a flux was given.
    std::optional<double> audit;
};

/// Directions at angles k pi / n, k = 0..n-1.
MovingPlaneReport moving_plane(FieldPtr psi, const Region& region, int directions = 16,
                               const SweepOptions& opts = {}, std::function<double(double)> flux = {});

struct AuditResult {
    double value = 0.0;
    double max_negative_c = 0.0;
    std::size_t samples = 0;
    std::size_t derivative_samples = 0;
    std::size_t skipped = 0;
};

/// max over the reflected cap of max(-c_lambda, 0) dist(x, boundary of the cap),
/// c_lambda = (F(psi) - F(psi_lambda)) / (psi - psi_lambda).
AuditResult coefficient_audit(const SweepContext& ctx, const std::function<double(double)>& F, Point e, double lambda,
                              double eps_div = 1e-10);

struct SingularQuotientResult {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double min_value = 0.0;
};

/// d1 ((b - psi)^{(k0-1)/k0} - (b - psi_l)^{(k0-1)/k0}) / (psi - psi_l) >= 0 on the cap.
SingularQuotientResult singular_quotient_check(const SweepContext& ctx, Point e, double lambda, int k0, double d1,
                                               double b, double eps_div = 1e-10);

struct HopfReport {
    TangencyKind kind = TangencyKind::Internal;
    bool h_zero = false;
    /// Internal: d h / d nu. Boundary: second derivatives along the test directions.
    std::vector<double> derivatives;
    bool pass = false;
};

/// Internal: h >= 0 on the half ball {(x - x0) . nu > 0}; checks d_nu h > 0.
/// Boundary: h >= 0 on {(x - x0) . e1 > 0, (x - x0) . e2 < 0}; checks
/// d^2 h / d eta^2 > 0 for eta = cos(a) e1 + sin(a) e2, a in (-pi/2, 0).
/// Throws MovingPlaneError when h < -tol in the test region.
HopfReport hopf_sign_check(const ScalarField& h, Point x0, TangencyKind kind, Point nu, Point e2 = {0.0, 0.0},
                           double radius = 0.1, double tol = 1e-10);

}  // namespace sew
