/// @file elliptic.hpp
/// @brief Solutions of Delta psi = F(psi): radial shooting and Newton on a
/// Chebyshev x Fourier disk grid; overdetermined boundary and dist^2 checks.
#pragma once

#include "sew/field.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sew {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SolveMode { RadialShoot, DiskNewton };
std::string to_string(SolveMode m);

struct SemilinearProblem {
    Domain domain = Domain::disk({0.0, 0.0}, 1.0);
    std::function<double(double)> F;
    std::string formula;
    double boundary_value = 0.0;
    SolveMode mode = SolveMode::DiskNewton;
};

/// F(s); when F(s) is not finite and s < 1e-12, F(max(s, 0)).
double evaluate_nonlinearity(const SemilinearProblem& p, double s);

struct RadialOptions {
    /// Local error tolerance per step.
    double tol = 1e-10;
    /// Series start radius relative to R.
    double r_start = 1e-3;
    /// Step cap relative to R (keeps Hermite interpolation accurate).
    double max_step = 5e-4;
    std::size_t max_steps = 1000000;
};

struct RadialProfile {
    std::vector<double> r, psi, dpsi, d2psi;
    double R = 0.0;
    double psi_R = 0.0, dpsi_R = 0.0, d2psi_R = 0.0;
    std::size_t steps = 0, rejected = 0;

    /// Cubic Hermite interpolation; the series start is used below r[0].
    double value(double radius) const;
    double derivative(double radius) const;
    double psi0 = 0.0, F0 = 0.0, F0_prime = 0.0;
};

/// psi'' + psi'/r = F(psi), psi(0) = psi0, psi'(0) = 0, integrated to R by
/// adaptive Dormand-Prince 5(4) from the series psi0 + F r^2/4 + F F' r^4/64.
RadialProfile solve_radial(const SemilinearProblem& problem, double psi0, double R = 1.0,
                           const RadialOptions& opts = {});

/// A radial profile as a field about the domain center.
FieldPtr radial_field(const RadialProfile& profile, const Domain& domain, std::string name = "radial-profile");

struct DiskOptions {
    /// Interior Chebyshev radii (the radial grid has 2 * radii + 1 intervals).
    int radii = 20;
    /// Fourier nodes in theta (even).
    int angles = 40;
    int max_iterations = 30;
    double tol = 1e-9;
    /// Total degree of the exported polynomial field; <= 0 picks 2 * radii - 8.
    int export_degree = 0;
};

struct DiskSolution {
    FieldPtr field;
    /// "newton", "picard" or "inverse-iteration" (homogeneous linear F).
    std::string method;
    int iterations = 0;
    bool converged = false;
    /// sup |Delta_h psi - F(psi)| over collocation nodes.
    double residual = 0.0;
    /// sup over nodes of the exported field minus the nodal values.
    double export_error = 0.0;
    std::vector<double> history;
    /// Collocation nodes and values.
    std::vector<Point> nodes;
    std::vector<double> values;
    std::string note;
};

/// Newton on the collocation system with numerical F' (central difference,
/// step 1e-6 * range); damped Picard when F' is unbounded on the iterate.
DiskSolution solve_disk_newton(const SemilinearProblem& problem, const ScalarField& guess,
                               const DiskOptions& opts = {});
DiskSolution solve_disk_newton(const SemilinearProblem& problem, const std::function<double(Point)>& guess,
                               const DiskOptions& opts = {});

/// Chebyshev-tensor polynomial sum c_ij T_i(xi) T_j(eta) in the scaled
/// coordinates xi = (x - cx) / R, eta = (y - cy) / R.
class ChebyshevDiskField final : public ScalarField {
public:
    ChebyshevDiskField(std::string name, Domain domain, int degree, std::vector<double> coefficients);
    const Domain& domain() const override { return domain_; }
    int max_order() const override { return kMaxJetOrder; }
    FieldSource source() const override { return FieldSource::Series; }
    std::string name() const override { return name_; }
    Jet jet(Point p, int order) const override;
    int degree() const { return degree_; }

private:
    std::string name_;
    Domain domain_;
    int degree_;
    /// Row-major over (i, j) with i + j <= degree.
    std::vector<double> c_;
};

struct BoundarySample {
    double t = 0.0;
    Point point;
    double psi = 0.0, grad = 0.0, dnn = 0.0;
};

struct OverdeterminedReport {
    std::vector<BoundarySample> samples;
    double sup_psi = 0.0, sup_grad = 0.0;
    /// sup |d_nn psi - F(0)| when F(0) was given.
    std::optional<double> sup_dnn;
    double mean_dnn = 0.0;
    bool pass = false;
};

/// psi, |grad psi| and d_nn psi along a parametric curve; pass when the
/// first two are below tol (and d_nn matches F(0) to dnn_tol when given).
OverdeterminedReport overdetermined_check(const ScalarField& psi, const BoundaryCurve& boundary,
                                          std::optional<double> F0 = std::nullopt, std::size_t samples = 256,
                                          double tol = 1e-10, double dnn_tol = 1e-8);

struct DistanceBoundOptions {
    int resolution = 128;
    /// Only samples with dist below this count (<= 0: all).
    double max_distance = 0.0;
    std::function<bool(Point)> region;
    double C_max = 1e6;
    /// Dyadic normal rays from every boundary sample down to min_distance.
    std::size_t ray_bases = 64;
    double min_distance = 1e-7;
};

struct DistanceBoundReport {
    double C = 1.0;
    double min_ratio = 0.0, max_ratio = 0.0;
    std::size_t samples = 0;
    bool pass = false;
    /// Sample with the extreme ratio.
    Point worst;
};

/// Smallest C >= 1 with dist^2 / C <= psi <= C dist^2 over interior samples,
/// dist measured to the given curves. Throws SolverError if psi < 0.
DistanceBoundReport distance_bound_check(const ScalarField& psi, const std::vector<BoundaryCurve>& boundary,
                                         const DistanceBoundOptions& opts = {});

}  // namespace sew
