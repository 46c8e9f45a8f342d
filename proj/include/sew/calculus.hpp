/// @file calculus.hpp
/// @brief Perp-gradient, Laplacian and Poisson bracket; grid finite-difference
/// counterparts; steady residual and convergence-order probes.
#pragma once

#include "sew/grid.hpp"
#include "sew/kernels.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sew {

/// A field produced by a differential operator. Jet-backed results are exact
/// (truncation_order() == 0 means "no truncation").
class OperatorField : public ScalarField {
public:
    virtual std::string scheme() const = 0;
    virtual int truncation_order() const = 0;
};

using OperatorPtr = std::shared_ptr<const OperatorField>;

struct VectorPair {
    OperatorPtr x, y;
};

/// (-d2 f, d1 f).
VectorPair perp_gradient(FieldPtr f);
/// d^alpha f as a field.
OperatorPtr partial(FieldPtr f, MultiIndex alpha);
OperatorPtr laplacian(FieldPtr f);
/// grad-perp f . grad g; throws FieldError when the domains differ.
OperatorPtr poisson_bracket(FieldPtr f, FieldPtr g);

// Grid finite differences: 7-point centered stencils (order 6) where the
// stencil is unmasked, one-sided degree-5 stencils (order >= 4) otherwise.
namespace fd {

inline constexpr int kStencilHalfWidth = 3;

/// Nodes whose 2-stencil-width neighbourhood is fully active (non-periodic
/// grid edges count as masked).
std::vector<std::uint8_t> interior_mask(const GridField& g, int width = 2 * kStencilHalfWidth);

std::vector<double> derivative(const GridField& g, MultiIndex alpha, kernels::Exec exec = kernels::Exec::Parallel);
GridPtr laplacian(const GridField& g, kernels::Exec exec = kernels::Exec::Parallel);
GridPtr bracket(const GridField& f, const GridField& g, kernels::Exec exec = kernels::Exec::Parallel);

}  // namespace fd

enum class Norm { Sup, L2 };

struct ResidualOptions {
    int resolution = 256;
    /// Optional restriction of the evaluation region (e.g. |n| <= delta/2).
    std::function<bool(Point)> region;
    kernels::Exec exec = kernels::Exec::Parallel;
};

struct ResidualReport {
    std::string field;
    std::string scheme;
    int resolution = 0;
    double sup = 0.0;
    double l2 = 0.0;
    std::size_t nodes = 0;
};

/// || {psi, Delta psi} || over the report grid. Grid-backed fields use the
/// finite-difference scheme and exclude nodes within two stencil widths of
/// the boundary; other fields use exact jets.
ResidualReport steady_residual(FieldPtr psi, const ResidualOptions& opts = {});
double steady_residual(FieldPtr psi, Norm norm, const ResidualOptions& opts = {});

struct ProbeResult {
    std::string op;
    std::vector<int> resolutions;
    std::vector<double> spacing;
    std::vector<double> errors;
    double slope = 0.0;
    /// Errors at rounding level at every resolution; slope is meaningless.
    bool exact = false;
};

/// Least-squares slope of log(error) against log(h) for the finite
/// difference "laplacian" or "bracket" (the bracket {f, d1 f} of sampled
/// fields) against exact jets.
ProbeResult convergence_probe(const std::string& op, FieldPtr field, const std::vector<int>& resolutions);

}  // namespace sew
