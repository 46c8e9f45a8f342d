/// @file catalog.hpp
/// @brief Closed-form test fields with documented ground truth.
///
/// Entries: sinsin, sin2sin2, bump-of-f, radial-poly, radial-quartic,
/// disk-eigen, shear, two-bump, perturbed, polynomial.
#pragma once

#include "sew/field.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sew {

/// First positive zero of the Bessel function J0.
inline constexpr double kBesselJ0Zero1 = 2.404825557695772768621631879326;

using ParamMap = std::map<std::string, double>;

struct CriticalPointTruth {
    Point point;
    /// Degree of vanishing; 0 encodes "exceeds K".
    int degree = 0;
};

struct CatalogTruth {
    std::vector<CriticalPointTruth> critical_points;
    /// Delta psi = F(psi) when a global relation exists.
    std::function<double(double)> flux;
    std::string flux_formula;
    bool radial = false;
    Point symmetry_center{};
    /// Symmetry axes through symmetry_center, as angles in radians.
    std::vector<double> symmetry_axes;
    /// psi is constant on the physical boundary; value recorded un-normalized.
    std::optional<double> boundary_value;
};

class CatalogField final : public ScalarField {
public:
    CatalogField(std::string name, ParamMap params, Domain domain, ClosedFormField::Expr expr, CatalogTruth truth);

    const Domain& domain() const override { return impl_.domain(); }
    int max_order() const override { return impl_.max_order(); }
    FieldSource source() const override { return FieldSource::Catalog; }
    std::string name() const override { return name_; }
    Jet jet(Point p, int order) const override { return impl_.jet(p, order); }

    const ParamMap& params() const { return params_; }
    const CatalogTruth& truth() const { return truth_; }

private:
    std::string name_;
    ParamMap params_;
    ClosedFormField impl_;
    CatalogTruth truth_;
};

using CatalogPtr = std::shared_ptr<const CatalogField>;

/// Derivative cap for catalog fields.
inline constexpr int kCatalogOrder = 8;

/// Build a catalog entry. An explicit domain overrides the entry's default.
/// Throws std::invalid_argument for unknown names or out-of-range parameters.
CatalogPtr catalog_field(const std::string& name, const ParamMap& params = {},
                         std::optional<Domain> domain = std::nullopt);

std::vector<std::string> catalog_names();

/// Bivariate polynomial sum c_ij x^i y^j; keys "cIJ" with single-digit I, J.
CatalogPtr polynomial_field(const ParamMap& coefficients, Domain domain);

/// J0 evaluated through its power series in q = r^2 (independent of libm Bessel).
double bessel_j0_series(double z, int terms = 40);

}  // namespace sew
