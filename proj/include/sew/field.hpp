/// @file field.hpp
/// @brief Scalar fields on 2D domains with Taylor-jet derivative access.
#pragma once

#include "sew/geometry.hpp"
#include "sew/jet.hpp"

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace sew {

enum class FieldSource { Catalog, Grid, Series, Derived };

std::string to_string(FieldSource s);

struct MultiIndex {
    int dx = 0;
    int dy = 0;
    int order() const { return dx + dy; }
};

class FieldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable scalar field. jet() returns Taylor coefficients about p up to
/// the requested order; implementations must be safe for concurrent calls.
class ScalarField {
public:
    virtual ~ScalarField() = default;

    virtual const Domain& domain() const = 0;
    /// Highest derivative order available (K).
    virtual int max_order() const = 0;
    virtual FieldSource source() const = 0;
    virtual std::string name() const = 0;

    virtual Jet jet(Point p, int order) const = 0;
    virtual double value(Point p) const { return jet(p, 0).value(); }
};

using FieldPtr = std::shared_ptr<const ScalarField>;

/// d^alpha f at p; checks the order cap and domain membership.
double derivative(const ScalarField& f, MultiIndex alpha, Point p);

/// Field given by a closed-form expression evaluated on jets.
class ClosedFormField : public ScalarField {
public:
    using Expr = std::function<Jet(const Jet& x, const Jet& y)>;

    ClosedFormField(std::string name, Domain domain, Expr expr, int max_order = 8,
                    FieldSource source = FieldSource::Catalog);

    const Domain& domain() const override { return domain_; }
    int max_order() const override { return max_order_; }
    FieldSource source() const override { return source_; }
    std::string name() const override { return name_; }
    Jet jet(Point p, int order) const override;

private:
    std::string name_;
    Domain domain_;
    Expr expr_;
    int max_order_;
    FieldSource source_;
};

/// alpha * base + beta.
FieldPtr affine(FieldPtr base, double alpha, double beta);
/// base composed with a rotation by angle about the origin: (f o R)(x) = f(R x).
FieldPtr rotated(FieldPtr base, double angle);
/// Pointwise phi(base) for a smooth univariate phi given by a jet map.
FieldPtr mapped(FieldPtr base, std::function<Jet(const Jet&)> phi, std::string label);

}  // namespace sew
