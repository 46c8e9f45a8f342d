#include "sew/field.hpp"

#include <cmath>

namespace sew {

std::string to_string(FieldSource s) {
    switch (s) {
        case FieldSource::Catalog: return "catalog";
        case FieldSource::Grid: return "grid";
        case FieldSource::Series: return "series";
        case FieldSource::Derived: return "derived";
    }
    return "unknown";
}

double derivative(const ScalarField& f, MultiIndex alpha, Point p) {
    if (alpha.dx < 0 || alpha.dy < 0) throw FieldError("negative multi-index");
    if (alpha.order() > f.max_order())
        throw FieldError("derivative order " + std::to_string(alpha.order()) + " exceeds field cap " +
                         std::to_string(f.max_order()));
    if (!f.domain().contains(f.domain().wrap(p))) throw FieldError("point outside domain");
    return f.jet(p, alpha.order()).derivative(alpha.dx, alpha.dy);
}

ClosedFormField::ClosedFormField(std::string name, Domain domain, Expr expr, int max_order, FieldSource source)
    : name_(std::move(name)), domain_(std::move(domain)), expr_(std::move(expr)), max_order_(max_order),
      source_(source) {}

Jet ClosedFormField::jet(Point p, int order) const {
    return expr_(Jet::variable_x(order, p.x), Jet::variable_y(order, p.y));
}

namespace {

class AffineField final : public ScalarField {
public:
    AffineField(FieldPtr base, double a, double b) : base_(std::move(base)), a_(a), b_(b) {}
    const Domain& domain() const override { return base_->domain(); }
    int max_order() const override { return base_->max_order(); }
    FieldSource source() const override { return base_->source(); }
    std::string name() const override { return base_->name() + "-affine"; }
    Jet jet(Point p, int order) const override { return base_->jet(p, order) * a_ + b_; }
    double value(Point p) const override { return a_ * base_->value(p) + b_; }

private:
    FieldPtr base_;
    double a_, b_;
};

class RotatedField final : public ScalarField {
public:
    RotatedField(FieldPtr base, double angle) : base_(std::move(base)), c_(std::cos(angle)), s_(std::sin(angle)) {}
    const Domain& domain() const override { return base_->domain(); }
    int max_order() const override { return base_->max_order(); }
    FieldSource source() const override { return FieldSource::Derived; }
    std::string name() const override { return base_->name() + "-rotated"; }
    Jet jet(Point p, int order) const override {
        const Point q{c_ * p.x - s_ * p.y, s_ * p.x + c_ * p.y};
        const Jet x = Jet::variable_x(order, p.x), y = Jet::variable_y(order, p.y);
        const Jet u = x * c_ - y * s_;
        const Jet v = x * s_ + y * c_;
        return compose(base_->jet(q, order), u, v);
    }

private:
    FieldPtr base_;
    double c_, s_;
};

class MappedField final : public ScalarField {
public:
    MappedField(FieldPtr base, std::function<Jet(const Jet&)> phi, std::string label)
        : base_(std::move(base)), phi_(std::move(phi)), label_(std::move(label)) {}
    const Domain& domain() const override { return base_->domain(); }
    int max_order() const override { return base_->max_order(); }
    FieldSource source() const override { return FieldSource::Derived; }
    std::string name() const override { return label_ + "(" + base_->name() + ")"; }
    Jet jet(Point p, int order) const override { return phi_(base_->jet(p, order)); }

private:
    FieldPtr base_;
    std::function<Jet(const Jet&)> phi_;
    std::string label_;
};

}  // namespace

FieldPtr affine(FieldPtr base, double alpha, double beta) {
    return std::make_shared<AffineField>(std::move(base), alpha, beta);
}

FieldPtr rotated(FieldPtr base, double angle) { return std::make_shared<RotatedField>(std::move(base), angle); }

FieldPtr mapped(FieldPtr base, std::function<Jet(const Jet&)> phi, std::string label) {
    return std::make_shared<MappedField>(std::move(base), std::move(phi), std::move(label));
}

}  // namespace sew
