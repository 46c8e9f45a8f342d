#include "sew/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sew {

namespace {

class JetOperator final : public OperatorField {
public:
    using Rule = std::function<Jet(Point, int)>;

    JetOperator(std::string name, const Domain& domain, int max_order, Rule rule)
        : name_(std::move(name)), domain_(domain), max_order_(max_order), rule_(std::move(rule)) {}

    const Domain& domain() const override { return domain_; }
    int max_order() const override { return max_order_; }
    FieldSource source() const override { return FieldSource::Derived; }
    std::string name() const override { return name_; }
    Jet jet(Point p, int order) const override { return rule_(p, order); }
    std::string scheme() const override { return "taylor-jet-exact"; }
    int truncation_order() const override { return 0; }

private:
    std::string name_;
    Domain domain_;
    int max_order_;
    Rule rule_;
};

/// Grid result of a finite-difference operator, exposed as an operator field.
class GridOperator final : public OperatorField {
public:
    GridOperator(GridPtr grid, std::string scheme) : grid_(std::move(grid)), scheme_(std::move(scheme)) {}
    const Domain& domain() const override { return grid_->domain(); }
    int max_order() const override { return grid_->max_order(); }
    FieldSource source() const override { return FieldSource::Grid; }
    std::string name() const override { return grid_->name(); }
    Jet jet(Point p, int order) const override { return grid_->jet(p, order); }
    std::string scheme() const override { return scheme_; }
    int truncation_order() const override { return 6; }
    const GridPtr& grid() const { return grid_; }

private:
    GridPtr grid_;
    std::string scheme_;
};

void require_order(const ScalarField& f, int needed, const char* op) {
    if (f.max_order() < needed)
        throw FieldError(std::string(op) + " needs derivatives of order " + std::to_string(needed));
}

const GridField* as_grid(const ScalarField& f) { return dynamic_cast<const GridField*>(&f); }

Jet laplacian_jet(const Jet& f, int order) {
    Jet r(order, 0.0);
    for (int k = 0; k <= order; ++k)
        for (int j = 0; j <= k; ++j) {
            const int i = k - j;
            r.coef(i, j) = (i + 2) * (i + 1) * f(i + 2, j) + (j + 2) * (j + 1) * f(i, j + 2);
        }
    return r;
}

}  // namespace

VectorPair perp_gradient(FieldPtr f) { return {partial(affine(f, -1.0, 0.0), {0, 1}), partial(f, {1, 0})}; }

OperatorPtr partial(FieldPtr f, MultiIndex alpha) {
    require_order(*f, alpha.order(), "partial");
    const int cap = f->max_order() - alpha.order();
    return std::make_shared<JetOperator>(
        "d" + std::to_string(alpha.dx) + std::to_string(alpha.dy) + "(" + f->name() + ")", f->domain(), cap,
        [f, alpha](Point p, int order) {
            Jet j = f->jet(p, order + alpha.order());
            for (int a = 0; a < alpha.dx; ++a) j = j.d_dx();
            for (int b = 0; b < alpha.dy; ++b) j = j.d_dy();
            return j;
        });
}

OperatorPtr laplacian(FieldPtr f) {
    require_order(*f, 2, "laplacian");
    if (const GridField* g = as_grid(*f)) return std::make_shared<GridOperator>(fd::laplacian(*g), "fd6-centered");
    return std::make_shared<JetOperator>("lap(" + f->name() + ")", f->domain(), f->max_order() - 2,
                                         [f](Point p, int order) { return laplacian_jet(f->jet(p, order + 2), order); });
}

OperatorPtr poisson_bracket(FieldPtr f, FieldPtr g) {
    if (!f->domain().same_as(g->domain())) throw FieldError("poisson_bracket: fields live on different domains");
    require_order(*f, 1, "poisson_bracket");
    require_order(*g, 1, "poisson_bracket");
    const GridField* gf = as_grid(*f);
    const GridField* gg = as_grid(*g);
    if (gf && gg) return std::make_shared<GridOperator>(fd::bracket(*gf, *gg), "fd6-centered");
    const int cap = std::min(f->max_order(), g->max_order()) - 1;
    return std::make_shared<JetOperator>("{" + f->name() + "," + g->name() + "}", f->domain(), cap,
                                         [f, g](Point p, int order) {
                                             const Jet a = f->jet(p, order + 1), b = g->jet(p, order + 1);
                                             return a.d_dx() * b.d_dy() - a.d_dy() * b.d_dx();
                                         });
}

namespace fd {

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

/// Derivative of order m (1 or 2) along one axis at node index c, using the
/// 1D active-node predicate. Returns NaN if no stencil fits.
template <class Active, class Value>
double axis_derivative(int c, int n, bool periodic, int m, double h, Active&& active, Value&& value) {
    static const double d1[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
    static const double d2[7] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
    auto idx = [&](int i) { return periodic ? wrap(i, n) : i; };
    auto ok = [&](int i) { return (periodic || (i >= 0 && i < n)) && active(idx(i)); };
    bool centered = true;
    for (int k = -3; k <= 3 && centered; ++k) centered = ok(c + k);
    if (centered) {
        const double* w = m == 1 ? d1 : d2;
        double s = 0.0;
        for (int k = -3; k <= 3; ++k) s += w[k + 3] * value(idx(c + k));
        return s / std::pow(h, m);
    }
    // One-sided: 6 consecutive active nodes containing c, closest to centered.
    constexpr int width = 6;
    for (int shift = 0; shift < width; ++shift) {
        for (int sgn : {-1, 1}) {
            const int start = c - (width / 2) + sgn * shift;
            if (start > c || start + width - 1 < c) continue;
            bool good = true;
            for (int k = 0; k < width && good; ++k) good = ok(start + k);
            if (!good) continue;
            std::vector<std::array<double, kGridOrder + 1>> t;
            lagrange_taylor(width, static_cast<double>(c - start), m, t);
            double s = 0.0;
            for (int k = 0; k < width; ++k) s += t[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] * value(idx(start + k));
            return s * (m == 2 ? 2.0 : 1.0) / std::pow(h, m);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

GridPtr make_like(const GridField& g, std::string name, std::vector<double> values) {
    std::vector<std::uint8_t> mask = g.mask();
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!std::isfinite(values[k])) mask[k] = 0;
    return std::make_shared<GridField>(std::move(name), g.domain(), g.spec(), std::move(values), std::move(mask));
}

}  // namespace

std::vector<std::uint8_t> interior_mask(const GridField& g, int width) {
    const GridSpec& s = g.spec();
    std::vector<std::uint8_t> out(s.size(), 0);
    kernels::for_each_node(s, [&](int i, int j) {
        if (!g.active(i, j)) return;
        for (int b = -width; b <= width; ++b)
            for (int a = -width; a <= width; ++a) {
                int ii = i + a, jj = j + b;
                if (s.periodic) {
                    ii = wrap(ii, s.nx);
                    jj = wrap(jj, s.ny);
                } else if (ii < 0 || jj < 0 || ii >= s.nx || jj >= s.ny) {
                    return;
                }
                if (!g.active(ii, jj)) return;
            }
        out[s.index(i, j)] = 1;
    });
    return out;
}

std::vector<double> derivative(const GridField& g, MultiIndex alpha, kernels::Exec exec) {
    const GridSpec& s = g.spec();
    if (alpha.order() < 1 || alpha.order() > 2 || (alpha.dx > 0 && alpha.dy > 0 && alpha.order() > 2))
        throw FieldError("fd::derivative supports first and second derivatives");
    std::vector<double> out(s.size(), std::numeric_limits<double>::quiet_NaN());
    kernels::for_each_node(
        s,
        [&](int i, int j) {
            if (!g.active(i, j)) return;
            double v;
            if (alpha.dx > 0 && alpha.dy > 0) {
                // d/dy of d/dx along the column.
                v = axis_derivative(
                    j, s.ny, s.periodic, 1, s.dy, [&](int jj) { return g.active(i, jj); },
                    [&](int jj) {
                        return axis_derivative(
                            i, s.nx, s.periodic, 1, s.dx, [&](int ii) { return g.active(ii, jj); },
                            [&](int ii) { return g.at(ii, jj); });
                    });
            } else if (alpha.dx > 0) {
                v = axis_derivative(
                    i, s.nx, s.periodic, alpha.dx, s.dx, [&](int ii) { return g.active(ii, j); },
                    [&](int ii) { return g.at(ii, j); });
            } else {
                v = axis_derivative(
                    j, s.ny, s.periodic, alpha.dy, s.dy, [&](int jj) { return g.active(i, jj); },
                    [&](int jj) { return g.at(i, jj); });
            }
            out[s.index(i, j)] = v;
        },
        exec);
    return out;
}

GridPtr laplacian(const GridField& g, kernels::Exec exec) {
    auto xx = derivative(g, {2, 0}, exec);
    const auto yy = derivative(g, {0, 2}, exec);
    for (std::size_t k = 0; k < xx.size(); ++k) xx[k] += yy[k];
    return make_like(g, "lap(" + g.name() + ")", std::move(xx));
}

GridPtr bracket(const GridField& f, const GridField& g, kernels::Exec exec) {
    const GridSpec& a = f.spec();
    const GridSpec& b = g.spec();
    if (a.nx != b.nx || a.ny != b.ny || a.x0 != b.x0 || a.y0 != b.y0 || a.dx != b.dx || a.dy != b.dy)
        throw FieldError("fd::bracket: grids differ");
    const auto fx = derivative(f, {1, 0}, exec), fy = derivative(f, {0, 1}, exec);
    const auto gx = derivative(g, {1, 0}, exec), gy = derivative(g, {0, 1}, exec);
    std::vector<double> out(fx.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fx[k] * gy[k] - fy[k] * gx[k];
    return make_like(f, "{" + f.name() + "," + g.name() + "}", std::move(out));
}

}  // namespace fd

ResidualReport steady_residual(FieldPtr psi, const ResidualOptions& opts) {
    ResidualReport rep;
    rep.field = psi->name();
    rep.resolution = opts.resolution;
    GridSpec spec;
    std::vector<double> res;
    std::vector<std::uint8_t> include;
    if (const GridField* g = as_grid(*psi)) {
        spec = g->spec();
        const GridPtr lap = fd::laplacian(*g, opts.exec);
        const GridPtr br = fd::bracket(*g, *lap, opts.exec);
        res = br->values();
        include = fd::interior_mask(*g, 2 * fd::kStencilHalfWidth);
        rep.scheme = "fd6-centered";
        rep.resolution = spec.nx;
    } else {
        require_order(*psi, 3, "steady_residual");
        spec = grid_for(psi->domain(), opts.resolution, opts.resolution);
        include.assign(spec.size(), 0);
        res.assign(spec.size(), 0.0);
        kernels::for_each_node(
            spec,
            [&](int i, int j) {
                const Point p = spec.node(i, j);
                if (!psi->domain().contains(p)) return;
                if (opts.region && !opts.region(p)) return;
                const Jet f = psi->jet(p, 3);
                const Jet w = laplacian_jet(f, 1);
                const Jet fx = f.d_dx(), fy = f.d_dy();
                res[spec.index(i, j)] = fx.value() * w(0, 1) - fy.value() * w(1, 0);
                include[spec.index(i, j)] = 1;
            },
            opts.exec);
        rep.scheme = "taylor-jet-exact";
    }
    if (opts.region && as_grid(*psi)) {
        for (int j = 0; j < spec.ny; ++j)
            for (int i = 0; i < spec.nx; ++i)
                if (!opts.region(spec.node(i, j))) include[spec.index(i, j)] = 0;
    }
    for (std::size_t k = 0; k < res.size(); ++k)
        if (include[k] && !std::isfinite(res[k])) include[k] = 0;
    const auto n = kernels::norms(spec, res, include, opts.exec);
    rep.sup = n.sup;
    rep.l2 = n.l2;
    rep.nodes = n.count;
    return rep;
}

double steady_residual(FieldPtr psi, Norm norm, const ResidualOptions& opts) {
    const auto r = steady_residual(std::move(psi), opts);
    return norm == Norm::Sup ? r.sup : r.l2;
}

ProbeResult convergence_probe(const std::string& op, FieldPtr field, const std::vector<int>& resolutions) {
    if (resolutions.size() < 3) throw std::invalid_argument("convergence_probe needs at least 3 resolutions");
    if (op != "laplacian" && op != "bracket") throw std::invalid_argument("unknown probe operator '" + op + "'");
    if (as_grid(*field)) throw std::invalid_argument("convergence_probe needs a closed-form reference field");
    ProbeResult pr;
    pr.op = op;
    double scale = 0.0;
    for (int n : resolutions) {
        const GridPtr g = sample_grid(*field, n, n);
        std::vector<double> approx;
        std::function<double(Point)> exact;
        if (op == "laplacian") {
            approx = fd::laplacian(*g)->values();
            const auto lap = laplacian(field);
            exact = [lap](Point p) { return lap->value(p); };
        } else {
            // {f, Delta f} vanishes identically on every steady catalog field and
            // the discrete operators preserve that, so the companion is d1 f.
            const auto companion = partial(field, {1, 0});
            approx = fd::bracket(*g, *sample_grid(*companion, n, n))->values();
            const auto br = poisson_bracket(field, companion);
            exact = [br](Point p) { return br->value(p); };
        }
        const auto include = fd::interior_mask(*g);
        const GridSpec& s = g->spec();
        std::vector<double> err(s.size(), 0.0);
        kernels::for_each_node(s, [&](int i, int j) {
            const std::size_t k = s.index(i, j);
            if (include[k]) err[k] = approx[k] - exact(s.node(i, j));
        });
        double vmax = 0.0;
        for (std::size_t k = 0; k < err.size(); ++k)
            if (include[k]) vmax = std::max(vmax, std::abs(g->values()[k]));
        scale = std::max(scale, vmax);
        const auto nn = kernels::norms(s, err, include);
        pr.resolutions.push_back(n);
        pr.spacing.push_back(std::max(s.dx, s.dy));
        pr.errors.push_back(nn.sup);
    }
    pr.exact = std::all_of(pr.errors.begin(), pr.errors.end(), [&](double e) { return e <= 1e-9 * std::max(scale, 1.0); });
    const std::size_t m = pr.errors.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double x = std::log(pr.spacing[k]);
        const double y = std::log(std::max(pr.errors[k], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    pr.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return pr;
}

}  // namespace sew
