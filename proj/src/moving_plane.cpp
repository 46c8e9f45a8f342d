#include "sew/moving_plane.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sew {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTolAng = 1e-3;

Box union_box(const std::vector<BoundaryCurve>& curves) {
    Box b{kInf, kInf, -kInf, -kInf};
    for (const auto& c : curves)
        for (Point p : c.polyline()) {
            b.x0 = std::min(b.x0, p.x);
            b.y0 = std::min(b.y0, p.y);
            b.x1 = std::max(b.x1, p.x);
            b.y1 = std::max(b.y1, p.y);
        }
    return b;
}

}  // namespace

Region::Region(std::vector<BoundaryCurve> boundary, int raster) : boundary_(std::move(boundary)), n_(raster) {
    if (boundary_.empty()) throw MovingPlaneError("region needs at least one boundary curve");
    box_ = union_box(boundary_);
    if (!(box_.width() > 0.0) || !(box_.height() > 0.0)) throw MovingPlaneError("degenerate region");
    const double hx = box_.width() / n_, hy = box_.height() / n_;
    cells_.assign(static_cast<std::size_t>(n_) * n_, 0);
    // Cells near a segment need the exact test.
    for (const auto& c : boundary_) {
        const auto& poly = c.polyline();
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Point a = poly[i], b = poly[(i + 1) % poly.size()];
            const int steps = 1 + static_cast<int>(4.0 * std::max(std::abs(b.x - a.x) / hx, std::abs(b.y - a.y) / hy));
            for (int s = 0; s <= steps; ++s) {
                const Point p = a + (static_cast<double>(s) / steps) * (b - a);
                const int ci = static_cast<int>((p.x - box_.x0) / hx), cj = static_cast<int>((p.y - box_.y0) / hy);
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        const int ii = ci + di, jj = cj + dj;
                        if (ii >= 0 && jj >= 0 && ii < n_ && jj < n_) cells_[static_cast<std::size_t>(jj) * n_ + ii] = 2;
                    }
            }
        }
    }
    // Remaining cells by scanline parity at cell centers.
    std::vector<double> xs;
    for (int j = 0; j < n_; ++j) {
        const double y = box_.y0 + (j + 0.5) * hy;
        xs.clear();
        for (const auto& c : boundary_) {
            const auto& poly = c.polyline();
            for (std::size_t i = 0, k = poly.size() - 1; i < poly.size(); k = i++) {
                const Point a = poly[i], b = poly[k];
                if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        std::sort(xs.begin(), xs.end());
        std::size_t crossed = 0;
        for (int i = 0; i < n_; ++i) {
            const double x = box_.x0 + (i + 0.5) * hx;
            while (crossed < xs.size() && xs[crossed] <= x) ++crossed;
            auto& cell = cells_[static_cast<std::size_t>(j) * n_ + i];
            if (cell != 2) cell = (crossed % 2 == 1) ? 1 : 0;
        }
    }
}

Region Region::from_domain(const Domain& d) {
    if (d.periodic()) throw MovingPlaneError("periodic domains have no moving-plane region");
    return Region(d.boundary());
}

Region Region::interior_of(const BoundaryCurve& c) { return Region({c}); }

bool Region::exact_contains(Point p) const {
    bool inside = false;
    for (const auto& c : boundary_)
        if (c.encloses(p)) inside = !inside;
    return inside;
}

bool Region::contains(Point p) const {
    if (p.x < box_.x0 || p.x > box_.x1 || p.y < box_.y0 || p.y > box_.y1) return false;
    const int i = std::min(n_ - 1, static_cast<int>((p.x - box_.x0) / box_.width() * n_));
    const int j = std::min(n_ - 1, static_cast<int>((p.y - box_.y0) / box_.height() * n_));
    const auto cell = cells_[static_cast<std::size_t>(j) * n_ + i];
    if (cell == 2) return exact_contains(p);
    return cell == 1;
}

double Region::boundary_distance(Point p) const {
    double d = kInf;
    for (const auto& c : boundary_) d = std::min(d, c.distance(p));
    return d;
}

Point reflect(Point x, Point e, double lambda) { return x - (2.0 * (dot(x, e) - lambda)) * e; }

namespace {

class ReflectionDifference final : public ScalarField {
public:
    ReflectionDifference(FieldPtr psi, Point e, double lambda) : psi_(std::move(psi)), e_(e), lambda_(lambda) {}
    const Domain& domain() const override { return psi_->domain(); }
    int max_order() const override { return psi_->max_order(); }
    FieldSource source() const override { return FieldSource::Derived; }
    std::string name() const override { return "reflection-difference(" + psi_->name() + ")"; }
    Jet jet(Point p, int order) const override {
        const Point q = reflect(p, e_, lambda_);
        const Jet X = Jet::variable_x(order, p.x) - p.x, Y = Jet::variable_y(order, p.y) - p.y;
        // Jacobian of the reflection: I - 2 e e^T.
        const Jet U = (1.0 - 2.0 * e_.x * e_.x) * X + (-2.0 * e_.x * e_.y) * Y + q.x;
        const Jet V = (-2.0 * e_.x * e_.y) * X + (1.0 - 2.0 * e_.y * e_.y) * Y + q.y;
        return psi_->jet(p, order) - compose(psi_->jet(q, order), U, V);
    }

private:
    FieldPtr psi_;
    Point e_;
    double lambda_;
};

std::pair<double, double> extent(const Region& r, Point e) {
    double lo = kInf, hi = -kInf;
    for (const auto& c : r.boundary())
        for (Point p : c.polyline()) {
            lo = std::min(lo, dot(p, e));
            hi = std::max(hi, dot(p, e));
        }
    return {lo, hi};
}

Point unit(Point e) {
    const double n = norm(e);
    if (!(n > 0.0)) throw MovingPlaneError("direction must be nonzero");
    return (1.0 / n) * e;
}

// Both x and its reflection can be evaluated.
bool evaluable(const SweepContext& ctx, Point q) {
    return ctx.region->contains(q) && ctx.psi->domain().contains(q);
}

}  // namespace

FieldPtr reflection_difference(FieldPtr psi, Point e, double lambda) {
    return std::make_shared<ReflectionDifference>(std::move(psi), unit(e), lambda);
}

SweepContext make_context(FieldPtr psi, const Region& region, const SweepOptions& opts) {
    if (opts.resolution < 8 || opts.lambdas < 4) throw MovingPlaneError("sweep resolution too small");
    SweepContext ctx;
    ctx.psi = psi;
    ctx.region = &region;
    ctx.opts = opts;
    const Box b = region.bounding_box();
    const int n = opts.resolution;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Point p{b.x0 + (i + 0.5) * b.width() / n, b.y0 + (j + 0.5) * b.height() / n};
            if (!evaluable(ctx, p)) continue;
            ctx.points.push_back(p);
        }
    if (ctx.points.empty()) throw MovingPlaneError("field is not evaluable on the region");
    ctx.values.resize(ctx.points.size());
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < ctx.points.size(); ++k) ctx.values[k] = psi->value(ctx.points[k]);
    for (double v : ctx.values) ctx.psi_sup = std::max(ctx.psi_sup, std::abs(v));
    for (const auto& c : region.boundary()) {
        const auto& poly = c.polyline();
        const std::size_t stride = std::max<std::size_t>(1, poly.size() / static_cast<std::size_t>(opts.boundary_samples));
        for (std::size_t i = 0; i < poly.size(); i += stride) ctx.boundary_points.push_back(poly[i]);
    }
    return ctx;
}

ReflectionState reflection_state(const SweepContext& ctx, Point e, double lambda) {
    ReflectionState s;
    s.e = e;
    s.lambda = lambda;
    s.min_h = kInf;
    s.overshoot = -kInf;
    const double clip = ctx.opts.clip_tol * ctx.region->diameter();
    // Reflected boundary of the cap must stay in the closure.
    for (Point y : ctx.boundary_points) {
        if (dot(y, e) >= lambda) continue;
        const Point z = reflect(y, e, lambda);
        // Inside points only matter through the sign.
        const double d = ctx.region->contains(z) ? -clip : ctx.region->boundary_distance(z);
        if (d > s.overshoot) {
            s.overshoot = d;
            s.overshoot_point = z;
        }
    }
    if (s.overshoot > clip) s.admissible = false;
    for (std::size_t k = 0; k < ctx.points.size(); ++k) {
        const Point x = ctx.points[k];
        if (dot(x, e) <= lambda) {
            // Interior cap points reflect into the region too.
            if (s.admissible) {
                const Point z = reflect(x, e, lambda);
                if (!ctx.region->contains(z) && ctx.region->boundary_distance(z) > clip) s.admissible = false;
            }
            continue;
        }
        const Point q = reflect(x, e, lambda);
        if (!evaluable(ctx, q)) continue;
        const double h = ctx.values[k] - ctx.psi->value(q);
        ++s.samples;
        if (h < s.min_h) {
            s.min_h = h;
            s.argmin = x;
        }
        s.sup_h = std::max(s.sup_h, std::abs(h));
    }
    if (s.samples == 0) s.min_h = 0.0;
    return s;
}

std::vector<ReflectionState> reflect_sweep(const SweepContext& ctx, Point e) {
    e = unit(e);
    const auto [lo, hi] = extent(*ctx.region, e);
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw MovingPlaneError("region unbounded in the sweep direction");
    std::vector<ReflectionState> out;
    const int L = ctx.opts.lambdas;
    for (int k = 0; k < L; ++k) {
        const double lambda = lo + (hi - lo) * (k + 1.0) / (L + 1.0);
        out.push_back(reflection_state(ctx, e, lambda));
        if (!out.back().admissible) break;
    }
    return out;
}

std::string to_string(TangencyKind k) { return k == TangencyKind::Internal ? "internal" : "boundary"; }

namespace {

bool good(const SweepContext& ctx, const ReflectionState& s) {
    return s.admissible && s.min_h >= -ctx.opts.tol_mp * ctx.psi_sup;
}

double tol_sym(const SweepContext& ctx) { return 1e-6 * std::max(ctx.psi_sup, 1e-300); }

TangencyEvent classify(const SweepContext& ctx, const ReflectionState& at, const ReflectionState& past) {
    TangencyEvent ev;
    ev.lambda0 = at.lambda;
    ev.h_zero = at.samples > 0 && at.sup_h <= tol_sym(ctx);
    const Point e = at.e;
    ev.cause = past.admissible ? "monotonicity" : "inadmissible";
    ev.contact = past.admissible ? past.argmin : past.overshoot_point;
    const double tol_H = 1e-3 * ctx.region->diameter();
    if (std::abs(dot(ev.contact, e) - at.lambda) <= tol_H) {
        // On the hyperplane: boundary tangency iff the normal there is orthogonal to e.
        double best = kInf;
        Point normal;
        for (const auto& c : ctx.region->boundary()) {
            const auto nr = c.nearest(ev.contact);
            if (nr.distance < best) {
                best = nr.distance;
                normal = c.outward_normal(nr.t);
            }
        }
        if (best <= tol_H && std::abs(dot(normal, e)) <= std::sin(kTolAng)) ev.kind = TangencyKind::Boundary;
    }
    return ev;
}

}  // namespace

Lambda0Result find_lambda0(const SweepContext& ctx, const std::vector<ReflectionState>& states, double tol_lambda) {
    if (states.empty()) throw MovingPlaneError("no admissible states");
    if (!states.front().admissible) throw MovingPlaneError("no admissible states");
    if (!good(ctx, states.front()))
        throw MovingPlaneError("reflection monotonicity fails at the smallest lambda");
    std::size_t k = 0;
    while (k + 1 < states.size() && good(ctx, states[k + 1])) ++k;
    Lambda0Result r;
    if (k + 1 == states.size()) {
        // Never failed on the grid.
        r.lambda0 = states[k].lambda;
        r.state = states[k];
        r.event = classify(ctx, states[k], states[k]);
        r.event.cause = "end-of-sweep";
        return r;
    }
    ReflectionState lo = states[k], hi = states[k + 1];
    const Point e = lo.e;
    while (hi.lambda - lo.lambda > tol_lambda) {
        const auto mid = reflection_state(ctx, e, 0.5 * (lo.lambda + hi.lambda));
        (good(ctx, mid) ? lo : hi) = mid;
        ++r.bisections;
    }
    r.lambda0 = lo.lambda;
    r.state = lo;
    r.event = classify(ctx, lo, hi);
    return r;
}

DirectionReport sweep_direction(const SweepContext& ctx, Point e) {
    DirectionReport d;
    d.e = unit(e);
    d.angle = std::atan2(d.e.y, d.e.x);
    const auto states = reflect_sweep(ctx, d.e);
    for (const auto& s : states) d.profile.emplace_back(s.lambda, s.min_h);
    try {
        const auto r = find_lambda0(ctx, states);
        d.lambda0 = r.lambda0;
        d.event = r.event;
        d.sup_h = r.state.sup_h;
        d.symmetric = r.event.h_zero;
    } catch (const MovingPlaneError& err) {
        d.note = err.what();
        d.lambda0 = states.empty() ? 0.0 : states.front().lambda;
        d.event.lambda0 = d.lambda0;
        d.symmetric = false;
    }
    return d;
}

std::string to_string(GlobalVerdict v) {
    switch (v) {
        case GlobalVerdict::Radial: return "radial";
        case GlobalVerdict::AxisSymmetric: return "axis-symmetric";
        case GlobalVerdict::Asymmetric: return "asymmetric";
    }
    return "?";
}

SymmetryVerdict symmetry_verdict(const std::vector<DirectionReport>& reports, double diameter, double tol_center) {
    SymmetryVerdict v;
    std::vector<const DirectionReport*> sym;
    for (const auto& r : reports)
        if (r.symmetric) sym.push_back(&r);
    for (const auto* r : sym) {
        double a = r->angle + 0.5 * std::numbers::pi;
        a = std::fmod(a, std::numbers::pi);
        if (a < 0.0) a += std::numbers::pi;
        v.axes.push_back(a);
    }
    if (sym.empty()) return v;
    v.verdict = GlobalVerdict::AxisSymmetric;
    if (sym.size() >= 2) {
        Eigen::MatrixXd A(sym.size(), 2);
        Eigen::VectorXd b(sym.size());
        for (std::size_t i = 0; i < sym.size(); ++i) {
            A(i, 0) = sym[i]->e.x;
            A(i, 1) = sym[i]->e.y;
            b(i) = sym[i]->lambda0;
        }
        const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
        v.center = {c(0), c(1)};
        for (std::size_t i = 0; i < sym.size(); ++i)
            v.center_residual = std::max(v.center_residual, std::abs(dot(v.center, sym[i]->e) - sym[i]->lambda0));
    }
    if (sym.size() == reports.size() && sym.size() >= 8 && v.center_residual <= tol_center * diameter)
        v.verdict = GlobalVerdict::Radial;
    return v;
}

AuditResult coefficient_audit(const SweepContext& ctx, const std::function<double(double)>& F, Point e, double lambda,
                              double eps_div) {
    if (!F) throw MovingPlaneError("coefficient audit needs a single-valued flux");
    e = unit(e);
    AuditResult out;
    std::vector<Point> arc;
    for (Point y : ctx.boundary_points)
        if (dot(y, e) < lambda) arc.push_back(y);
    for (std::size_t k = 0; k < ctx.points.size(); ++k) {
        const Point x = ctx.points[k];
        if (dot(x, e) <= lambda) continue;
        const Point q = reflect(x, e, lambda);
        if (!evaluable(ctx, q)) continue;
        const double s = ctx.values[k], sl = ctx.psi->value(q);
        double c;
        if (std::abs(s - sl) > eps_div) {
            c = (F(s) - F(sl)) / (s - sl);
        } else {
            const double h = 1e-6 * std::max(1.0, std::abs(s));
            c = (F(s + h) - F(s - h)) / (2.0 * h);
            ++out.derivative_samples;
        }
        if (!std::isfinite(c)) {
            ++out.skipped;
            continue;
        }
        ++out.samples;
        // Distance to the hyperplane part and to the reflected arc.
        double dist = dot(x, e) - lambda;
        for (Point y : arc) dist = std::min(dist, norm(q - y));
        out.max_negative_c = std::max(out.max_negative_c, -c);
        out.value = std::max(out.value, std::max(-c, 0.0) * dist);
    }
    return out;
}

SingularQuotientResult singular_quotient_check(const SweepContext& ctx, Point e, double lambda, int k0, double d1,
                                               double b, double eps_div) {
    if (k0 < 1) throw MovingPlaneError("k0 must be >= 1");
    e = unit(e);
    const double p = (k0 - 1.0) / k0;
    SingularQuotientResult out;
    out.min_value = kInf;
    for (std::size_t k = 0; k < ctx.points.size(); ++k) {
        const Point x = ctx.points[k];
        if (dot(x, e) <= lambda) continue;
        const Point q = reflect(x, e, lambda);
        if (!evaluable(ctx, q)) continue;
        const double s = ctx.values[k], sl = ctx.psi->value(q);
        if (std::abs(s - sl) <= eps_div) continue;
        const double v =
            d1 * (std::pow(std::max(b - s, 0.0), p) - std::pow(std::max(b - sl, 0.0), p)) / (s - sl);
        ++out.samples;
        out.min_value = std::min(out.min_value, v);
        if (v < -1e-9 * std::abs(d1)) ++out.violations;
    }
    if (out.samples == 0) out.min_value = 0.0;
    return out;
}

MovingPlaneReport moving_plane(FieldPtr psi, const Region& region, int directions, const SweepOptions& opts,
                               std::function<double(double)> flux) {
    if (directions < 1) throw MovingPlaneError("need at least one direction");
    const auto ctx = make_context(psi, region, opts);
    MovingPlaneReport rep;
    rep.directions.resize(directions);
    std::vector<double> audits(directions, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < directions; ++k) {
        const double a = std::numbers::pi * k / directions;
        rep.directions[k] = sweep_direction(ctx, {std::cos(a), std::sin(a)});
        if (flux) {
            // A few admissible lambdas below lambda_0.
            const auto& prof = rep.directions[k].profile;
            for (int i = 1; i <= 4; ++i) {
                const std::size_t idx = prof.size() * i / 5;
                if (idx >= prof.size() || prof[idx].first > rep.directions[k].lambda0) continue;
                audits[k] = std::max(audits[k],
                                     coefficient_audit(ctx, flux, rep.directions[k].e, prof[idx].first).value);
            }
        }
    }
    rep.verdict = symmetry_verdict(rep.directions, region.diameter());
    if (flux) rep.audit = *std::max_element(audits.begin(), audits.end());
    return rep;
}

HopfReport hopf_sign_check(const ScalarField& h, Point x0, TangencyKind kind, Point nu, Point e2, double radius,
                           double tol) {
    nu = unit(nu);
    HopfReport r;
    r.kind = kind;
    if (kind == TangencyKind::Boundary) {
        if (norm(e2) == 0.0) e2 = {nu.y, -nu.x};
        e2 = unit(e2);
    }
    const Point tau{-nu.y, nu.x};
    double sup = std::abs(h.value(x0));
    const int nr = 8, na = 16;
    for (int i = 1; i <= nr; ++i)
        for (int j = 1; j < na; ++j) {
            const double rad = radius * i / nr;
            Point p;
            if (kind == TangencyKind::Internal) {
                const double a = std::numbers::pi * (static_cast<double>(j) / na - 0.5);
                p = x0 + rad * (std::cos(a) * nu + std::sin(a) * tau);
            } else {
                const double a = -0.5 * std::numbers::pi * j / na;
                p = x0 + rad * (std::cos(a) * nu + std::sin(a) * e2);
            }
            if (!h.domain().contains(p)) continue;
            const double v = h.value(p);
            if (v < -tol) throw MovingPlaneError("h is negative in the test region");
            sup = std::max(sup, std::abs(v));
        }
    if (sup <= tol) {
        r.h_zero = true;
        r.pass = true;
        return r;
    }
    const Jet j = h.jet(x0, 2);
    if (kind == TangencyKind::Internal) {
        const double d = j(1, 0) * nu.x + j(0, 1) * nu.y;
        r.derivatives.push_back(d);
        r.pass = d > tol;
        return r;
    }
    r.pass = true;
    for (int k = 1; k < 8; ++k) {
        const double a = -0.5 * std::numbers::pi * k / 8.0;
        const Point eta = std::cos(a) * nu + std::sin(a) * e2;
        const double d2 = 2.0 * (j(2, 0) * eta.x * eta.x + j(1, 1) * eta.x * eta.y + j(0, 2) * eta.y * eta.y);
        r.derivatives.push_back(d2);
        if (!(d2 > tol)) r.pass = false;
    }
    return r;
}

}  // namespace sew
