#include "sew/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sew {

double norm(Point a) { return std::hypot(a.x, a.y); }

BoundaryCurve::BoundaryCurve(Map point, Map tangent, std::size_t samples)
    : point_(std::move(point)), tangent_(std::move(tangent)) {
    if (samples < 8) throw std::invalid_argument("boundary curve needs at least 8 samples");
    poly_.reserve(samples);
    params_.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples);
        params_.push_back(t);
        poly_.push_back(point_(t));
    }
}

BoundaryCurve BoundaryCurve::from_polyline(std::vector<Point> closed_polyline) {
    if (closed_polyline.size() < 3) throw std::invalid_argument("closed polyline needs at least 3 points");
    BoundaryCurve c;
    const std::size_t n = closed_polyline.size();
    c.poly_ = std::move(closed_polyline);
    c.params_.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.params_[i] = static_cast<double>(i) / static_cast<double>(n);
    return c;
}

BoundaryCurve BoundaryCurve::circle(Point center, double radius, std::size_t samples) {
    return ellipse(center, radius, radius, samples);
}

BoundaryCurve BoundaryCurve::ellipse(Point center, double a, double b, std::size_t samples) {
    constexpr double tau = 2.0 * std::numbers::pi;
    return BoundaryCurve(
        [=](double t) { return Point{center.x + a * std::cos(tau * t), center.y + b * std::sin(tau * t)}; },
        [=](double t) { return Point{-tau * a * std::sin(tau * t), tau * b * std::cos(tau * t)}; }, samples);
}

Point BoundaryCurve::point(double t) const {
    if (point_) return point_(t - std::floor(t));
    const double n = static_cast<double>(poly_.size());
    double u = (t - std::floor(t)) * n;
    const auto i = static_cast<std::size_t>(std::floor(u)) % poly_.size();
    u -= std::floor(u);
    const Point a = poly_[i], b = poly_[(i + 1) % poly_.size()];
    return a + u * (b - a);
}

Point BoundaryCurve::tangent(double t) const {
    if (tangent_) return tangent_(t - std::floor(t));
    const double n = static_cast<double>(poly_.size());
    const auto i = static_cast<std::size_t>(std::floor((t - std::floor(t)) * n)) % poly_.size();
    return n * (poly_[(i + 1) % poly_.size()] - poly_[i]);
}

Point BoundaryCurve::outward_normal(double t) const {
    const Point d = tangent(t);
    const double len = norm(d);
    Point n{d.y / len, -d.x / len};
    if (signed_area() < 0.0) n = -1.0 * n;
    return n;
}

double BoundaryCurve::signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < poly_.size(); ++i) a += cross(poly_[i], poly_[(i + 1) % poly_.size()]);
    return 0.5 * a;
}

double BoundaryCurve::area() const { return std::abs(signed_area()); }

double BoundaryCurve::length() const {
    double l = 0.0;
    for (std::size_t i = 0; i < poly_.size(); ++i) l += norm(poly_[(i + 1) % poly_.size()] - poly_[i]);
    return l;
}

Box BoundaryCurve::bounding_box() const {
    Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : poly_) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    return b;
}

BoundaryCurve::Nearest BoundaryCurve::nearest(Point p) const {
    const std::size_t n = poly_.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    double bu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = poly_[i], b = poly_[(i + 1) % n];
        const Point ab = b - a;
        const double l2 = dot(ab, ab);
        double u = l2 > 0.0 ? dot(p - a, ab) / l2 : 0.0;
        u = std::clamp(u, 0.0, 1.0);
        const Point q = a + u * ab;
        const double d2 = dot(p - q, p - q);
        if (d2 < best) {
            best = d2;
            bi = i;
            bu = u;
        }
    }
    Nearest r;
    r.t = (static_cast<double>(bi) + bu) / static_cast<double>(n);
    r.point = point(r.t);
    r.distance = std::sqrt(best);
    if (!parametric()) {
        r.point = poly_[bi] + bu * (poly_[(bi + 1) % n] - poly_[bi]);
        return r;
    }
    // Newton on g(t) = (gamma(t) - p) . gamma'(t).
    double t = r.t;
    const double h = 1e-6;
    bool converged = false;
    for (int it = 0; it < 30; ++it) {
        const Point g = point_(t - std::floor(t)) - p;
        const Point d1 = tangent_(t - std::floor(t));
        const Point d2 = (1.0 / (2.0 * h)) * (tangent_(t + h - std::floor(t + h)) - tangent_(t - h - std::floor(t - h)));
        const double f = dot(g, d1);
        const double fp = dot(d1, d1) + dot(g, d2);
        if (fp <= 0.0) break;
        const double step = f / fp;
        t -= step;
        if (std::abs(step) < 1e-14) {
            converged = true;
            break;
        }
    }
    t -= std::floor(t);
    const Point q = point_(t);
    const double d = norm(q - p);
    // The polyline can under- or overestimate by the chord sag; a converged
    // polish on the same stretch of curve wins.
    const double seg = norm(poly_[(bi + 1) % n] - poly_[bi]);
    if ((converged && std::abs(d - r.distance) <= seg) || d <= r.distance + 1e-12) {
        r.t = t;
        r.point = q;
        r.distance = d;
    }
    return r;
}

bool BoundaryCurve::encloses(Point p) const {
    bool inside = false;
    const std::size_t n = poly_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = poly_[i], b = poly_[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::PeriodicRectangle: return "periodic-rectangle";
        case DomainKind::Disk: return "disk";
        case DomainKind::Annulus: return "annulus";
        case DomainKind::JordanTube: return "jordan-tube";
    }
    return "unknown";
}

Domain Domain::periodic_rectangle(double lx, double ly, Point origin) {
    if (!(lx > 0.0 && ly > 0.0)) throw std::invalid_argument("periodic rectangle widths must be positive");
    Domain d;
    d.kind_ = DomainKind::PeriodicRectangle;
    d.lx_ = lx;
    d.ly_ = ly;
    d.center_ = origin;
    return d;
}

Domain Domain::disk(Point center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
    Domain d;
    d.kind_ = DomainKind::Disk;
    d.center_ = center;
    d.r_out_ = radius;
    return d;
}

Domain Domain::annulus(Point center, double r_in, double r_out) {
    if (!(r_in >= 0.0 && r_in < r_out)) throw std::invalid_argument("annulus requires 0 <= r_in < r_out");
    Domain d;
    d.kind_ = DomainKind::Annulus;
    d.center_ = center;
    d.r_in_ = r_in;
    d.r_out_ = r_out;
    return d;
}

Domain Domain::jordan_tube(std::shared_ptr<const TubeChart> chart) {
    if (!chart) throw std::invalid_argument("jordan-tube domain needs a chart");
    Domain d;
    d.kind_ = DomainKind::JordanTube;
    d.chart_ = std::move(chart);
    return d;
}

bool Domain::contains(Point p) const {
    switch (kind_) {
        case DomainKind::PeriodicRectangle: return true;
        case DomainKind::Disk: return norm(p - center_) <= r_out_;
        case DomainKind::Annulus: {
            const double r = norm(p - center_);
            return r >= r_in_ && r <= r_out_;
        }
        case DomainKind::JordanTube: {
            const auto sn = chart_->to_fermi(p);
            return sn && std::abs(sn->second) <= chart_->half_width();
        }
    }
    return false;
}

Box Domain::bounding_box() const {
    switch (kind_) {
        case DomainKind::PeriodicRectangle: return {center_.x, center_.y, center_.x + lx_, center_.y + ly_};
        case DomainKind::Disk:
        case DomainKind::Annulus:
            return {center_.x - r_out_, center_.y - r_out_, center_.x + r_out_, center_.y + r_out_};
        case DomainKind::JordanTube: return chart_->bounding_box();
    }
    return {};
}

bool Domain::contains(Point p, double margin) const {
    switch (kind_) {
        case DomainKind::PeriodicRectangle: return true;
        case DomainKind::Disk: return norm(p - center_) <= r_out_ + margin;
        case DomainKind::Annulus: {
            const double r = norm(p - center_);
            return r >= r_in_ - margin && r <= r_out_ + margin;
        }
        case DomainKind::JordanTube: {
            const auto sn = chart_->to_fermi(p);
            return sn && std::abs(sn->second) <= chart_->half_width() + margin;
        }
    }
    return false;
}

Point Domain::wrap(Point p) const {
    if (!periodic()) return p;
    auto w = [](double v, double o, double l) { return o + (v - o) - l * std::floor((v - o) / l); };
    return {w(p.x, center_.x, lx_), w(p.y, center_.y, ly_)};
}

std::vector<BoundaryCurve> Domain::boundary() const {
    switch (kind_) {
        case DomainKind::PeriodicRectangle: return {};
        case DomainKind::Disk: return {BoundaryCurve::circle(center_, r_out_)};
        case DomainKind::Annulus:
            return {BoundaryCurve::circle(center_, r_out_), BoundaryCurve::circle(center_, r_in_)};
        case DomainKind::JordanTube: {
            auto chart = chart_;
            const double d = chart_->half_width();
            auto offset = [chart](double n) {
                return BoundaryCurve(
                    [chart, n](double t) { return chart->from_fermi(t, n); },
                    [chart, n](double t) {
                        const double h = 1e-6;
                        return (1.0 / (2.0 * h)) * (chart->from_fermi(t + h, n) - chart->from_fermi(t - h, n));
                    });
            };
            return {offset(d), offset(-d)};
        }
    }
    return {};
}

bool Domain::same_as(const Domain& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
        case DomainKind::PeriodicRectangle:
            return lx_ == o.lx_ && ly_ == o.ly_ && center_.x == o.center_.x && center_.y == o.center_.y;
        case DomainKind::Disk:
        case DomainKind::Annulus:
            return r_in_ == o.r_in_ && r_out_ == o.r_out_ && center_.x == o.center_.x && center_.y == o.center_.y;
        case DomainKind::JordanTube: return chart_ == o.chart_;
    }
    return false;
}

std::string Domain::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind_);
    switch (kind_) {
        case DomainKind::PeriodicRectangle:
            os << " lx=" << lx_ << " ly=" << ly_ << " x0=" << center_.x << " y0=" << center_.y;
            break;
        case DomainKind::Disk: os << " cx=" << center_.x << " cy=" << center_.y << " r=" << r_out_; break;
        case DomainKind::Annulus:
            os << " cx=" << center_.x << " cy=" << center_.y << " r_in=" << r_in_ << " r_out=" << r_out_;
            break;
        case DomainKind::JordanTube: os << " delta=" << chart_->half_width(); break;
    }
    return os.str();
}

}  // namespace sew
