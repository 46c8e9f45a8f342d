/// @file geometry.hpp
/// @brief Points, closed boundary curves and 2D domains.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sew {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);

struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

/// A closed curve parameterized on t in [0, 1). When a parametric form is
/// available distances are polished by Newton on t; otherwise the sampled
/// polyline is used as-is.
class BoundaryCurve {
public:
    using Map = std::function<Point(double)>;

    BoundaryCurve() = default;
    BoundaryCurve(Map point, Map tangent, std::size_t samples = 2048);
    static BoundaryCurve from_polyline(std::vector<Point> closed_polyline);
    static BoundaryCurve circle(Point center, double radius, std::size_t samples = 2048);
    static BoundaryCurve ellipse(Point center, double a, double b, std::size_t samples = 2048);

    bool parametric() const { return static_cast<bool>(point_); }
    Point point(double t) const;
    /// dPoint/dt.
    Point tangent(double t) const;
    /// Unit normal pointing out of the enclosed region.
    Point outward_normal(double t) const;

    const std::vector<Point>& polyline() const { return poly_; }
    /// Positive for counterclockwise orientation.
    double signed_area() const;
    double area() const;
    double length() const;
    Box bounding_box() const;

    struct Nearest {
        double distance = 0.0;
        double t = 0.0;
        Point point;
    };
    Nearest nearest(Point p) const;
    double distance(Point p) const { return nearest(p).distance; }
    /// Even-odd point-in-polygon on the sampled polyline.
    bool encloses(Point p) const;

private:
    Map point_, tangent_;
    std::vector<Point> poly_;
    std::vector<double> params_;
};

/// Chart used by jordan-tube domains to decide membership; implemented by the
/// Fermi chart of a Jordan curve.
class TubeChart {
public:
    virtual ~TubeChart() = default;
    /// Curve parameter and signed normal offset of p (n > 0 on the exterior
    /// side), or nullopt if p lies outside the injectivity tube.
    virtual std::optional<std::pair<double, double>> to_fermi(Point p) const = 0;
    virtual Point from_fermi(double t, double n) const = 0;
    virtual double half_width() const = 0;
    virtual Box bounding_box() const = 0;
    virtual const BoundaryCurve& center_curve() const = 0;
};

enum class DomainKind { PeriodicRectangle, Disk, Annulus, JordanTube };

std::string to_string(DomainKind kind);

class Domain {
public:
    static Domain periodic_rectangle(double lx, double ly, Point origin = {0.0, 0.0});
    static Domain disk(Point center, double radius);
    static Domain annulus(Point center, double r_in, double r_out);
    static Domain jordan_tube(std::shared_ptr<const TubeChart> chart);

    DomainKind kind() const { return kind_; }
    bool periodic() const { return kind_ == DomainKind::PeriodicRectangle; }
    bool contains(Point p) const;
    /// Membership in the closure thickened by margin.
    bool contains(Point p, double margin) const;
    Box bounding_box() const;
    /// Map p into the fundamental cell for periodic domains; identity otherwise.
    Point wrap(Point p) const;
    /// Physical boundary components (empty for the periodic rectangle).
    std::vector<BoundaryCurve> boundary() const;

    Point center() const { return center_; }
    double radius() const { return r_out_; }
    double inner_radius() const { return r_in_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    const TubeChart* chart() const { return chart_.get(); }

    bool same_as(const Domain& other) const;
    std::string describe() const;

private:
    DomainKind kind_ = DomainKind::Disk;
    Point center_{};
    double r_in_ = 0.0, r_out_ = 1.0;
    double lx_ = 0.0, ly_ = 0.0;
    std::shared_ptr<const TubeChart> chart_;
};

}  // namespace sew
