/// @file critical_set.hpp
/// @brief Degrees of vanishing, critical curves and loops, region
/// decomposition and local radiality.
#pragma once

#include "sew/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sew {

struct DegreeResult {
    Point point;
    /// Smallest k >= 1 with a non-negligible k-th order Taylor coefficient.
    int degree = 0;
    /// No such k up to the order cap; degree is then cap + 1.
    bool exceeds = false;
    /// Max |c_alpha| over |alpha| = degree.
    double leading_norm = 0.0;
    /// leading_norm over the largest lower-order magnitude.
    double confidence = 0.0;
};

/// Default relative tolerance: 1e-7 for closed forms, 1e-4 for grid fields.
double default_degree_tolerance(const ScalarField& f);

/// max_order < 0 uses the field's cap; tol < 0 uses the default.
DegreeResult vanishing_degree(const ScalarField& f, Point p, int max_order = -1, double tol = -1.0);

/// Newton/Levenberg-Marquardt polish of a critical point of degree d: drives
/// all Taylor coefficients of orders 1..d-1 to zero, which converges
/// quadratically even where grad f alone has a multiple zero.
Point polish_critical_point(const ScalarField& f, Point p, int degree, double max_shift);

enum class ComponentKind { IsolatedPoint, Arc, Loop, FlatRegion };

std::string to_string(ComponentKind k);

struct CriticalComponent {
    ComponentKind kind = ComponentKind::IsolatedPoint;
    std::vector<Point> points;
    /// Per-point degree (cap + 1 when the degree exceeds the cap).
    std::vector<int> degrees;
    bool constant_degree = true;
    /// Degree jumps or a two-dimensional flat zone.
    bool anomalous = false;
    /// Largest absolute turning angle between consecutive segments (curves).
    double max_turning = 0.0;
    /// Candidate grid nodes that produced the component.
    std::vector<std::size_t> nodes;
    /// Degree of the component (modal degree along curves).
    int modal_degree = 0;

    int degree() const { return modal_degree; }
    bool is_curve() const { return kind == ComponentKind::Arc || kind == ComponentKind::Loop; }
};

struct BranchPoint {
    Point point;
    int degree = 0;
};

struct CriticalSetOptions {
    int resolution = 128;
    /// Relative degree tolerance; < 0 picks the default for the field.
    double tol_degree = -1.0;
};

struct CriticalSetReport {
    GridSpec grid;
    double tol_degree = 0.0;
    std::vector<CriticalComponent> components;
    std::vector<BranchPoint> branch_points;
    std::vector<std::string> warnings;
    /// 1 at candidate nodes (|grad f| <= h |D^2 f|).
    std::vector<std::uint8_t> candidate;
    /// 1 at grid nodes inside the domain.
    std::vector<std::uint8_t> active;

    bool has_curves() const;
    /// Offset b - a, folded into the fundamental cell on periodic grids.
    Point delta(Point a, Point b) const;
    std::vector<double> critical_values(const ScalarField& f) const;
};

CriticalSetReport find_critical_set(const ScalarField& f, const CriticalSetOptions& opts = {});

struct RegionCell {
    int id = 0;
    std::size_t nodes = 0;
    double area = 0.0;
    bool simply_connected = false;
    /// A node of the cell, usable as a seed.
    Point sample;
    /// Isolated critical points inside the cell.
    std::vector<Point> critical_points;
};

struct RegionDecomposition {
    GridSpec grid;
    /// Cell id per node, -1 on walls and outside the domain.
    std::vector<int> label;
    std::vector<RegionCell> cells;
    std::vector<std::pair<int, int>> adjacency;
    std::optional<int> innermost;
    /// (component index, enclosed cell) for every loop.
    std::vector<std::pair<int, int>> loop_cells;
    bool no_critical_curves = false;
    std::vector<std::string> warnings;

    int cell_at(Point p) const;
};

/// Cells of the domain minus the critical curves (and flat zones). The
/// innermost cell is the simply connected one of smallest area.
RegionDecomposition innermost_loop(const CriticalSetReport& report, const Domain& domain);

struct DegreeRelationSample {
    Point point;
    int degree_laplacian = 0;
    double laplacian = 0.0;
    bool pass = false;
};

struct DegreeRelationReport {
    /// "d-2" (curve degree >= 3) or "laplacian-nonzero" (degree 2).
    std::string mode;
    int curve_degree = 0;
    std::vector<DegreeRelationSample> samples;
    bool pass = false;
};

/// Along a curve of constant degree d: the degree of Delta psi is d - 2;
/// for d = 2 checks Delta psi != 0 instead.
DegreeRelationReport degree_relation_check(FieldPtr psi, const CriticalComponent& component, std::size_t samples = 16);

struct RadialityVerdict {
    int cell = 0;
    bool tested = false;
    bool radial = false;
    Point center;
    /// Largest (max - min) of psi over the tested circles.
    double spread = 0.0;
    double tolerance = 0.0;
    int circles = 0;
    std::string note;
};

/// Per cell: find the center minimizing angular variation of psi on circles
/// and report radial(center) when the variation is below tolerance.
std::vector<RadialityVerdict> detect_local_radiality(const ScalarField& psi, const RegionDecomposition& dec,
                                                     double rel_tol = 1e-8);

}  // namespace sew
