/// @file flux.hpp
/// @brief Level-set sampling of (psi, Delta psi), the branch table, the flux
/// function Delta psi = F(psi) and Puiseux fits at the range endpoints.
#pragma once

#include "sew/critical_set.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sew {

class FluxError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LevelComponent {
    int id = 0;
    /// Branch label (0 unless a labelling function was supplied).
    int label = 0;
    bool closed = false;
    Point centroid;
    std::vector<Point> points;
    /// Companion values at points.
    std::vector<double> values;
    double mean = 0.0;
    /// max - min of values.
    double spread = 0.0;
};

struct LevelSetSample {
    double level = 0.0;
    /// Sampled along probe rays rather than contours.
    bool probe = false;
    std::vector<LevelComponent> components;
};

struct Range {
    double a = 0.0, b = 0.0;
    double width() const { return b - a; }
};

/// A ray for endpoint sampling. Points are origin + t direction, t in (0, length].
struct ProbeRay {
    Point origin;
    Point direction;
    double length = 0.0;
    int label = 0;
};

struct PairOptions {
    int resolution = 256;
    /// Defaults to laplacian(psi).
    FieldPtr companion;
    /// Optional sub-region; vertices outside it are ignored.
    std::function<bool(Point)> region;
    std::function<int(Point)> branch_label;
    /// Known critical values; levels within critical_gap * (b - a) are skipped.
    std::vector<double> critical_values;
    double critical_gap = 1e-3;
    /// Defaults to field_range().
    std::optional<Range> range;
};

struct PairCollection {
    Range range;
    std::vector<LevelSetSample> samples;
    /// Levels skipped near critical values or because contouring failed.
    std::vector<double> skipped;
};

/// Range of psi over the in-domain grid nodes (and region), widened by the
/// given critical values when they lie inside the region.
Range field_range(const ScalarField& psi, int resolution, const std::function<bool(Point)>& region = {},
                  const std::vector<double>& critical_values = {});

/// Chebyshev-clustered levels in (a, b).
std::vector<double> chebyshev_levels(Range range, int count);

PairCollection collect_pairs(FieldPtr psi, const std::vector<double>& levels, const PairOptions& opts = {});
PairCollection collect_pairs(FieldPtr psi, int count, const PairOptions& opts = {});

/// Dyadic levels toward an endpoint: |s - e| = window * (b - a) * 2^-j,
/// j = 0..count-1, each sampled by bisection along the rays.
std::vector<LevelSetSample> probe_pairs(const ScalarField& psi, const ScalarField& companion, Range range,
                                        bool at_b, const std::vector<ProbeRay>& rays, double window = 0.1,
                                        int count = 16);

/// Symmetric Hausdorff distance (periodic domains fold offsets).
double hausdorff(const std::vector<Point>& p, const std::vector<Point>& q, const Domain& domain);
/// For every component of `fine`, the index of the nearest component of
/// `coarse` in Hausdorff distance (-1 when coarse is empty).
std::vector<int> match_components(const LevelSetSample& coarse, const LevelSetSample& fine, const Domain& domain);

/// Least-squares line in s plus a piecewise cubic in
/// t = arccos(1 - 2 (s - a) / (b - a)) / pi through the knot deviations.
class FluxFunction {
public:
    FluxFunction() = default;
    FluxFunction(Range range, std::vector<std::pair<double, double>> knots);
    double operator()(double s) const;
    Range range() const { return range_; }
    /// Sorted (s, F) knots.
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }
    bool empty() const { return knots_.empty(); }

private:
    double t_of(double s) const;
    Range range_;
    std::vector<std::pair<double, double>> knots_;
    std::vector<double> t_, dev_;
    double offset_ = 0.0, slope_ = 0.0;
};

enum class FluxVerdict { SingleValued, BranchDiscrepancy };
std::string to_string(FluxVerdict v);

struct BranchEntry {
    double value = 0.0;
    std::vector<int> components;
    std::vector<int> labels;
};

struct BranchRow {
    double level = 0.0;
    bool probe = false;
    /// Spread of all companion values on the level.
    double spread = 0.0;
    std::vector<BranchEntry> branches;
};

struct FluxRelation {
    Range range;
    double tol_branch = 1e-8;
    FluxVerdict verdict = FluxVerdict::SingleValued;
    std::vector<BranchRow> table;
    double max_spread = 0.0;
    /// Present iff single-valued.
    std::optional<FluxFunction> F;
    /// Level means, always built.
    FluxFunction mean_profile;
    /// Per-label functions when labels were supplied and each label is
    /// single-valued.
    std::map<int, FluxFunction> branches;
    /// Largest |value - F(level)| over all samples.
    double sup_deviation = 0.0;
    std::size_t contour_levels = 0;
    std::vector<double> skipped;

    bool single_valued() const { return verdict == FluxVerdict::SingleValued; }
};

/// max(10 * residual, 1e-8).
double branch_tolerance(double steady_residual);

/// Needs at least 16 contour levels.
FluxRelation extract_flux(const PairCollection& pairs, double tol_branch = 1e-8);

enum class Endpoint { A, B };
std::string to_string(Endpoint e);

struct PuiseuxSeries {
    Endpoint endpoint = Endpoint::B;
    /// Endpoint value.
    double e = 0.0;
    /// Ramification index (2 at endpoint a: lattice k/2).
    int k0 = 1;
    /// Coefficient indices k; the exponent of a_k is k / k0.
    std::vector<int> indices;
    std::vector<double> coefficients;
    /// RMS residual relative to max |F| in the window.
    double residual = 0.0;
    /// Endpoint b: a_{k0-1} < 0. Endpoint a: some odd a_k nonzero.
    bool leading_sign = false;
    /// First odd k with a_k != 0 (endpoint a), -1 if none.
    int first_odd_index = -1;
    /// k0 == 1 at b, or no odd coefficient at a.
    bool analytic = false;
    /// Exponents found by log-log peeling of |F - F(e)|.
    std::vector<double> exponents;
    double leading_exponent = 0.0;
    double holder_exponent = 1.0;
    bool detected = true;
    std::string note;
    std::size_t samples = 0;
    std::optional<int> branch;

    double coefficient(int k) const;
};

struct PuiseuxOptions {
    int k0_max = 6;
    double window = 0.1;
    /// Relative RMS residual above which no structure is reported.
    double tol_fit = 1e-4;
    /// Relative size below which a coefficient counts as zero.
    double zero_tol = 1e-6;
};

/// Least-squares fit on the lattice {k / k0}, k >= k0 - 1, in (b - s) at b,
/// or {k / 2} in (s - a) at a; k0 minimizes the windowed residual (ties go
/// to the smaller k0). branch selects a per-label function.
PuiseuxSeries fit_puiseux(const FluxRelation& flux, Endpoint endpoint, const PuiseuxOptions& opts = {},
                          std::optional<int> branch = std::nullopt);
PuiseuxSeries fit_puiseux(const FluxFunction& F, Endpoint endpoint, const PuiseuxOptions& opts = {});

struct VerifyOptions {
    int resolution = 256;
    std::function<bool(Point)> region;
    /// Nodes closer than this many spacings to a masked node are skipped.
    int margin = 6;
    FieldPtr companion;
};

/// sup |Delta psi - F(psi)| over interior nodes whose value lies in F's range.
double verify_flux_residual(FieldPtr psi, const FluxFunction& F, const VerifyOptions& opts = {});
/// Throws FluxError unless the relation is single-valued.
double verify_flux_residual(FieldPtr psi, const FluxRelation& flux, const VerifyOptions& opts = {});

struct FluxAnalysisOptions {
    int resolution = 256;
    int levels = 64;
    double window = 0.1;
    int probe_count = 16;
    int k0_max = 6;
    /// Branch tolerance; < 0 derives it from the steady residual.
    double tol_branch = -1.0;
    FieldPtr companion;
    std::function<bool(Point)> region;
    std::function<int(Point)> branch_label;
    /// Rays toward each endpoint; empty picks rays from the extrema.
    std::vector<ProbeRay> rays_a, rays_b;
    std::optional<Range> range;
    /// Critical values to avoid; empty runs find_critical_set.
    std::optional<std::vector<double>> critical_values;
};

struct FluxAnalysis {
    PairCollection pairs;
    FluxRelation relation;
    /// sup |{psi, g}| (the steady residual when g = Delta psi).
    double steady_residual = 0.0;
    std::optional<PuiseuxSeries> puiseux_a, puiseux_b;
    /// Per-branch endpoint-a fits when the relation has labelled branches.
    std::map<int, PuiseuxSeries> branch_a;
    std::optional<double> verify_residual;
    std::vector<std::string> warnings;
};

FluxAnalysis analyze_flux(FieldPtr psi, const FluxAnalysisOptions& opts = {});

}  // namespace sew
