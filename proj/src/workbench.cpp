#include "sew/workbench.hpp"

#include "sew/catalog.hpp"
#include "sew/elliptic.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace sew {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Json point_json(Point p) { return Json::array({p.x, p.y}); }

Json points_json(const std::vector<Point>& pts) {
    Json a = Json::array();
    for (const Point& p : pts) a.push_back(point_json(p));
    return a;
}

Json knots_json(const FluxFunction& F) {
    Json a = Json::array();
    for (const auto& [s, v] : F.knots()) a.push_back(Json::array({s, v}));
    return a;
}

/// Least-squares line through the knots and its largest deviation.
Json linear_fit_json(const FluxFunction& F) {
    const auto& k = F.knots();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(k.size());
    for (const auto& [s, v] : k) {
        sx += s;
        sy += v;
        sxx += s * s;
        sxy += s * v;
    }
    const double det = n * sxx - sx * sx;
    const double slope = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
    const double offset = n > 0 ? (sy - slope * sx) / n : 0.0;
    double dev = 0.0;
    for (const auto& [s, v] : k) dev = std::max(dev, std::abs(v - offset - slope * s));
    return {{"offset", offset}, {"slope", slope}, {"max_deviation", dev}};
}

Json puiseux_json(const PuiseuxSeries& p) {
    Json j = {{"endpoint", to_string(p.endpoint)},
              {"e", p.e},
              {"k0", p.k0},
              {"indices", p.indices},
              {"coefficients", p.coefficients},
              {"residual", p.residual},
              {"leading_sign", p.leading_sign},
              {"first_odd_index", p.first_odd_index},
              {"analytic", p.analytic},
              {"exponents", p.exponents},
              {"leading_exponent", p.leading_exponent},
              {"holder_exponent", p.holder_exponent},
              {"detected", p.detected},
              {"samples", p.samples}};
    if (p.branch) j["branch"] = *p.branch;
    if (!p.note.empty()) j["note"] = p.note;
    return j;
}

Json decomposition_json(const RegionDecomposition& d) {
    Json cells = Json::array();
    for (const auto& c : d.cells)
        cells.push_back({{"id", c.id},
                         {"nodes", c.nodes},
                         {"area", c.area},
                         {"simply_connected", c.simply_connected},
                         {"sample", point_json(c.sample)},
                         {"critical_points", points_json(c.critical_points)}});
    Json adj = Json::array();
    for (const auto& [a, b] : d.adjacency) adj.push_back(Json::array({a, b}));
    Json loops = Json::array();
    for (const auto& [c, cell] : d.loop_cells) loops.push_back({{"component", c}, {"cell", cell}});
    Json j = {{"cells", cells}, {"adjacency", adj}, {"loop_cells", loops}, {"no_critical_curves", d.no_critical_curves}};
    j["innermost"] = d.innermost ? Json(*d.innermost) : Json(nullptr);
    j["warnings"] = d.warnings;
    return j;
}

Json critical_summary_json(const CriticalSetReport& r, const ScalarField& f) {
    int points = 0, curves = 0, flats = 0;
    Json comps = Json::array();
    for (const auto& c : r.components) {
        if (c.kind == ComponentKind::IsolatedPoint) ++points;
        if (c.is_curve()) ++curves;
        if (c.kind == ComponentKind::FlatRegion) ++flats;
        comps.push_back({{"kind", to_string(c.kind)},
                         {"degree", c.degree()},
                         {"constant_degree", c.constant_degree},
                         {"points", c.points.size()}});
    }
    return {{"isolated_points", points},
            {"curves", curves},
            {"flat_regions", flats},
            {"branch_points", r.branch_points.size()},
            {"components", comps},
            {"critical_values", r.critical_values(f)},
            {"warnings", r.warnings}};
}

Json direction_json(const DirectionReport& d, bool profile) {
    Json j = {{"angle", d.angle},
              {"e", point_json(d.e)},
              {"lambda0", d.lambda0},
              {"symmetric", d.symmetric},
              {"sup_h", d.sup_h},
              {"tangency", to_string(d.event.kind)},
              {"cause", d.event.cause},
              {"contact", point_json(d.event.contact)},
              {"h_zero", d.event.h_zero}};
    if (!d.note.empty()) j["note"] = d.note;
    if (profile) {
        Json p = Json::array();
        for (const auto& [l, h] : d.profile) p.push_back(Json::array({l, h}));
        j["profile"] = p;
    }
    return j;
}

std::string timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double param_or(const ParamMap& m, const std::string& k, double fallback) {
    auto it = m.find(k);
    return it == m.end() ? fallback : it->second;
}

int int_param(const ParamMap& m, const std::string& k, int fallback) {
    const double v = param_or(m, k, fallback);
    if (v != std::floor(v) || v < 0 || v > 1e6) throw WorkbenchError("parameter '" + k + "' must be a nonnegative integer");
    return static_cast<int>(v);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw WorkbenchError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Spec files: '#' comments, lines joined with ';'.
std::string read_spec_file(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line, text;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        text += line + ";";
    }
    return text;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw WorkbenchError("cannot write '" + path + "'");
    f << text;
}

void merge(Json& into, const Json& from) {
    for (const auto& [k, v] : from.items()) into[k] = v;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Whitespace- or comma-separated numbers per line; blank lines separate curves.
std::vector<std::vector<std::vector<double>>> read_table_blocks(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<std::vector<double>>> blocks(1);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) row.push_back(parse_number(tok));
        if (row.empty()) {
            if (!blocks.back().empty()) blocks.emplace_back();
            continue;
        }
        blocks.back().push_back(row);
    }
    if (blocks.back().empty()) blocks.pop_back();
    if (blocks.empty()) throw WorkbenchError("'" + path + "' holds no data");
    return blocks;
}

Region region_from_file(const std::string& path) {
    std::vector<BoundaryCurve> curves;
    for (const auto& block : read_table_blocks(path)) {
        std::vector<Point> pts;
        for (const auto& row : block) {
            if (row.size() != 2) throw WorkbenchError("region file rows need x y");
            pts.push_back({row[0], row[1]});
        }
        if (pts.size() < 3) throw WorkbenchError("region curve needs at least 3 points");
        curves.push_back(BoundaryCurve::from_polyline(std::move(pts)));
    }
    return Region(std::move(curves));
}

/// Rows "j cx sx cy sy".
JordanCurve fourier_curve_from_file(const std::string& path) {
    const auto blocks = read_table_blocks(path);
    std::vector<double> cx, sx, cy, sy;
    for (const auto& row : blocks.front()) {
        if (row.size() != 5 || row[0] < 0 || row[0] != std::floor(row[0]))
            throw WorkbenchError("fourier file rows need j cx sx cy sy");
        const auto j = static_cast<std::size_t>(row[0]);
        if (j >= cx.size()) {
            cx.resize(j + 1, 0.0);
            sx.resize(j + 1, 0.0);
            cy.resize(j + 1, 0.0);
            sy.resize(j + 1, 0.0);
        }
        cx[j] = row[1];
        sx[j] = row[2];
        cy[j] = row[3];
        sy[j] = row[4];
    }
    return JordanCurve(cx, sx, cy, sy);
}

FluxAnalysisOptions tube_flux_options(const ChartPtr& chart) {
    FluxAnalysisOptions o;
    const double d = chart->half_width();
    o.region = [chart, d](Point p) {
        const auto tn = chart->invert(p);
        return tn && std::abs(tn->second) <= 0.5 * d;
    };
    o.critical_values = std::vector<double>{0.0};
    o.branch_label = [chart](Point p) {
        const auto tn = chart->invert(p);
        return (tn && tn->second < 0.0) ? -1 : 1;
    };
    for (int i = 0; i < 8; ++i) {
        const double t = kTwoPi * (i + 0.3) / 8;
        for (double s : {-1.0, 1.0})
            o.rays_a.push_back({chart->map(t, 0.0), s * chart->curve().normal(t), 0.5 * d, s < 0 ? -1 : 1});
    }
    return o;
}

Json series_json(const TubeSeriesSolution& s, const FermiChart& chart) {
    return {{"Nn", s.Nn},
            {"Ns", s.Ns},
            {"delta", chart.half_width()},
            {"curve_modes", chart.curve().modes()},
            {"curve_length", chart.curve().length()},
            {"max_curvature", chart.curve().max_curvature()},
            {"c2_error", s.c2_error},
            {"recursion_residual", s.recursion_residual},
            {"decay_A", s.decay_A},
            {"decay_rho", s.decay_rho},
            {"nonzero_modes", s.nonzero_modes}};
}

}  // namespace

std::string spec_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 0xF];
    return s;
}

Subject make_subject(const FieldSpec& spec) {
    Subject s;
    s.spec = spec;
    if (spec.name == "counterexample-circle" || spec.name == "counterexample-ellipse") {
        const bool circle = spec.name == "counterexample-circle";
        const JordanCurve curve = circle ? JordanCurve::circle({0.0, 0.0}, param_or(spec.params, "r", 1.0))
                                         : JordanCurve::ellipse(param_or(spec.params, "a", 1.3),
                                                                param_or(spec.params, "b", 0.8));
        const double delta = param_or(spec.params, "delta", circle ? 0.3 : 0.2);
        s.chart = build_fermi_chart(curve, delta);
        s.series = solve_tube_series(*s.chart, int_param(spec.params, "Nn", 16), int_param(spec.params, "Ns", 0));
        s.field = export_field(*s.series, s.chart);
        s.flux = tube_flux_options(s.chart);
        s.region = s.flux.region;
        s.mp_region.emplace(Region::interior_of(s.chart->center_curve()));
        s.audit_branch = -1;
        return s;
    }
    try {
        s.field = catalog_field(spec.name, spec.params, spec_domain(spec));
    } catch (const std::invalid_argument& e) {
        throw WorkbenchError(e.what());
    }
    if (!s.field->domain().periodic()) s.mp_region.emplace(Region::from_domain(s.field->domain()));
    return s;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::Radial: return "radial";
        case Classification::Semilinear: return "semilinear";
        case Classification::BranchDiscrepancy: return "branch-discrepancy";
        case Classification::Inconclusive: return "inconclusive";
    }
    return "?";
}

bool AnalysisReport::has(Classification c) const {
    return std::find(classification.begin(), classification.end(), c) != classification.end();
}

Json report_header(const std::string& command, const std::string& spec, int resolution, const Json& tolerances,
                   bool timestamp) {
    Json j = {{"tool", "sew"},
              {"version", kToolVersion},
              {"schema", kReportSchema},
              {"command", command},
              {"spec", spec},
              {"spec_hash", spec_hash(spec)},
              {"resolution", resolution},
              {"tolerances", tolerances}};
    if (timestamp) j["timestamp"] = timestamp_utc();
    return j;
}

Json to_json(const ResidualReport& r) {
    return {{"field", r.field},
            {"scheme", r.scheme},
            {"resolution", r.resolution},
            {"sup_residual", r.sup},
            {"l2_residual", r.l2},
            {"nodes", r.nodes}};
}

Json to_json(const CriticalSetReport& r, const ScalarField& f, bool polylines) {
    Json comps = Json::array();
    for (const auto& c : r.components) {
        Json j = {{"kind", to_string(c.kind)},
                  {"degree", c.degree()},
                  {"constant_degree", c.constant_degree},
                  {"anomalous", c.anomalous},
                  {"max_turning", c.max_turning},
                  {"size", c.points.size()}};
        if (!c.points.empty()) j["value"] = f.value(c.points.front());
        if (polylines) {
            j["points"] = points_json(c.points);
            j["degrees"] = c.degrees;
        }
        comps.push_back(j);
    }
    Json bps = Json::array();
    for (const auto& b : r.branch_points) bps.push_back({{"point", point_json(b.point)}, {"degree", b.degree}});
    return {{"grid", {{"nx", r.grid.nx}, {"ny", r.grid.ny}}},
            {"tol_degree", r.tol_degree},
            {"has_curves", r.has_curves()},
            {"components", comps},
            {"branch_points", bps},
            {"critical_values", r.critical_values(f)},
            {"warnings", r.warnings}};
}

Json to_json(const FluxAnalysis& fa) {
    const FluxRelation& rel = fa.relation;
    Json table = Json::array();
    for (const auto& row : rel.table) {
        Json br = Json::array();
        for (const auto& b : row.branches)
            br.push_back({{"value", b.value}, {"components", b.components}, {"labels", b.labels}});
        table.push_back({{"level", row.level}, {"probe", row.probe}, {"spread", row.spread}, {"branches", br}});
    }
    Json j = {{"range", Json::array({rel.range.a, rel.range.b})},
              {"verdict", to_string(rel.verdict)},
              {"tol_branch", rel.tol_branch},
              {"max_spread", rel.max_spread},
              {"sup_deviation", rel.sup_deviation},
              {"steady_residual", fa.steady_residual},
              {"contour_levels", rel.contour_levels},
              {"skipped_levels", rel.skipped}};
    j["verify_residual"] = fa.verify_residual ? Json(*fa.verify_residual) : Json(nullptr);
    if (rel.F) j["F"] = {{"knots", knots_json(*rel.F)}, {"linear_fit", linear_fit_json(*rel.F)}};
    Json branches = Json::object();
    for (const auto& [label, F] : rel.branches) branches[std::to_string(label)] = knots_json(F);
    j["branches"] = branches;
    Json pz = Json::array();
    if (fa.puiseux_a) pz.push_back(puiseux_json(*fa.puiseux_a));
    if (fa.puiseux_b) pz.push_back(puiseux_json(*fa.puiseux_b));
    for (const auto& [label, p] : fa.branch_a) pz.push_back(puiseux_json(p));
    j["puiseux"] = pz;
    j["branch_table"] = table;
    j["warnings"] = fa.warnings;
    return j;
}

Json to_json(const MovingPlaneReport& r, bool profiles) {
    Json dirs = Json::array();
    for (const auto& d : r.directions) dirs.push_back(direction_json(d, profiles));
    Json j = {{"verdict", to_string(r.verdict.verdict)},
              {"center", point_json(r.verdict.center)},
              {"center_residual", r.verdict.center_residual},
              {"axes", r.verdict.axes},
              {"symmetric_directions",
               std::count_if(r.directions.begin(), r.directions.end(), [](const auto& d) { return d.symmetric; })}};
    j["audit_M"] = r.audit ? Json(*r.audit) : Json(nullptr);
    j["directions"] = dirs;
    return j;
}

AnalysisReport analyze(const Subject& subject, const AnalyzeOptions& opts) {
    AnalysisReport rep;
    const FieldPtr& psi = subject.field;
    const SweepOptions sweep;

    auto stage = [&](const char* name, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            rep.errors.emplace_back(name, e.what());
        }
    };

    ResidualOptions ro;
    ro.resolution = opts.resolution;
    ro.region = subject.region;
    rep.residual = steady_residual(psi, ro);
    rep.steady = rep.residual.sup <= opts.tol_steady;

    std::optional<double> verify;
    if (!rep.steady) {
        rep.classification = {Classification::BranchDiscrepancy};
        std::ostringstream os;
        os << "non-steady: sup bracket residual " << rep.residual.sup << " above " << opts.tol_steady;
        rep.reason = os.str();
        rep.exit_code = kExitNonSteady;
    } else {
        stage("critical-set", [&] {
            CriticalSetOptions co;
            co.resolution = std::min(opts.resolution, 128);
            if (!subject.chart) rep.critical = find_critical_set(*psi, co);
        });
        stage("flux", [&] {
            FluxAnalysisOptions fo = subject.flux;
            fo.resolution = opts.resolution;
            fo.levels = opts.levels;
            rep.flux = analyze_flux(psi, fo);
            if (rep.flux->relation.single_valued()) {
                verify = rep.flux->verify_residual;
                if (!verify) {
                    VerifyOptions vo;
                    vo.resolution = opts.resolution;
                    vo.region = fo.region;
                    verify = verify_flux_residual(psi, rep.flux->relation, vo);
                }
            }
        });
        stage("moving-plane", [&] {
            if (!subject.mp_region) return;
            std::function<double(double)> F;
            if (rep.flux && rep.flux->relation.F) {
                F = *rep.flux->relation.F;
            } else if (rep.flux && subject.audit_branch) {
                auto it = rep.flux->relation.branches.find(*subject.audit_branch);
                if (it != rep.flux->relation.branches.end()) F = it->second;
            }
            rep.moving_plane = moving_plane(psi, *subject.mp_region, opts.directions, sweep, F);
        });

        std::vector<std::string> why;
        if (rep.moving_plane && rep.moving_plane->verdict.verdict == GlobalVerdict::Radial) {
            rep.classification.push_back(Classification::Radial);
            why.push_back("moving plane symmetric in every direction");
        }
        if (rep.flux && rep.flux->relation.single_valued()) {
            if (verify && *verify <= opts.tol_verify) {
                rep.classification.push_back(Classification::Semilinear);
                why.push_back("single-valued flux, verified");
            } else {
                why.push_back("single-valued flux failed verification");
            }
        }
        if (rep.flux && !rep.flux->relation.single_valued()) {
            rep.classification.push_back(Classification::BranchDiscrepancy);
            why.push_back(rep.flux->relation.branches.size() >= 2 ? "flux splits into labelled branches"
                                                                    : "flux is not single-valued");
        }
        if (rep.classification.empty()) {
            rep.classification = {Classification::Inconclusive};
            rep.exit_code = kExitInconclusive;
        }
        for (std::size_t i = 0; i < why.size(); ++i) rep.reason += (i ? "; " : "") + why[i];
        if (rep.reason.empty()) rep.reason = "no sub-report decides";
    }

    const double tol_branch = rep.flux ? rep.flux->relation.tol_branch : branch_tolerance(rep.residual.sup);
    const Json tol = {{"steady", opts.tol_steady},
                      {"verify", opts.tol_verify},
                      {"branch", tol_branch},
                      {"degree", default_degree_tolerance(*psi)},
                      {"monotone", sweep.tol_mp},
                      {"symmetric", 1e-6},
                      {"center", 1e-6},
                      {"lambda", 1e-8}};
    Json j = report_header("analyze", subject.spec.canonical(), opts.resolution, tol, opts.timestamp);
    j["field"] = {{"name", psi->name()}, {"source", to_string(psi->source())}, {"domain", psi->domain().describe()}};
    if (subject.series) j["series"] = series_json(*subject.series, *subject.chart);
    j["residual"] = to_json(rep.residual);
    j["steady"] = rep.steady;
    if (rep.critical) j["critical_set"] = critical_summary_json(*rep.critical, *psi);
    if (rep.flux) {
        Json fj = to_json(*rep.flux);
        fj.erase("branch_table");
        fj["verify_residual"] = verify ? Json(*verify) : Json(nullptr);
        j["flux"] = fj;
    }
    if (rep.moving_plane) j["moving_plane"] = to_json(*rep.moving_plane, false);
    Json cls = Json::array();
    for (auto c : rep.classification) cls.push_back(to_string(c));
    j["classification"] = cls;
    j["reason"] = rep.reason;
    Json errs = Json::array();
    for (const auto& [s, m] : rep.errors) errs.push_back({{"stage", s}, {"message", m}});
    j["errors"] = errs;
    j["exit_code"] = rep.exit_code;
    rep.json = std::move(j);
    return rep;
}

AnalysisReport run_analyze(const std::string& spec_path, int resolution, const std::string& output_path,
                           bool timestamp) {
    FieldSpec spec;
    try {
        spec = parse_field_spec(read_spec_file(spec_path));
    } catch (const SpecError& e) {
        throw WorkbenchError(e.what());
    }
    AnalyzeOptions o;
    o.resolution = resolution;
    o.timestamp = timestamp;
    AnalysisReport rep = analyze(make_subject(spec), o);
    write_text(output_path, dump(rep.json), std::cout);
    return rep;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Common {
    std::string field;
    std::string spec_file;
    std::string output;
    int resolution = 256;
    bool no_timestamp = false;
};

void add_common(CLI::App* sc, Common& c, bool with_field = true) {
    if (with_field) {
        sc->add_option("--field", c.field, "catalog name or full field spec");
        sc->add_option("--spec", c.spec_file, "field spec file");
    }
    sc->add_option("--output,-o", c.output, "output path (default stdout)");
    sc->add_option("--resolution", c.resolution, "grid resolution")->check(CLI::Range(16, 4096));
    sc->add_flag("--no-timestamp", c.no_timestamp, "omit the timestamp");
    sc->allow_extras();
}

/// "--key value" pairs left over by the parser become field parameters.
ParamMap extra_params(const std::vector<std::string>& extras) {
    ParamMap m;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& a = extras[i];
        if (a.rfind("--", 0) != 0 || a.size() < 3) throw WorkbenchError("unexpected argument '" + a + "'");
        std::string key = a.substr(2), value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key.resize(eq);
        } else {
            if (i + 1 >= extras.size()) throw WorkbenchError("parameter '" + a + "' needs a value");
            value = extras[++i];
        }
        try {
            m[key] = parse_number(value);
        } catch (const SpecError&) {
            throw WorkbenchError("unknown option '" + a + "'");
        }
    }
    return m;
}

FieldSpec resolve_spec(const Common& c, const std::vector<std::string>& extras) {
    FieldSpec spec;
    try {
        if (!c.spec_file.empty())
            spec = parse_field_spec(read_spec_file(c.spec_file));
        else if (c.field.find('=') != std::string::npos)
            spec = parse_field_spec(c.field);
        else if (!c.field.empty())
            spec.name = c.field;
        else
            throw WorkbenchError("need --field or --spec");
    } catch (const SpecError& e) {
        throw WorkbenchError(e.what());
    }
    for (const auto& [k, v] : extra_params(extras)) spec.params[k] = v;
    return spec;
}

struct Solve {
    SemilinearProblem problem;
    std::string canonical;
    double psi0 = 1.0;
    double guess_amplitude = 1.0, guess_power = 2.0;
    DiskOptions disk;
};

/// F catalog for the solve subcommand.
std::function<double(double)> flux_by_name(const std::string& id, const ParamMap& p, std::string& formula) {
    const double c0 = param_or(p, "c0", 0.0), c1 = param_or(p, "c1", 1.0);
    std::ostringstream os;
    os.precision(17);
    if (id == "bessel") {
        const double j2 = kBesselJ0Zero1 * kBesselJ0Zero1;
        formula = "-j01^2 s";
        return [j2](double s) { return -j2 * s; };
    }
    if (id == "sqrt") {
        const double a = param_or(p, "c0", 8.0), b = param_or(p, "c1", 16.0);
        os << a << " - " << b << " sqrt(s)";
        formula = os.str();
        return [a, b](double s) { return a - b * std::sqrt(s); };
    }
    if (id == "linear") {
        os << c0 << " + " << c1 << " s";
        formula = os.str();
        return [c0, c1](double s) { return c0 + c1 * s; };
    }
    if (id == "power") {
        const double q = param_or(p, "q", 2.5);
        os << c0 << " + " << c1 << " s^" << q;
        formula = os.str();
        return [c0, c1, q](double s) { return c0 + c1 * std::pow(s, q); };
    }
    throw WorkbenchError("unknown nonlinearity '" + id + "' (bessel, sqrt, linear, power)");
}

/// Keys: F (bessel|sqrt|linear|power) or table (CSV s,F), params, domain,
/// boundary, mode (newton|radial), psi0, guess, guess_power, radii, angles.
Solve parse_solve(const std::string& text) {
    Solve s;
    std::string F_id, table;
    ParamMap params;
    FieldSpec dom;
    s.problem.mode = SolveMode::DiskNewton;
    try {
        for (const auto& [k, v] : split_spec_entries(text)) {
            if (k == "F") {
                F_id = v;
            } else if (k == "table") {
                table = v;
            } else if (k == "params") {
                for (const auto& [pk, pv] : parse_spec_map(v)) params[pk] = parse_number(pv);
            } else if (k == "domain") {
                for (const auto& [dk, dv] : parse_spec_map(v)) {
                    if (dk == "kind")
                        dom.domain_kind = dv;
                    else
                        dom.domain_params[dk] = parse_number(dv);
                }
            } else if (k == "boundary") {
                s.problem.boundary_value = parse_number(v);
            } else if (k == "mode") {
                if (v == "newton")
                    s.problem.mode = SolveMode::DiskNewton;
                else if (v == "radial")
                    s.problem.mode = SolveMode::RadialShoot;
                else
                    throw WorkbenchError("mode must be newton or radial");
            } else if (k == "psi0") {
                s.psi0 = parse_number(v);
            } else if (k == "guess") {
                s.guess_amplitude = parse_number(v);
            } else if (k == "guess_power") {
                s.guess_power = parse_number(v);
            } else if (k == "radii") {
                s.disk.radii = static_cast<int>(parse_number(v));
            } else if (k == "angles") {
                s.disk.angles = static_cast<int>(parse_number(v));
            } else {
                throw WorkbenchError("unknown solve key '" + k + "'");
            }
        }
        if (!dom.domain_kind.empty()) s.problem.domain = *spec_domain(dom);
    } catch (const SpecError& e) {
        throw WorkbenchError(e.what());
    }
    if (s.problem.domain.kind() != DomainKind::Disk) throw WorkbenchError("solve needs a disk domain");
    if (F_id.empty() == table.empty()) throw WorkbenchError("solve needs exactly one of F or table");
    if (!F_id.empty()) {
        s.problem.F = flux_by_name(F_id, params, s.problem.formula);
    } else {
        std::vector<std::pair<double, double>> rows;
        for (const auto& row : read_table_blocks(table).front()) {
            if (row.size() != 2) throw WorkbenchError("table rows need s F");
            rows.emplace_back(row[0], row[1]);
        }
        std::sort(rows.begin(), rows.end());
        if (rows.size() < 2) throw WorkbenchError("table needs at least two rows");
        s.problem.formula = "table:" + table;
        s.problem.F = [rows](double x) {
            auto it = std::lower_bound(rows.begin(), rows.end(), std::make_pair(x, -std::numeric_limits<double>::infinity()));
            if (it == rows.begin()) ++it;
            if (it == rows.end()) --it;
            const auto& [x1, y1] = *it;
            const auto& [x0, y0] = *(it - 1);
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        };
    }
    FieldSpec canon;
    canon.name = F_id.empty() ? "table" : F_id;
    canon.params = params;
    canon.domain_kind = "disk";
    canon.domain_params = {{"cx", s.problem.domain.center().x},
                           {"cy", s.problem.domain.center().y},
                           {"r", s.problem.domain.radius()}};
    std::ostringstream os;
    os << canon.canonical() << "; boundary=" << format_number(s.problem.boundary_value) << "; mode=" << to_string(s.problem.mode);
    s.canonical = os.str();
    return s;
}

int cmd_bracket(const Common& c, const std::vector<std::string>& extras, const std::string& g_text,
                const std::string& scheme, std::ostream& out) {
    const Subject s = make_subject(resolve_spec(c, extras));
    FieldPtr g;
    std::string g_name = "laplacian";
    if (!g_text.empty()) {
        FieldSpec gs;
        try {
            gs = g_text.find('=') != std::string::npos ? parse_field_spec(g_text) : FieldSpec{g_text, {}, {}, {}};
        } catch (const SpecError& e) {
            throw WorkbenchError(e.what());
        }
        g = make_subject(gs).field;
        g_name = gs.canonical();
    }
    GridSpec spec = grid_for(s.field->domain(), c.resolution, c.resolution);
    std::vector<double> res;
    std::vector<std::uint8_t> include;
    std::string scheme_name;
    if (scheme == "fd") {
        const GridPtr gf = sample_grid(*s.field, c.resolution, c.resolution);
        const GridPtr gg = g ? sample_grid(*g, c.resolution, c.resolution) : fd::laplacian(*gf);
        spec = gf->spec();
        res = fd::bracket(*gf, *gg)->values();
        include = fd::interior_mask(*gf);
        scheme_name = "fd6-centered";
    } else if (scheme == "exact") {
        const FieldPtr op = poisson_bracket(s.field, g ? g : FieldPtr(laplacian(s.field)));
        res.assign(spec.size(), 0.0);
        include.assign(spec.size(), 0);
        kernels::for_each_node(spec, [&](int i, int j) {
            const Point p = spec.node(i, j);
            if (!s.field->domain().contains(p) || (s.region && !s.region(p))) return;
            res[spec.index(i, j)] = op->value(p);
            include[spec.index(i, j)] = 1;
        });
        scheme_name = "taylor-jet-exact";
    } else {
        throw WorkbenchError("scheme must be exact or fd");
    }
    for (std::size_t k = 0; k < res.size(); ++k)
        if (include[k] && !std::isfinite(res[k])) include[k] = 0;
    const auto n = kernels::norms(spec, res, include);
    Json j = report_header("bracket", s.spec.canonical(), c.resolution, Json::object(), !c.no_timestamp);
    j["field"] = s.field->name();
    j["g"] = g_name;
    j["scheme"] = scheme_name;
    j["sup_residual"] = n.sup;
    j["l2_residual"] = n.l2;
    j["nodes"] = n.count;
    write_text(c.output, dump(j), out);
    return kExitOk;
}

int cmd_residual(const Common& c, const std::vector<std::string>& extras, double tol_steady, std::ostream& out) {
    const Subject s = make_subject(resolve_spec(c, extras));
    ResidualOptions ro;
    ro.resolution = c.resolution;
    ro.region = s.region;
    const ResidualReport r = steady_residual(s.field, ro);
    Json j = report_header("residual", s.spec.canonical(), c.resolution, {{"steady", tol_steady}}, !c.no_timestamp);
    merge(j, to_json(r));
    j["steady"] = r.sup <= tol_steady;
    write_text(c.output, dump(j), out);
    return kExitOk;
}

int cmd_critical(const Common& c, const std::vector<std::string>& extras, double tol_degree, std::ostream& out) {
    const Subject s = make_subject(resolve_spec(c, extras));
    CriticalSetOptions co;
    co.resolution = c.resolution;
    co.tol_degree = tol_degree;
    const CriticalSetReport r = find_critical_set(*s.field, co);
    Json j = report_header("critical-set", s.spec.canonical(), c.resolution, {{"degree", r.tol_degree}},
                           !c.no_timestamp);
    merge(j, to_json(r, *s.field));
    const RegionDecomposition d = innermost_loop(r, s.field->domain());
    j["decomposition"] = decomposition_json(d);
    Json rad = Json::array();
    for (const auto& v : detect_local_radiality(*s.field, d))
        rad.push_back({{"cell", v.cell},
                       {"tested", v.tested},
                       {"radial", v.radial},
                       {"center", point_json(v.center)},
                       {"spread", v.spread},
                       {"tolerance", v.tolerance},
                       {"circles", v.circles},
                       {"note", v.note}});
    j["radiality"] = rad;
    write_text(c.output, dump(j), out);
    return kExitOk;
}

int cmd_flux(const Common& c, const std::vector<std::string>& extras, int levels, double window, std::ostream& out) {
    const Subject s = make_subject(resolve_spec(c, extras));
    FluxAnalysisOptions o = s.flux;
    o.resolution = c.resolution;
    o.levels = levels;
    o.window = window;
    const FluxAnalysis fa = analyze_flux(s.field, o);
    Json tol = {{"branch", fa.relation.tol_branch}, {"fit", PuiseuxOptions{}.tol_fit}, {"window", window}};
    Json j = report_header("flux", s.spec.canonical(), c.resolution, tol, !c.no_timestamp);
    merge(j, to_json(fa));
    write_text(c.output, dump(j), out);
    return kExitOk;
}

int cmd_solve(const Common& c, const std::string& problem_file, const std::string& grid_path, std::ostream& out) {
    const Solve s = parse_solve(read_spec_file(problem_file));
    const Domain& dom = s.problem.domain;
    Json j = report_header("solve", s.canonical, c.resolution, {{"newton", s.disk.tol}}, !c.no_timestamp);
    j["formula"] = s.problem.formula;
    FieldPtr field;
    bool ok = true;
    if (s.problem.mode == SolveMode::RadialShoot) {
        const RadialProfile p = solve_radial(s.problem, s.psi0, dom.radius());
        field = radial_field(p, dom, "radial-solution");
        j["method"] = "radial-shoot";
        j["psi0"] = s.psi0;
        j["psi_R"] = p.psi_R;
        j["dpsi_R"] = p.dpsi_R;
        j["steps"] = p.steps;
        j["boundary_defect"] = std::abs(p.psi_R - s.problem.boundary_value);
    } else {
        const Point c0 = dom.center();
        const double R = dom.radius(), amp = s.guess_amplitude, q = s.guess_power, bv = s.problem.boundary_value;
        const DiskSolution d = solve_disk_newton(
            s.problem,
            [=](Point p) {
                const double r2 = (dot(p - c0, p - c0)) / (R * R);
                return bv + amp * std::pow(std::max(0.0, 1.0 - r2), q);
            },
            s.disk);
        field = d.field;
        ok = d.converged;
        j["method"] = d.method;
        j["iterations"] = d.iterations;
        j["converged"] = d.converged;
        j["residual"] = d.residual;
        j["export_error"] = d.export_error;
        j["history"] = d.history;
        if (!d.note.empty()) j["note"] = d.note;
    }
    if (!grid_path.empty()) {
        std::ostringstream os;
        sample_grid(*field, c.resolution, c.resolution)->write_csv(os);
        write_text(grid_path, os.str(), out);
        j["grid"] = grid_path;
    }
    write_text(c.output, dump(j), out);
    return ok ? kExitOk : kExitInconclusive;
}

int cmd_moving_plane(const Common& c, const std::vector<std::string>& extras, int directions,
                     const std::string& region_arg, std::ostream& out) {
    const Subject s = make_subject(resolve_spec(c, extras));
    std::optional<Region> region;
    if (region_arg == "auto") {
        region = s.mp_region;
        if (!region) throw WorkbenchError("no moving-plane region for a periodic domain; pass --region FILE");
    } else {
        region.emplace(region_from_file(region_arg));
    }
    SweepOptions so;
    so.resolution = std::min(c.resolution, 256);
    const MovingPlaneReport r = moving_plane(s.field, *region, directions, so);
    Json tol = {{"monotone", so.tol_mp}, {"symmetric", 1e-6}, {"center", 1e-6}, {"lambda", 1e-8}};
    Json j = report_header("moving-plane", s.spec.canonical(), so.resolution, tol, !c.no_timestamp);
    j["region"] = region_arg;
    merge(j, to_json(r));
    write_text(c.output, dump(j), out);
    return kExitOk;
}

int cmd_counterexample(const Common& c, const std::string& curve_kind, const std::string& file, double a, double b,
                       double radius, double delta, const std::string& orders, const std::string& grid_path,
                       const std::string& coef_path, std::ostream& out) {
    int Nn = 16, Ns = 0;
    if (!orders.empty()) {
        const auto comma = orders.find(',');
        try {
            Nn = static_cast<int>(parse_number(orders.substr(0, comma)));
            if (comma != std::string::npos) Ns = static_cast<int>(parse_number(orders.substr(comma + 1)));
        } catch (const SpecError&) {
            throw WorkbenchError("--orders expects Nn,Ns");
        }
        if (Nn < 2 || Ns < 0) throw WorkbenchError("--orders expects Nn >= 2, Ns >= 0");
    }
    std::ostringstream desc;
    std::optional<JordanCurve> curve;
    if (curve_kind == "circle") {
        curve = JordanCurve::circle({0.0, 0.0}, radius);
        desc << "curve=circle; r=" << format_number(radius);
    } else if (curve_kind == "ellipse") {
        curve = JordanCurve::ellipse(a, b);
        desc << "curve=ellipse; a=" << format_number(a) << "; b=" << format_number(b);
    } else if (curve_kind == "fourier-file") {
        if (file.empty()) throw WorkbenchError("--curve fourier-file needs --file");
        curve = fourier_curve_from_file(file);
        desc << "curve=fourier; file-hash=" << spec_hash(read_file(file));
    } else {
        throw WorkbenchError("--curve must be circle, ellipse or fourier-file");
    }
    desc << "; delta=" << format_number(delta) << "; orders=" << Nn << "," << Ns;
    const ChartPtr chart = build_fermi_chart(*curve, delta);
    const TubeSeriesSolution sol = solve_tube_series(*chart, Nn, Ns);
    const FieldPtr psi = export_field(sol, chart);
    const TubeResidual r = tube_residual(*psi, *chart);
    Json j = report_header("counterexample", desc.str(), c.resolution, {{"pde", 1e-6}, {"c2", 1e-12}},
                           !c.no_timestamp);
    j["series"] = series_json(sol, *chart);
    j["residual"] = {{"interior", r.interior},
                     {"exterior", r.exterior},
                     {"outer_zone", r.outer_zone},
                     {"boundary_psi", r.boundary_psi},
                     {"boundary_dn", r.boundary_dn},
                     {"chart_error", r.chart_error},
                     {"samples", r.samples}};
    j["norms"] = Json::array();
    for (int k = 0; k <= sol.Nn; ++k) j["norms"].push_back(sol.coefficient_norm(k));
    if (!grid_path.empty()) {
        std::ostringstream os;
        sample_grid(*psi, c.resolution, c.resolution)->write_csv(os);
        write_text(grid_path, os.str(), out);
        j["grid"] = grid_path;
    }
    if (!coef_path.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << "k";
        for (int m = 0; m <= sol.Ns; ++m) os << ",a" << m;
        for (int m = 1; m <= sol.Ns; ++m) os << ",b" << m;
        os << "\n";
        for (int k = 0; k <= sol.Nn; ++k) {
            os << k;
            for (int m = 0; m <= sol.Ns; ++m) os << "," << sol.a[k][m];
            for (int m = 1; m <= sol.Ns; ++m) os << "," << sol.b[k][m];
            os << "\n";
        }
        write_text(coef_path, os.str(), out);
        j["coefficients"] = coef_path;
    }
    write_text(c.output, dump(j), out);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Steady Euler workbench", "sew"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common c;
    std::string g_text, scheme = "exact", region = "auto", curve = "ellipse", file, orders, grid, coefs, problem;
    int levels = 64, directions = 16;
    double window = 0.1, tol_steady = 1e-6, tol_degree = -1.0, a = 1.3, b = 0.8, radius = 1.0, delta = 0.2;
    double tol_verify = 1e-5;

    auto* bracket = app.add_subcommand("bracket", "Poisson bracket {f, g} (g defaults to the Laplacian)");
    add_common(bracket, c);
    bracket->add_option("--g", g_text, "second field");
    bracket->add_option("--scheme", scheme, "exact or fd");

    auto* residual = app.add_subcommand("residual", "steady residual {psi, Delta psi}");
    add_common(residual, c);
    residual->add_option("--tol", tol_steady, "steady threshold");

    auto* critical = app.add_subcommand("critical-set", "critical points, curves and region decomposition");
    add_common(critical, c);
    critical->add_option("--tol-degree", tol_degree, "relative degree tolerance");

    auto* flux = app.add_subcommand("flux", "flux function, branch table and Puiseux fits");
    add_common(flux, c);
    flux->add_option("--levels", levels, "contour levels")->check(CLI::Range(16, 4096));
    flux->add_option("--endpoint-window", window, "endpoint window fraction")->check(CLI::Range(1e-6, 0.5));

    auto* solve = app.add_subcommand("solve", "solve Delta psi = F(psi) on a disk");
    add_common(solve, c, false);
    solve->add_option("problem", problem, "problem spec file")->required();
    solve->add_option("--grid", grid, "grid CSV output");

    auto* mp = app.add_subcommand("moving-plane", "moving-plane sweep and symmetry verdict");
    add_common(mp, c);
    mp->add_option("--directions", directions, "sweep directions")->check(CLI::Range(1, 1024));
    mp->add_option("--region", region, "auto or a boundary polyline file");

    auto* cx = app.add_subcommand("counterexample", "tube series around a Jordan curve");
    add_common(cx, c, false);
    cx->add_option("--curve", curve, "circle, ellipse or fourier-file");
    cx->add_option("--file", file, "fourier coefficient file (rows j cx sx cy sy)");
    cx->add_option("--a", a, "ellipse semi-axis along x");
    cx->add_option("--b", b, "ellipse semi-axis along y");
    cx->add_option("--radius", radius, "circle radius");
    cx->add_option("--delta", delta, "tube half-width");
    cx->add_option("--orders", orders, "Nn,Ns (Ns = 0 picks automatically)");
    cx->add_option("--grid", grid, "field grid CSV output");
    cx->add_option("--coefficients", coefs, "coefficient CSV output");

    auto* an = app.add_subcommand("analyze", "full pipeline with final classification (analyze [SPEC_FILE])");
    add_common(an, c);
    an->add_option("--levels", levels, "contour levels")->check(CLI::Range(16, 4096));
    an->add_option("--directions", directions, "sweep directions")->check(CLI::Range(1, 1024));
    an->add_option("--tol-steady", tol_steady, "steady threshold");
    an->add_option("--tol-verify", tol_verify, "flux verification threshold");

    if (args.empty()) {
        err << app.help();
        return kExitUsage;
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*bracket) return cmd_bracket(c, bracket->remaining(), g_text, scheme, out);
        if (*residual) return cmd_residual(c, residual->remaining(), tol_steady, out);
        if (*critical) return cmd_critical(c, critical->remaining(), tol_degree, out);
        if (*flux) return cmd_flux(c, flux->remaining(), levels, window, out);
        if (*solve) {
            if (!solve->remaining().empty()) throw WorkbenchError("unexpected argument '" + solve->remaining()[0] + "'");
            return cmd_solve(c, problem, grid, out);
        }
        if (*mp) return cmd_moving_plane(c, mp->remaining(), directions, region, out);
        if (*cx) {
            if (!cx->remaining().empty()) throw WorkbenchError("unexpected argument '" + cx->remaining()[0] + "'");
            return cmd_counterexample(c, curve, file, a, b, radius, delta, orders, grid, coefs, out);
        }
        if (*an) {
            AnalyzeOptions o;
            o.resolution = c.resolution;
            o.levels = levels;
            o.directions = directions;
            o.tol_steady = tol_steady;
            o.tol_verify = tol_verify;
            o.timestamp = !c.no_timestamp;
            // A leading bare argument is the spec file.
            std::vector<std::string> extras = an->remaining();
            if (!extras.empty() && extras.front().rfind("-", 0) != 0) {
                c.spec_file = extras.front();
                extras.erase(extras.begin());
            }
            const AnalysisReport rep = analyze(make_subject(resolve_spec(c, extras)), o);
            write_text(c.output, dump(rep.json), out);
            return rep.exit_code;
        }
    } catch (const WorkbenchError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SpecError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace sew
