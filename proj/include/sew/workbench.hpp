/// @file workbench.hpp
/// @brief The analysis pipeline (residual, critical set, flux, moving plane,
/// classification), JSON reports and the command-line front end.
///
/// Exit codes: 0 success, 1 usage or parse error, 2 non-steady input,
/// 3 inconclusive classification.
#pragma once

#include "sew/calculus.hpp"
#include "sew/counterexample.hpp"
#include "sew/critical_set.hpp"
#include "sew/field_spec.hpp"
#include "sew/flux.hpp"
#include "sew/moving_plane.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sew {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportSchema = 1;

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNonSteady = 2, kExitInconclusive = 3 };

using Json = nlohmann::ordered_json;

/// Bad input (spec, flags, files); maps to exit code 1.
class WorkbenchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// FNV-1a 64 of the text, as 16 hex digits.
std::string spec_hash(const std::string& text);

/// A field together with the regions and options the pipeline should use.
/// Catalog names go through catalog_field; "counterexample-circle"
/// (params r, delta, Nn, Ns) and "counterexample-ellipse" (a, b, delta, Nn,
/// Ns) build the tube series field.
struct Subject {
    FieldSpec spec;
    FieldPtr field;
    /// Evaluation region for residual and flux (|n| <= delta/2 on tubes).
    std::function<bool(Point)> region;
    ChartPtr chart;
    std::optional<TubeSeriesSolution> series;
    /// Region for the moving plane; empty on periodic domains.
    std::optional<Region> mp_region;
    /// Branch labels, known critical values and endpoint rays for tubes.
    FluxAnalysisOptions flux;
    /// Branch whose F drives the coefficient audit (tubes: the interior).
    std::optional<int> audit_branch;
};

Subject make_subject(const FieldSpec& spec);

enum class Classification { Radial, Semilinear, BranchDiscrepancy, Inconclusive };
std::string to_string(Classification c);

struct AnalyzeOptions {
    int resolution = 256;
    int levels = 64;
    int directions = 16;
    /// Steady threshold on the sup bracket residual.
    double tol_steady = 1e-6;
    /// Semilinear needs verify_flux_residual at most this.
    double tol_verify = 1e-5;
    bool timestamp = true;
};

struct AnalysisReport {
    ResidualReport residual;
    bool steady = false;
    std::optional<CriticalSetReport> critical;
    std::optional<FluxAnalysis> flux;
    std::optional<MovingPlaneReport> moving_plane;
    std::vector<Classification> classification;
    std::string reason;
    /// (stage, message) for stages that failed.
    std::vector<std::pair<std::string, std::string>> errors;
    int exit_code = kExitOk;
    Json json;

    bool has(Classification c) const;
};

AnalysisReport analyze(const Subject& subject, const AnalyzeOptions& opts = {});

/// Reads the spec file, analyzes, writes the JSON report (stdout when
/// output_path is empty or "-").
AnalysisReport run_analyze(const std::string& spec_path, int resolution, const std::string& output_path,
                           bool timestamp = true);

/// Common report header: tool, version, schema, command, spec, hash,
/// resolution, tolerances and (optionally) a UTC timestamp.
Json report_header(const std::string& command, const std::string& spec, int resolution, const Json& tolerances,
                   bool timestamp);

Json to_json(const ResidualReport& r);
Json to_json(const CriticalSetReport& r, const ScalarField& f, bool polylines = true);
Json to_json(const FluxAnalysis& fa);
Json to_json(const MovingPlaneReport& r, bool profiles = true);

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sew
