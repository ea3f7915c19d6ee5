#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homcl/bifurcation.hpp"
#include "homcl/config.hpp"
#include "homcl/continuation.hpp"
#include "homcl/errors.hpp"
#include "homcl/linop.hpp"
#include "homcl/model.hpp"

namespace homcl {

/// Pipeline stages in execution order; each CLI verb runs a prefix.
enum class Stage {
    validate = 0,
    admissible = 1,
    scan = 2,
    kernel = 3,
    check = 4,
    branch = 5,
};

const char* stage_name(Stage s);

/// Maps a CLI verb ("validate", ..., "branch", or "all") to the last stage
/// it requests; ConfigInvalid for unknown verbs.
Stage stage_from_verb(const std::string& verb);

struct StageRecord {
    std::string name;
    bool requested = false;
    bool run = false;          // the stage actually executed
    bool completed = false;    // executed and its gate passed
    double wall_seconds = 0.0;
    std::string error;         // nonempty when the stage threw or its gate failed
    std::string skip_reason;   // nonempty when an upstream gate truncated it
};

struct RunReport {
    RunConfig config;
    ValidationReport validation;
    AdmissibilityReport admissibility;
    ScanResult scan;
    std::vector<double> candidates;
    std::vector<KernelData> kernels;           // one per candidate that yielded one
    std::vector<BifurcationReport> bifurcation;
    std::vector<Branch> branches;
    std::vector<StageRecord> stages;           // pipeline order, one per Stage

    /// True iff every requested stage ran to completion with its gate passed.
    bool ok() const;
};

/// Runs the pipeline through `last`: validate -> admissibility -> scan ->
/// kernel -> transversality/parity checks -> branch switch + continuation.
/// A failing gate records its reason and truncates the downstream stages
/// (their skip_reason says which gate stopped them); stage exceptions land
/// in StageRecord::error instead of propagating. `log`, when given,
/// receives one progress line per stage.
RunReport run_pipeline(const RunConfig& config, Stage last = Stage::branch,
                       std::ostream* log = nullptr);

/// Serializes the full report (config echo, per-stage records, validation
/// checks, margins, candidates, kernel metadata, bifurcation data, branch
/// summaries with per-point rows, wall times).
nlohmann::json report_to_json(const RunReport& report);

struct FileManifest {
    std::vector<std::string> files;  // paths as written, in write order
};

/// Writes the machine-readable outputs into `directory` (created if absent):
///   report.json                 when "json" is requested
///   sigma_min.csv               lambda,sigma_min profile of the scan
///   branch_<i>.csv              lambda,sup_norm,l2_norm,h1_norm,residual,
///                               gamma_plus,gamma_minus
///   solution_<i>_<j>.csv        t,x1,...,x2N for the first, largest-amplitude,
///                               and last point of branch i
/// All floats carry 17 significant digits with '.' decimal separator and \n
/// line endings. Throws IoFailure naming the path that failed.
FileManifest write_outputs(const RunReport& report, const std::string& directory,
                           const std::vector<std::string>& formats);

/// Shortest decimal form that round-trips a double (17 significant digits,
/// C locale).
std::string format_float(double v);

}  // namespace homcl
