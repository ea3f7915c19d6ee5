#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homcl/bifurcation.hpp"
#include "homcl/errors.hpp"
#include "homcl/grid.hpp"
#include "homcl/linop.hpp"
#include "homcl/model.hpp"
#include "homcl/section6.hpp"

namespace homcl {

/// Model selector. The CLI can only build models whose parameters fit in a
/// JSON document; that means the Section 6 family (name = "section6", with
/// a(t) = a_scale * sech^2 t). Custom models carry arbitrary callbacks and
/// must be driven through the C++ or Python API instead — naming "custom"
/// in a config file is rejected with a pointer to that route.
struct ModelConfig {
    std::string name = "section6";
    double A = -1.0;
    double B = 0.0;
    double sigma = 2.0;
    double omega = 1.0;
    double a_scale = 2.0;  // a(t) = a_scale * sech^2(t)
};

struct GridConfig {
    double half_length = 20.0;
    int n_cells = 4000;
    BcKind bc = BcKind::projection;
};

struct LambdaWindowConfig {
    double lo = -3.0;
    double hi = -0.1;
    int n_scan = 40;
};

struct RegularityConfig {
    RegularityMode mode_plus = RegularityMode::positivity;
    RegularityMode mode_minus = RegularityMode::positivity;
    Eigen::MatrixXd C;  // empty means the default exchange matrix
};

struct ContinuationConfig {
    double epsilon = 1e-2;
    double step0 = 1e-2;
    double step_min = 1e-6;
    double step_max = 0.02;
    double norm_cap = 1e3;
    int max_steps = 50;
};

struct ToleranceConfig {
    double newton_tol = 1e-10;
    double rank_tol = 1e-5;
    double tol_axis = 1e-8;
    double tol_G = 1e-6;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats = {"json", "csv"};
};

struct RunConfig {
    ModelConfig model;
    GridConfig grid;
    LambdaWindowConfig lambda_window;
    RegularityConfig regularity;
    ContinuationConfig continuation;
    ToleranceConfig tolerances;
    OutputConfig output;
    int jobs = 1;
    std::uint64_t seed = 0xB1F0;

    /// Throws ConfigInvalid naming the offending field.
    void validate() const;
};

/// Strict parser: unknown keys are ConfigInvalid (they are always typos).
/// Regularity modes are spelled "a" | "b" | "c", boundary conditions
/// "projection" | "dirichlet_half". The parsed config is validated.
RunConfig parse_config(const nlohmann::json& j);

/// Reads and parses a JSON config file; IoFailure on unreadable paths,
/// ConfigInvalid on malformed JSON or invalid contents.
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& config);

const char* mode_letter(RegularityMode mode);
const char* bc_name(BcKind bc);

/// Instantiates the configured model (see ModelConfig on "custom").
HamiltonianModel make_model(const RunConfig& config);

Grid make_grid(const RunConfig& config);

/// The regularity matrix C actually used: the configured one, or the default
/// exchange pattern (antidiagonal ones) sized to the model when empty.
Eigen::MatrixXd effective_C(const RunConfig& config, const HamiltonianModel& m);

}  // namespace homcl
