#include "homcl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace homcl {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw ConfigInvalid("config field '" + field + "': " + why, field);
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid(field, "must be positive and finite");
}

/// Rejects keys that are not in the allowed set; typos in config files
/// should fail loudly, not silently fall back to defaults.
void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
    if (!j.is_object())
        invalid(section.empty() ? "<root>" : section, "must be a JSON object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            invalid(section.empty() ? item.key() : section + "." + item.key(),
                    "unknown key");
}

double get_num(const json& j, const std::string& section, const std::string& key,
               double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) invalid(section + "." + key, "must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& section, const std::string& key,
            int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) invalid(section + "." + key, "must be an integer");
    return j.at(key).get<int>();
}

std::string get_str(const json& j, const std::string& section, const std::string& key,
                    const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) invalid(section + "." + key, "must be a string");
    return j.at(key).get<std::string>();
}

RegularityMode parse_mode(const std::string& s, const std::string& field) {
    if (s == "a") return RegularityMode::positivity;
    if (s == "b") return RegularityMode::linear;
    if (s == "c") return RegularityMode::autonomous;
    invalid(field, "must be one of \"a\", \"b\", \"c\" (got \"" + s + "\")");
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) invalid(field, "must be a non-empty array of rows");
    const int rows = static_cast<int>(j.size());
    int cols = -1;
    Eigen::MatrixXd M;
    for (int r = 0; r < rows; ++r) {
        const json& row = j.at(r);
        if (!row.is_array()) invalid(field, "rows must be arrays");
        if (cols < 0) {
            cols = static_cast<int>(row.size());
            M.resize(rows, cols);
        }
        if (static_cast<int>(row.size()) != cols) invalid(field, "ragged rows");
        for (int c = 0; c < cols; ++c) {
            if (!row.at(c).is_number()) invalid(field, "entries must be numbers");
            M(r, c) = row.at(c).get<double>();
        }
    }
    return M;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

void RunConfig::validate() const {
    if (model.name != "section6" && model.name != "custom")
        invalid("model.name", "unknown model \"" + model.name + "\"");
    if (model.name == "custom")
        invalid("model.name",
                "custom models carry callbacks and cannot be described in JSON; "
                "construct them through the C++ or Python API");
    if (model.A > 0.0) invalid("model.A", "Section 6 requires A <= 0");
    if (model.sigma < 1.0) invalid("model.sigma", "Section 6 requires sigma >= 1");
    if (!(model.a_scale > 0.0)) invalid("model.a_scale", "must be positive");

    require_positive(grid.half_length, "grid.half_length");
    if (grid.n_cells < 100) invalid("grid.n_cells", "must be at least 100");

    if (!(lambda_window.lo < lambda_window.hi))
        invalid("lambda_window.lo", "must satisfy lo < hi");
    if (lambda_window.n_scan < 10) invalid("lambda_window.n_scan", "must be at least 10");

    if (regularity.C.size() != 0) {
        if (regularity.C.rows() != regularity.C.cols())
            invalid("regularity.C", "must be square");
        const bool needs_symmetric =
            regularity.mode_plus == RegularityMode::positivity ||
            regularity.mode_minus == RegularityMode::positivity;
        if (needs_symmetric &&
            (regularity.C - regularity.C.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            invalid("regularity.C", "must be symmetric when a mode-a check is requested");
    }

    require_positive(continuation.step0, "continuation.step0");
    require_positive(continuation.step_min, "continuation.step_min");
    require_positive(continuation.step_max, "continuation.step_max");
    if (continuation.step_min > continuation.step_max)
        invalid("continuation.step_min", "must not exceed step_max");
    require_positive(continuation.norm_cap, "continuation.norm_cap");
    if (continuation.max_steps < 1) invalid("continuation.max_steps", "must be at least 1");
    if (continuation.epsilon == 0.0 || !std::isfinite(continuation.epsilon))
        invalid("continuation.epsilon", "must be nonzero and finite");

    require_positive(tolerances.newton_tol, "tolerances.newton_tol");
    require_positive(tolerances.rank_tol, "tolerances.rank_tol");
    require_positive(tolerances.tol_axis, "tolerances.tol_axis");
    require_positive(tolerances.tol_G, "tolerances.tol_G");

    if (output.directory.empty()) invalid("output.directory", "must not be empty");
    for (const auto& f : output.formats)
        if (f != "json" && f != "csv")
            invalid("output.formats", "unknown format \"" + f + "\"");
    if (jobs < 1) invalid("jobs", "must be at least 1");
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    check_keys(j, "", {"model", "grid", "lambda_window", "regularity", "continuation",
                       "tolerances", "output", "jobs", "seed"});

    if (j.contains("model")) {
        const json& s = j.at("model");
        check_keys(s, "model", {"name", "A", "B", "sigma", "omega", "a_scale"});
        c.model.name = get_str(s, "model", "name", c.model.name);
        c.model.A = get_num(s, "model", "A", c.model.A);
        c.model.B = get_num(s, "model", "B", c.model.B);
        c.model.sigma = get_num(s, "model", "sigma", c.model.sigma);
        c.model.omega = get_num(s, "model", "omega", c.model.omega);
        c.model.a_scale = get_num(s, "model", "a_scale", c.model.a_scale);
    }
    if (j.contains("grid")) {
        const json& s = j.at("grid");
        check_keys(s, "grid", {"half_length", "n_cells", "bc_kind"});
        c.grid.half_length = get_num(s, "grid", "half_length", c.grid.half_length);
        c.grid.n_cells = get_int(s, "grid", "n_cells", c.grid.n_cells);
        const std::string bc = get_str(s, "grid", "bc_kind", "projection");
        if (bc == "projection")
            c.grid.bc = BcKind::projection;
        else if (bc == "dirichlet_half")
            c.grid.bc = BcKind::dirichlet_half;
        else
            invalid("grid.bc_kind", "must be \"projection\" or \"dirichlet_half\"");
    }
    if (j.contains("lambda_window")) {
        const json& s = j.at("lambda_window");
        check_keys(s, "lambda_window", {"lo", "hi", "n_scan"});
        c.lambda_window.lo = get_num(s, "lambda_window", "lo", c.lambda_window.lo);
        c.lambda_window.hi = get_num(s, "lambda_window", "hi", c.lambda_window.hi);
        c.lambda_window.n_scan = get_int(s, "lambda_window", "n_scan", c.lambda_window.n_scan);
    }
    if (j.contains("regularity")) {
        const json& s = j.at("regularity");
        check_keys(s, "regularity", {"mode_plus", "mode_minus", "C_matrix"});
        c.regularity.mode_plus =
            parse_mode(get_str(s, "regularity", "mode_plus", "a"), "regularity.mode_plus");
        c.regularity.mode_minus =
            parse_mode(get_str(s, "regularity", "mode_minus", "a"), "regularity.mode_minus");
        if (s.contains("C_matrix"))
            c.regularity.C = parse_matrix(s.at("C_matrix"), "regularity.C_matrix");
    }
    if (j.contains("continuation")) {
        const json& s = j.at("continuation");
        check_keys(s, "continuation",
                   {"epsilon", "step0", "step_min", "step_max", "norm_cap", "max_steps"});
        c.continuation.epsilon = get_num(s, "continuation", "epsilon", c.continuation.epsilon);
        c.continuation.step0 = get_num(s, "continuation", "step0", c.continuation.step0);
        c.continuation.step_min =
            get_num(s, "continuation", "step_min", c.continuation.step_min);
        c.continuation.step_max =
            get_num(s, "continuation", "step_max", c.continuation.step_max);
        c.continuation.norm_cap =
            get_num(s, "continuation", "norm_cap", c.continuation.norm_cap);
        c.continuation.max_steps =
            get_int(s, "continuation", "max_steps", c.continuation.max_steps);
    }
    if (j.contains("tolerances")) {
        const json& s = j.at("tolerances");
        check_keys(s, "tolerances", {"newton_tol", "rank_tol", "tol_axis", "tol_G"});
        c.tolerances.newton_tol =
            get_num(s, "tolerances", "newton_tol", c.tolerances.newton_tol);
        c.tolerances.rank_tol = get_num(s, "tolerances", "rank_tol", c.tolerances.rank_tol);
        c.tolerances.tol_axis = get_num(s, "tolerances", "tol_axis", c.tolerances.tol_axis);
        c.tolerances.tol_G = get_num(s, "tolerances", "tol_G", c.tolerances.tol_G);
    }
    if (j.contains("output")) {
        const json& s = j.at("output");
        check_keys(s, "output", {"directory", "formats"});
        c.output.directory = get_str(s, "output", "directory", c.output.directory);
        if (s.contains("formats")) {
            if (!s.at("formats").is_array()) invalid("output.formats", "must be an array");
            c.output.formats.clear();
            for (const auto& f : s.at("formats")) {
                if (!f.is_string()) invalid("output.formats", "entries must be strings");
                c.output.formats.push_back(f.get<std::string>());
            }
        }
    }
    c.jobs = get_int(j, "", "jobs", c.jobs);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            invalid("seed", "must be a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }

    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot read config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what(), "<json>");
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    j["model"] = {{"name", c.model.name},   {"A", c.model.A},
                  {"B", c.model.B},         {"sigma", c.model.sigma},
                  {"omega", c.model.omega}, {"a_scale", c.model.a_scale}};
    j["grid"] = {{"half_length", c.grid.half_length},
                 {"n_cells", c.grid.n_cells},
                 {"bc_kind", bc_name(c.grid.bc)}};
    j["lambda_window"] = {{"lo", c.lambda_window.lo},
                          {"hi", c.lambda_window.hi},
                          {"n_scan", c.lambda_window.n_scan}};
    j["regularity"] = {{"mode_plus", mode_letter(c.regularity.mode_plus)},
                       {"mode_minus", mode_letter(c.regularity.mode_minus)}};
    if (c.regularity.C.size() != 0)
        j["regularity"]["C_matrix"] = matrix_to_json(c.regularity.C);
    j["continuation"] = {{"epsilon", c.continuation.epsilon},
                         {"step0", c.continuation.step0},
                         {"step_min", c.continuation.step_min},
                         {"step_max", c.continuation.step_max},
                         {"norm_cap", c.continuation.norm_cap},
                         {"max_steps", c.continuation.max_steps}};
    j["tolerances"] = {{"newton_tol", c.tolerances.newton_tol},
                       {"rank_tol", c.tolerances.rank_tol},
                       {"tol_axis", c.tolerances.tol_axis},
                       {"tol_G", c.tolerances.tol_G}};
    j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
    j["jobs"] = c.jobs;
    j["seed"] = c.seed;
    return j;
}

const char* mode_letter(RegularityMode mode) {
    switch (mode) {
        case RegularityMode::positivity: return "a";
        case RegularityMode::linear: return "b";
        case RegularityMode::autonomous: return "c";
    }
    return "?";
}

const char* bc_name(BcKind bc) {
    return bc == BcKind::projection ? "projection" : "dirichlet_half";
}

HamiltonianModel make_model(const RunConfig& config) {
    config.validate();
    Section6Params p;
    p.A = config.model.A;
    p.B = config.model.B;
    p.sigma = config.model.sigma;
    p.omega = config.model.omega;
    const double scale = config.model.a_scale;
    p.a_profile = [scale](double t) {
        const double s = 1.0 / std::cosh(t);
        return scale * s * s;
    };
    return make_section6_model(p);
}

Grid make_grid(const RunConfig& config) {
    return Grid::uniform(config.grid.half_length, config.grid.n_cells);
}

Eigen::MatrixXd effective_C(const RunConfig& config, const HamiltonianModel& m) {
    if (config.regularity.C.size() != 0) return config.regularity.C;
    const int d = m.dim();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) C(i, d - 1 - i) = 1.0;
    return C;
}

}  // namespace homcl
