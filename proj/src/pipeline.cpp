#include "homcl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace homcl {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

struct StageClock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

}  // namespace

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::validate: return "validate";
        case Stage::admissible: return "admissible";
        case Stage::scan: return "scan";
        case Stage::kernel: return "kernel";
        case Stage::check: return "check";
        case Stage::branch: return "branch";
    }
    return "unknown";
}

Stage stage_from_verb(const std::string& verb) {
    if (verb == "validate") return Stage::validate;
    if (verb == "admissible") return Stage::admissible;
    if (verb == "scan") return Stage::scan;
    if (verb == "kernel") return Stage::kernel;
    if (verb == "check") return Stage::check;
    if (verb == "branch" || verb == "all") return Stage::branch;
    throw ConfigInvalid("unknown verb \"" + verb + "\"", "verb");
}

bool RunReport::ok() const {
    for (const auto& s : stages)
        if (s.requested && !s.completed) return false;
    return true;
}

RunReport run_pipeline(const RunConfig& config, Stage last, std::ostream* log) {
    config.validate();
    RunReport report;
    report.config = config;

    constexpr int n_stages = 6;
    report.stages.resize(n_stages);
    for (int i = 0; i < n_stages; ++i) {
        report.stages[i].name = stage_name(static_cast<Stage>(i));
        report.stages[i].requested = i <= static_cast<int>(last);
    }

    const HamiltonianModel model = make_model(config);
    const Grid grid = make_grid(config);
    std::string gate_failure;  // nonempty once a gate stops the pipeline

    auto run_stage = [&](Stage stage, auto&& body) {
        StageRecord& rec = report.stages[static_cast<int>(stage)];
        if (!rec.requested) return;
        if (!gate_failure.empty()) {
            rec.skip_reason = gate_failure;
            if (log) *log << "[" << rec.name << "] skipped: " << rec.skip_reason << "\n";
            return;
        }
        StageClock clock;
        rec.run = true;
        try {
            body(rec);
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        rec.wall_seconds = clock.seconds();
        rec.completed = rec.error.empty();
        if (!rec.completed)
            gate_failure = "stage '" + rec.name + "' failed: " + rec.error;
        if (log)
            *log << "[" << rec.name << "] "
                 << (rec.completed ? "ok" : "FAILED: " + rec.error) << "  ("
                 << rec.wall_seconds << " s)\n";
    };

    run_stage(Stage::validate, [&](StageRecord&) {
        ValidationOptions vopts;
        vopts.seed = config.seed;
        report.validation = validate_hypotheses(model, vopts);
        if (!report.validation.all_passed) {
            for (const auto& c : report.validation.checks)
                if (!c.passed)
                    throw ValidationFailed("hypothesis check '" + c.tag + "' failed: " +
                                               c.detail,
                                           c.tag);
        }
    });

    run_stage(Stage::admissible, [&](StageRecord&) {
        AdmissibilityOptions aopts;
        aopts.mode_plus = config.regularity.mode_plus;
        aopts.mode_minus = config.regularity.mode_minus;
        aopts.C = effective_C(config, model);
        aopts.samples.seed = config.seed;
        aopts.tol_axis = config.tolerances.tol_axis;
        aopts.jobs = config.jobs;
        report.admissibility = admissibility(model, config.lambda_window.lo,
                                             config.lambda_window.hi, aopts);
        if (!report.admissibility.admissible)
            throw ValidationFailed(
                "lambda window [" + std::to_string(config.lambda_window.lo) + ", " +
                    std::to_string(config.lambda_window.hi) +
                    "] is not admissible (a hyperbolicity or regularity margin is "
                    "nonpositive)",
                "admissibility");
    });

    run_stage(Stage::scan, [&](StageRecord&) {
        ScanOptions sopts;
        sopts.tol_axis = config.tolerances.tol_axis;
        sopts.jobs = config.jobs;
        sopts.seed = config.seed;
        report.scan = scan_bifurcations(model, config.lambda_window.lo,
                                        config.lambda_window.hi,
                                        config.lambda_window.n_scan, grid,
                                        config.grid.bc, sopts);
        for (const auto& c : report.scan.candidates)
            report.candidates.push_back(c.lambda0);
        if (report.candidates.empty())
            throw ValidationFailed("no bifurcation candidates found in the window",
                                   "scan");
    });

    run_stage(Stage::kernel, [&](StageRecord&) {
        std::string problems;
        for (double lambda0 : report.candidates) {
            try {
                report.kernels.push_back(kernel_basis(model, lambda0, grid,
                                                      config.grid.bc,
                                                      config.tolerances.rank_tol,
                                                      config.tolerances.tol_axis,
                                                      config.seed));
            } catch (const Error& e) {
                if (!problems.empty()) problems += "; ";
                problems += "lambda0=" + std::to_string(lambda0) + ": " + e.what();
            }
        }
        if (!problems.empty())
            throw ValidationFailed("kernel extraction failed at " + problems, "kernel");
    });

    run_stage(Stage::check, [&](StageRecord&) {
        std::string problems;
        for (const auto& kernel : report.kernels) {
            BifurcationReport br = bifurcation_report(kernel, model, grid,
                                                      config.tolerances.tol_G);
            if (!br.all_hypotheses_met) {
                if (!problems.empty()) problems += "; ";
                problems += "lambda0=" + std::to_string(br.lambda0) + ": " + br.note;
            }
            report.bifurcation.push_back(std::move(br));
        }
        if (!problems.empty())
            throw ValidationFailed("bifurcation hypotheses not met at " + problems,
                                   "check");
    });

    run_stage(Stage::branch, [&](StageRecord&) {
        NewtonOptions nopts;
        nopts.tol = config.tolerances.newton_tol;
        for (const auto& kernel : report.kernels) {
            BranchPoint start = branch_switch(model, kernel.lambda0, kernel, grid,
                                              config.grid.bc, config.continuation.epsilon,
                                              nopts, config.tolerances.tol_axis);
            ContinuationOptions copts;
            copts.step0 = config.continuation.step0;
            copts.step_min = config.continuation.step_min;
            copts.step_max = config.continuation.step_max;
            copts.norm_cap = config.continuation.norm_cap;
            copts.max_steps = config.continuation.max_steps;
            copts.lambda_lo = config.lambda_window.lo;
            copts.lambda_hi = config.lambda_window.hi;
            copts.newton = nopts;
            copts.tol_axis = config.tolerances.tol_axis;
            report.branches.push_back(
                continue_branch(model, start, kernel.lambda0, grid, config.grid.bc, copts));
        }
    });

    return report;
}

json report_to_json(const RunReport& report) {
    json j;
    j["config"] = to_json(report.config);

    j["stages"] = json::array();
    for (const auto& s : report.stages)
        j["stages"].push_back({{"name", s.name},
                               {"requested", s.requested},
                               {"run", s.run},
                               {"completed", s.completed},
                               {"wall_seconds", s.wall_seconds},
                               {"error", s.error},
                               {"skip_reason", s.skip_reason}});

    json checks = json::array();
    for (const auto& c : report.validation.checks)
        checks.push_back({{"tag", c.tag},
                          {"passed", c.passed},
                          {"worst_residual", c.worst_residual},
                          {"detail", c.detail}});
    json e_profile = json::array();
    for (const auto& [R, e] : report.validation.e_profile)
        e_profile.push_back({R, e});
    j["validation"] = {{"all_passed", report.validation.all_passed},
                       {"checks", std::move(checks)},
                       {"e_profile", std::move(e_profile)}};

    const auto& adm = report.admissibility;
    j["admissibility"] = {
        {"admissible", adm.admissible},
        {"lambda_grid", adm.lambda_grid},
        {"hyperbolicity_margins_plus", adm.hyperbolicity_margins_plus},
        {"hyperbolicity_margins_minus", adm.hyperbolicity_margins_minus},
        {"regularity_mode_plus", mode_letter(adm.regularity_mode_plus)},
        {"regularity_mode_minus", mode_letter(adm.regularity_mode_minus)},
        {"regularity_margins_plus", adm.regularity_margins_plus},
        {"regularity_margins_minus", adm.regularity_margins_minus}};

    json profile = json::array();
    for (const auto& p : report.scan.profile)
        profile.push_back({{"lambda", p.lambda}, {"sigma_min", p.sigma_min}});
    json scan_candidates = json::array();
    for (const auto& c : report.scan.candidates)
        scan_candidates.push_back({{"lambda0", c.lambda0}, {"sigma_min", c.sigma_min}});
    j["scan"] = {{"profile", std::move(profile)},
                 {"candidates", std::move(scan_candidates)}};

    j["candidates"] = report.candidates;

    j["kernels"] = json::array();
    for (const auto& k : report.kernels)
        j["kernels"].push_back({{"lambda0", k.lambda0},
                                {"dimension", k.dimension},
                                {"singular_values", k.singular_values},
                                {"sigma_ref", k.sigma_ref},
                                {"tail_ratios", k.tail_ratios}});

    j["bifurcation"] = json::array();
    for (const auto& b : report.bifurcation)
        j["bifurcation"].push_back({{"lambda0", b.lambda0},
                                    {"k", b.k},
                                    {"k_odd", b.k_odd},
                                    {"G", matrix_to_json(b.transversality_matrix)},
                                    {"g_nonsingular", b.g_nonsingular},
                                    {"condition_number", b.condition_number},
                                    {"image_gram", matrix_to_json(b.image_gram)},
                                    {"image_rank", b.image_rank},
                                    {"det_shortcut_value", b.det_shortcut_value},
                                    {"det_shortcut_t0", b.det_shortcut_t0},
                                    {"parity", b.parity},
                                    {"all_hypotheses_met", b.all_hypotheses_met},
                                    {"note", b.note}});

    j["branches"] = json::array();
    for (const auto& br : report.branches) {
        json points = json::array();
        for (const auto& p : br.points)
            points.push_back({{"lambda", p.lambda},
                              {"sup_norm", p.sup_norm},
                              {"l2_norm", p.l2_norm},
                              {"h1_norm", p.h1_norm},
                              {"residual", p.residual},
                              {"gamma_plus", p.gamma_plus},
                              {"gamma_minus", p.gamma_minus},
                              {"newton_iters", p.newton_iters}});
        j["branches"].push_back({{"origin_lambda0", br.origin_lambda0},
                                 {"termination", termination_name(br.termination)},
                                 {"n_points", br.points.size()},
                                 {"points", std::move(points)}});
    }
    return j;
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

class OutputFile {
public:
    OutputFile(const std::filesystem::path& path, FileManifest& manifest)
        : path_(path.string()), out_(path, std::ios::binary) {
        if (!out_) throw IoFailure("cannot open for writing: " + path_);
        manifest.files.push_back(path_);
    }
    ~OutputFile() { out_.flush(); }

    template <class T>
    OutputFile& operator<<(const T& v) {
        out_ << v;
        return *this;
    }

    void close() {
        out_.flush();
        if (!out_) throw IoFailure("write failed: " + path_);
        out_.close();
    }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace

FileManifest write_outputs(const RunReport& report, const std::string& directory,
                           const std::vector<std::string>& formats) {
    namespace fs = std::filesystem;
    FileManifest manifest;
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw IoFailure("cannot create output directory: " + directory);

    const bool want_json =
        std::find(formats.begin(), formats.end(), "json") != formats.end();
    const bool want_csv =
        std::find(formats.begin(), formats.end(), "csv") != formats.end();

    if (want_json) {
        OutputFile out(fs::path(directory) / "report.json", manifest);
        out << report_to_json(report).dump(2) << "\n";
        out.close();
    }

    if (!want_csv) return manifest;

    if (!report.scan.profile.empty()) {
        OutputFile out(fs::path(directory) / "sigma_min.csv", manifest);
        out << "lambda,sigma_min\n";
        for (const auto& p : report.scan.profile)
            out << format_float(p.lambda) << "," << format_float(p.sigma_min) << "\n";
        out.close();
    }

    const Grid grid = make_grid(report.config);
    const int block = 2;  // section6 models are planar; x rows carry 2N entries

    for (std::size_t i = 0; i < report.branches.size(); ++i) {
        const Branch& br = report.branches[i];
        {
            OutputFile out(fs::path(directory) / ("branch_" + std::to_string(i) + ".csv"),
                           manifest);
            out << "lambda,sup_norm,l2_norm,h1_norm,residual,gamma_plus,gamma_minus\n";
            for (const auto& p : br.points)
                out << format_float(p.lambda) << "," << format_float(p.sup_norm) << ","
                    << format_float(p.l2_norm) << "," << format_float(p.h1_norm) << ","
                    << format_float(p.residual) << "," << format_float(p.gamma_plus)
                    << "," << format_float(p.gamma_minus) << "\n";
            out.close();
        }
        if (br.points.empty()) continue;

        // Selected solution profiles: first, largest-amplitude, last point.
        std::vector<std::size_t> picks = {0};
        std::size_t arg_max = 0;
        for (std::size_t p = 1; p < br.points.size(); ++p)
            if (br.points[p].sup_norm > br.points[arg_max].sup_norm) arg_max = p;
        picks.push_back(arg_max);
        picks.push_back(br.points.size() - 1);
        std::sort(picks.begin(), picks.end());
        picks.erase(std::unique(picks.begin(), picks.end()), picks.end());

        for (std::size_t pj : picks) {
            const BranchPoint& pt = br.points[pj];
            const int blk =
                pt.x.size() % grid.n_nodes() == 0
                    ? static_cast<int>(pt.x.size() / grid.n_nodes())
                    : block;
            OutputFile out(fs::path(directory) / ("solution_" + std::to_string(i) + "_" +
                                                  std::to_string(pj) + ".csv"),
                           manifest);
            out << "t";
            for (int c = 1; c <= blk; ++c) out << ",x" << c;
            out << "\n";
            for (int node = 0; node < grid.n_nodes(); ++node) {
                out << format_float(grid.nodes[node]);
                for (int c = 0; c < blk; ++c)
                    out << "," << format_float(pt.x[node * blk + c]);
                out << "\n";
            }
            out.close();
        }
    }
    return manifest;
}

}  // namespace homcl
