#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "homcl/config.hpp"
#include "homcl/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

int run_verb(const std::string& verb, const std::string& config_path,
             const std::string& out_override, bool verbose, int jobs_override) {
    homcl::RunConfig config;
    try {
        config = homcl::load_config(config_path);
        if (!out_override.empty()) config.output.directory = out_override;
        if (jobs_override > 0) config.jobs = jobs_override;
        config.validate();
    } catch (const homcl::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const homcl::Stage last = homcl::stage_from_verb(verb);
    homcl::RunReport report;
    try {
        report = homcl::run_pipeline(config, last, verbose ? &std::cerr : nullptr);
    } catch (const std::exception& e) {
        // run_pipeline records stage errors itself; reaching here means the
        // setup (model construction) failed, which is a config-level problem.
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const homcl::FileManifest manifest = homcl::write_outputs(
            report, config.output.directory, config.output.formats);
        if (verbose)
            for (const auto& f : manifest.files) std::cerr << "wrote " << f << "\n";
    } catch (const homcl::IoFailure& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitStage;
    }

    for (const auto& s : report.stages) {
        if (!s.requested) continue;
        std::cout << s.name << ": "
                  << (s.completed      ? "ok"
                      : s.run          ? "FAILED (" + s.error + ")"
                      : !s.skip_reason.empty() ? "skipped (" + s.skip_reason + ")"
                                       : "not run")
                  << "\n";
    }
    std::cout << (report.ok() ? "pipeline complete" : "pipeline incomplete")
              << "; outputs in " << config.output.directory << "\n";
    return report.ok() ? kExitOk : kExitStage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "homcl: detection and global continuation of homoclinic branches of "
        "parametrized Hamiltonian systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    bool verbose = false;
    int jobs_override = 0;

    const std::vector<std::pair<std::string, std::string>> verbs = {
        {"validate", "check the structural hypotheses (H1), (H2), (H4), (Hinf)"},
        {"admissible", "... and the admissibility of the lambda window"},
        {"scan", "... and scan sigma_min(lambda) for bifurcation candidates"},
        {"kernel", "... and extract kernel dimension and basis at candidates"},
        {"check", "... and verify transversality, parity, and kernel oddness"},
        {"branch", "... and switch onto and continue the bifurcating branch"},
        {"all", "run the complete pipeline (same as 'branch')"},
    };
    for (const auto& [name, desc] : verbs) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "path to the JSON run configuration")
            ->required();
        sub->add_option("--out", out_override,
                        "output directory (overrides output.directory)");
        sub->add_flag("--verbose", verbose, "log per-stage progress to stderr");
        sub->add_option("--jobs", jobs_override,
                        "worker threads for the lambda scan (overrides config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // CLI11 returns 0 for --help; anything else is a usage error.
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    return run_verb(verb, config_path, out_override, verbose, jobs_override);
}
