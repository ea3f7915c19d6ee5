#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "homcl/config.hpp"
#include "homcl/linop.hpp"
#include "homcl/pipeline.hpp"

namespace py = pybind11;

namespace {

homcl::RunConfig config_from_json_str(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw homcl::ConfigInvalid(std::string("config is not valid JSON: ") + e.what(),
                                   "<json>");
    }
    return homcl::parse_config(j);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "homcl: detection and global continuation of homoclinic branches of "
        "parametrized Hamiltonian systems (C++ core)";

    // the base is registered first: pybind11 walks translators newest-first,
    // so the derived exceptions must sit later in the chain to win
    auto base = py::register_exception<homcl::Error>(m, "HomclError");
    py::register_exception<homcl::ConfigInvalid>(m, "ConfigInvalid", base);
    py::register_exception<homcl::IoFailure>(m, "IoFailure", base);

    m.def(
        "default_config",
        [] { return homcl::to_json(homcl::RunConfig{}).dump(2); },
        "Default run configuration as a JSON string.");

    m.def(
        "validate_config",
        [](const std::string& config_json) {
            config_from_json_str(config_json);  // throws ConfigInvalid on problems
        },
        py::arg("config_json"),
        "Raises ConfigInvalid when the JSON document violates an invariant.");

    m.def(
        "run_pipeline",
        [](const std::string& config_json, const std::string& verb, bool verbose) {
            const homcl::RunConfig config = config_from_json_str(config_json);
            const homcl::Stage last = homcl::stage_from_verb(verb);
            std::ostringstream log;
            homcl::RunReport report =
                homcl::run_pipeline(config, last, verbose ? &log : nullptr);
            if (verbose) py::print(log.str());
            return homcl::report_to_json(report).dump();
        },
        py::arg("config_json"), py::arg("verb") = "all", py::arg("verbose") = false,
        py::call_guard<py::gil_scoped_release>(),
        "Runs the pipeline prefix named by `verb`; returns the RunReport as a "
        "JSON string. Stage failures are recorded in the report, not raised.");

    m.def(
        "run_and_write",
        [](const std::string& config_json, const std::string& verb,
           const std::string& out_override) {
            homcl::RunConfig config = config_from_json_str(config_json);
            if (!out_override.empty()) config.output.directory = out_override;
            const homcl::Stage last = homcl::stage_from_verb(verb);
            homcl::RunReport report = homcl::run_pipeline(config, last);
            const homcl::FileManifest manifest = homcl::write_outputs(
                report, config.output.directory, config.output.formats);
            return py::make_tuple(homcl::report_to_json(report).dump(), manifest.files,
                                  report.ok());
        },
        py::arg("config_json"), py::arg("verb") = "all", py::arg("out") = "",
        "Runs the pipeline and writes report.json / CSV outputs; returns "
        "(report_json, written_files, ok).");

    m.def(
        "section6_lambda0",
        [](double a_scale, double half_length, int n_cells) {
            const auto a = [a_scale](double t) {
                const double s = 1.0 / std::cosh(t);
                return a_scale * s * s;
            };
            const homcl::Grid grid = homcl::Grid::uniform(half_length, n_cells);
            return homcl::rayleigh_lambda0(a, grid).lambda0;
        },
        py::arg("a_scale") = 2.0, py::arg("half_length") = 20.0,
        py::arg("n_cells") = 4000, py::call_guard<py::gil_scoped_release>(),
        "Bifurcation parameter of the scalar operator -phi'' - a_scale*sech^2 "
        "phi via its ground state (the Rayleigh route).");

    m.def(
        "constant_spectrum",
        [](const std::vector<std::vector<double>>& rows) {
            const int n = static_cast<int>(rows.size());
            Eigen::MatrixXd A(n, n);
            for (int r = 0; r < n; ++r) {
                if (static_cast<int>(rows[r].size()) != n)
                    throw homcl::ConfigInvalid("matrix must be square", "A0");
                for (int c = 0; c < n; ++c) A(r, c) = rows[r][c];
            }
            if (n % 2 != 0)
                throw homcl::ConfigInvalid("matrix dimension must be even", "A0");
            const auto S = homcl::SymplecticStructure::standard(n / 2);
            return homcl::constant_spectrum(A, S);
        },
        py::arg("A0"),
        "Exponents of the constant-coefficient system J u' = A0 u (eigenvalues "
        "of -J A0), sorted by real part descending.");
}
