// Python face of the library. Density operators cross the boundary as
// square complex numpy arrays; dims defaults to the balanced factorization
// of the side (pass dims=(dA,dB) for anything asymmetric like 2x3).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlq/extension.hpp"
#include "nlq/metrics.hpp"
#include "nlq/state_io.hpp"
#include "nlq/states.hpp"

namespace py = pybind11;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

nlq::Dims infer_dims(std::size_t side, const py::object& dims) {
    if (!dims.is_none()) {
        const auto t = dims.cast<std::pair<std::size_t, std::size_t>>();
        if (t.first * t.second != side)
            throw std::invalid_argument("dims product does not match the matrix side");
        return {t.first, t.second};
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a * a <= side; ++a)
        if (side % a == 0) best = a;
    if (best <= 1)
        throw std::invalid_argument("cannot split a prime side into dims; pass dims=(dA,dB)");
    return {best, side / best};
}

nlq::ComplexMatrix to_matrix(const CArray& arr) {
    if (arr.ndim() != 2 || arr.shape(0) != arr.shape(1))
        throw std::invalid_argument("expected a square 2-d complex array");
    const auto n = std::size_t(arr.shape(0));
    nlq::ComplexMatrix m(n, n);
    const auto r = arr.unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = r(py::ssize_t(i), py::ssize_t(j));
    return m;
}

nlq::DensityMatrix to_density(const CArray& arr, const py::object& dims) {
    auto m = to_matrix(arr);
    const auto report = nlq::validate_density(m);
    if (!report.pass) throw std::invalid_argument("not a density matrix: " + report.message);
    return nlq::DensityMatrix(infer_dims(m.rows(), dims), m.hermitized());
}

py::array_t<std::complex<double>> to_numpy(const nlq::ComplexMatrix& m) {
    py::array_t<std::complex<double>> out({m.rows(), m.cols()});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            w(py::ssize_t(i), py::ssize_t(j)) = m(i, j);
    return out;
}

nlq::SettingsCount to_settings(const std::pair<int, int>& settings) {
    return {settings.first, settings.second};
}

nlq::ExtensionMode to_mode(const std::string& mode) {
    if (mode == "positive") return nlq::ExtensionMode::positive;
    if (mode == "ppt-quasi") return nlq::ExtensionMode::ppt_quasi;
    throw std::invalid_argument("mode must be 'positive' or 'ppt-quasi'");
}

py::dict quantify_py(const CArray& state, const py::object& dims,
                     const std::pair<int, int>& settings, const std::string& mode, bool bisect,
                     double gap_tol, double bisect_tol) {
    const auto rho = to_density(state, dims);
    nlq::QuantifyOptions opts;
    opts.mode = to_mode(mode);
    opts.bisect = bisect;
    opts.gap_tol = gap_tol;
    opts.bisect_tol = bisect_tol;
    const auto r = nlq::quantify(rho, to_settings(settings), opts);

    py::dict out;
    out["lambda_star"] = r.lambda;
    out["status"] = nlq::to_string(r.status);
    out["settings"] = py::make_tuple(r.settings.ma, r.settings.mb);
    out["mode"] = nlq::to_string(r.mode);
    out["method"] = r.bisection ? "bisection" : "parametric";
    if (r.bisection) out["bracket"] = r.bracket;
    out["iterations"] = r.iterations;
    out["marginal_defect"] = r.marginal_defect;
    out["invariance_defect"] = r.invariance_defect;
    out["psd_defect"] = r.psd_defect;
    if (r.witness.rows() > 0) out["witness"] = to_numpy(r.witness);
    return out;
}

py::dict check_extension_py(const CArray& state, const py::object& dims,
                            const std::pair<int, int>& settings, const std::string& mode) {
    const auto rho = to_density(state, dims);
    const auto c = nlq::has_symmetric_extension(rho, to_settings(settings), to_mode(mode));

    py::dict out;
    out["outcome"] = c.outcome == nlq::ExtensionCheck::Outcome::feasible     ? "feasible"
                     : c.outcome == nlq::ExtensionCheck::Outcome::infeasible ? "infeasible"
                                                                             : "indeterminate";
    out["solver_status"] = nlq::to_string(c.solver_status);
    out["iterations"] = c.iterations;
    if (c.outcome == nlq::ExtensionCheck::Outcome::feasible) {
        out["marginal_defect"] = c.marginal_defect;
        out["invariance_defect"] = c.invariance_defect;
        out["psd_defect"] = c.psd_defect;
        out["witness"] = to_numpy(c.witness);
    } else if (c.outcome == nlq::ExtensionCheck::Outcome::infeasible) {
        out["certificate_value"] = c.certificate_value;
        out["certificate"] = c.certificate;
    }
    return out;
}

py::dict validate_py(const CArray& state) {
    const auto report = nlq::validate_density(to_matrix(state));
    py::dict out;
    out["ok"] = report.pass;
    out["hermiticity_defect"] = report.hermiticity_defect;
    out["trace_defect"] = report.trace_defect;
    out["min_eigenvalue"] = report.min_eigenvalue;
    out["message"] = report.message;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "White-noise nonlocality thresholds via symmetric-extension programs";

    m.def("quantify", &quantify_py, py::arg("state"), py::arg("dims") = py::none(),
          py::arg("settings") = std::pair<int, int>{2, 2}, py::arg("mode") = "positive",
          py::arg("bisect") = false, py::arg("gap_tol") = 1e-8, py::arg("bisect_tol") = 1e-4,
          "Minimal white-noise fraction lambda making the state admit a symmetric extension "
          "at the given settings counts. Returns a dict with lambda_star, status and solution "
          "diagnostics.");

    m.def("check_extension", &check_extension_py, py::arg("state"),
          py::arg("dims") = py::none(), py::arg("settings") = std::pair<int, int>{2, 2},
          py::arg("mode") = "positive",
          "Feasibility of a symmetric extension for the state as given (no added noise).");

    m.def("validate", &validate_py, py::arg("state"),
          "Density-matrix diagnostics: hermiticity, trace and spectrum defects.");

    m.def(
        "parse_state_spec",
        [](const std::string& spec) {
            const auto rho = nlq::parse_state_spec(spec);
            return py::make_tuple(to_numpy(rho.mat()),
                                  py::make_tuple(rho.dims().a, rho.dims().b));
        },
        py::arg("spec"),
        "Resolve a preset string (preset:bell, preset:mems:0.5, ...) or a state file path; "
        "returns (matrix, dims).");

    m.def(
        "bell_state", [] { return to_numpy(nlq::bell_state().mat()); },
        "Projector onto (|00> + |11>)/sqrt(2).");
    m.def(
        "pure_theta", [](double t) { return to_numpy(nlq::pure_theta(t).mat()); },
        py::arg("theta"), "Projector onto cos(theta)|00> + sin(theta)|11>.");
    m.def(
        "mems", [](double g) { return to_numpy(nlq::mems(g).mat()); }, py::arg("gamma"),
        "X-shaped two-qubit state with concurrence gamma maximizing entanglement at fixed "
        "CHSH value.");
    m.def(
        "ghz_two_qutrit",
        [](double xi, double beta) { return to_numpy(nlq::ghz_two_qutrit(xi, beta).mat()); },
        py::arg("xi"), py::arg("beta"),
        "Two-qutrit pure state with amplitudes (sin xi cos beta, sin xi sin beta, cos xi).");
    m.def(
        "white_noise_state", [](std::size_t d) { return to_numpy(nlq::white_noise_state(d).mat()); },
        py::arg("d"), "I/d on the balanced factorization of d.");
    m.def(
        "mix_white_noise",
        [](const CArray& state, double lam, const py::object& dims) {
            return to_numpy(nlq::mix_white_noise(to_density(state, dims), lam).mat());
        },
        py::arg("state"), py::arg("lam"), py::arg("dims") = py::none(),
        "lam * I/d + (1 - lam) * rho.");

    m.def(
        "chsh_max", [](const CArray& s) { return nlq::chsh_max(to_density(s, py::none())); },
        py::arg("state"), "Largest CHSH value over measurement choices; two qubits.");
    m.def(
        "concurrence",
        [](const CArray& s) { return nlq::concurrence(to_density(s, py::none())); },
        py::arg("state"), "Two-qubit concurrence.");
    m.def(
        "entanglement_of_formation",
        [](const CArray& s) { return nlq::entanglement_of_formation(to_density(s, py::none())); },
        py::arg("state"), "Two-qubit entanglement of formation in bits.");
    m.def(
        "von_neumann_entropy",
        [](const CArray& s, const py::object& dims, const std::string& party) {
            if (party != "a" && party != "b")
                throw std::invalid_argument("party must be 'a' or 'b'");
            return nlq::von_neumann_entropy(to_density(s, dims),
                                            party == "a" ? nlq::Party::a : nlq::Party::b);
        },
        py::arg("state"), py::arg("dims") = py::none(), py::arg("party") = "a",
        "Entropy of the reduced state in nats.");
    m.def(
        "cglmp_optimize",
        [](const CArray& s) {
            const auto opt = nlq::cglmp_optimize(to_density(s, py::none()));
            return py::make_tuple(opt.value, opt.phases);
        },
        py::arg("state"),
        "Best three-outcome Bell value over the Fourier measurement family; returns "
        "(value, phases).");

    m.def(
        "lambda_upper_bound",
        [](const std::pair<std::size_t, std::size_t>& dims) {
            return nlq::lambda_upper_bound({dims.first, dims.second});
        },
        py::arg("dims"), "Universal cap on the threshold for states of these dimensions.");

    py::register_exception<nlq::ResourceLimitError>(m, "ResourceLimitError");
}
