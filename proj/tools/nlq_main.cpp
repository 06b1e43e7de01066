#include <cmath>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "nlq/cache.hpp"
#include "nlq/extension.hpp"
#include "nlq/metrics.hpp"
#include "nlq/state_io.hpp"
#include "nlq/sweep.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitSolver = 3;

struct CommonArgs {
    std::string state;
    std::string settings = "2,2";
    std::string mode = "positive";
    std::string format = "text";
    double tol = 1e-8;
    bool bisect = false;
};

nlq::SettingsCount parse_settings(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("--settings expects MA,MB (e.g. 2,2)");
    try {
        std::size_t ua = 0, ub = 0;
        const int ma = std::stoi(text.substr(0, comma), &ua);
        const int mb = std::stoi(text.substr(comma + 1), &ub);
        if (ua != comma || ub != text.size() - comma - 1)
            throw std::invalid_argument("");
        return {ma, mb};
    } catch (const std::exception&) {
        throw std::invalid_argument("--settings expects MA,MB (e.g. 2,2)");
    }
}

nlq::ExtensionMode parse_mode(const std::string& text) {
    if (text == "positive") return nlq::ExtensionMode::positive;
    if (text == "ppt-quasi") return nlq::ExtensionMode::ppt_quasi;
    throw std::invalid_argument("--mode must be positive or ppt-quasi");
}

std::string fmt(double v) { return nlq::format_double(v, 10); }

void print_kv(const json& j) {
    for (const auto& [key, value] : j.items()) {
        std::cout << key << " = ";
        if (value.is_string())
            std::cout << value.get<std::string>();
        else if (value.is_number_float())
            std::cout << fmt(value.get<double>());
        else
            std::cout << value.dump();
        std::cout << '\n';
    }
}

void emit(const json& j, const std::string& format) {
    if (format == "json")
        std::cout << j.dump(2) << '\n';
    else
        print_kv(j);
}

int run_quantify(const CommonArgs& args) {
    const auto rho = nlq::parse_state_spec(args.state);
    nlq::QuantifyOptions opts;
    opts.mode = parse_mode(args.mode);
    opts.bisect = args.bisect;
    opts.gap_tol = args.tol;

    const auto r = nlq::cached_quantify(rho, parse_settings(args.settings), opts);

    json out{
        {"lambda", r.lambda},
        {"settings", {r.settings.ma, r.settings.mb}},
        {"mode", nlq::to_string(r.mode)},
        {"status", nlq::to_string(r.status)},
        {"method", r.bisection ? "bisection" : "parametric"},
        {"nu", r.nu},
        {"mu", r.mu},
        {"compressed_side", r.compressed_side},
        {"iterations", r.iterations},
        {"marginal_defect", r.marginal_defect},
        {"invariance_defect", r.invariance_defect},
        {"psd_defect", r.psd_defect},
    };
    if (r.bisection) out["bracket"] = r.bracket;
    emit(out, args.format);
    return r.status == nlq::SolveStatus::optimal ? kExitOk : kExitSolver;
}

int run_check_extension(const CommonArgs& args) {
    const auto rho = nlq::parse_state_spec(args.state);
    nlq::SolveOptions sopts;
    sopts.gap_tol = args.tol;
    sopts.feas_tol = args.tol;
    const auto check = nlq::has_symmetric_extension(rho, parse_settings(args.settings),
                                                    parse_mode(args.mode), sopts);

    const char* outcome = check.outcome == nlq::ExtensionCheck::Outcome::feasible ? "feasible"
                          : check.outcome == nlq::ExtensionCheck::Outcome::infeasible
                              ? "infeasible"
                              : "indeterminate";
    json out{
        {"outcome", outcome},
        {"solver_status", nlq::to_string(check.solver_status)},
        {"iterations", check.iterations},
    };
    if (check.outcome == nlq::ExtensionCheck::Outcome::feasible) {
        out["marginal_defect"] = check.marginal_defect;
        out["invariance_defect"] = check.invariance_defect;
        out["psd_defect"] = check.psd_defect;
    } else if (check.outcome == nlq::ExtensionCheck::Outcome::infeasible) {
        out["certificate_value"] = check.certificate_value;
    }
    emit(out, args.format);
    return check.outcome == nlq::ExtensionCheck::Outcome::indeterminate ? kExitSolver : kExitOk;
}

int run_metrics(const CommonArgs& args) {
    const auto rho = nlq::parse_state_spec(args.state);
    const auto dims = rho.dims();
    json out{{"dims", {dims.a, dims.b}}};

    if (dims.a == 2 && dims.b == 2) {
        const double chsh = nlq::chsh_max(rho);
        out["chsh"] = chsh;
        out["chsh_norm"] = chsh / (2.0 * std::sqrt(2.0));
        out["concurrence"] = nlq::concurrence(rho);
        out["eof"] = nlq::entanglement_of_formation(rho);
    } else if (dims.a == 3 && dims.b == 3) {
        const auto opt = nlq::cglmp_optimize(rho);
        out["cglmp"] = opt.value;
        out["cglmp_norm"] = opt.value / (4.0 * std::sqrt(2.0));
        out["cglmp_phases"] = opt.phases;
    }
    const double entropy = nlq::von_neumann_entropy(rho, nlq::Party::a);
    if (!(dims.a == 2 && dims.b == 2)) {
        out["entropy"] = entropy;
        out["entropy_norm"] = entropy / (2.0 * std::log(double(std::min(dims.a, dims.b))));
    }
    emit(out, args.format);
    return kExitOk;
}

struct SweepArgs {
    std::string experiment;
    std::size_t points = 61;
    std::string out = ".";
    std::string settings = "2,2";
    std::string mode = "positive";
    double tol = 1e-8;
    bool bisect = false;
    bool chsh_violation = false;
    std::size_t threads = 0;
    std::string family = "pure-theta";
    std::string range;
    double xi = 1.5707963267948966;
};

int run_sweep_cmd(const SweepArgs& args) {
    nlq::SweepOptions opts;
    if (args.experiment == "fig2a")
        opts.experiment = nlq::Experiment::fig2a;
    else if (args.experiment == "fig2b")
        opts.experiment = nlq::Experiment::fig2b;
    else if (args.experiment == "fig3")
        opts.experiment = nlq::Experiment::fig3;
    else if (args.experiment == "custom")
        opts.experiment = nlq::Experiment::custom;
    else
        throw std::invalid_argument("--experiment must be fig2a, fig2b, fig3 or custom");

    opts.points = args.points;
    opts.out_dir = args.out;
    opts.settings = parse_settings(args.settings);
    opts.quantify.mode = parse_mode(args.mode);
    opts.quantify.bisect = args.bisect;
    opts.quantify.gap_tol = args.tol;
    opts.threads = args.threads;
    opts.family = args.family;
    opts.xi = args.xi;
    opts.chsh_violation = args.chsh_violation;
    if (!args.range.empty()) {
        const auto comma = args.range.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("--range expects LO,HI (decimals)");
        try {
            opts.range_lo = std::stod(args.range.substr(0, comma));
            opts.range_hi = std::stod(args.range.substr(comma + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("--range expects LO,HI (decimals)");
        }
    }

    const auto outcome = nlq::run_sweep(opts);
    for (const auto& f : outcome.files) std::cout << "wrote " << f << '\n';
    std::cout << "rows = " << outcome.rows << ", optimal = " << outcome.optimal_rows << '\n';

    const bool healthy =
        outcome.rows > 0 && 20 * outcome.optimal_rows >= 19 * outcome.rows;  // >= 95%
    return healthy ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"White-noise nonlocality thresholds via symmetric-extension programs"};
    app.require_subcommand(1);

    CommonArgs qa;
    auto* quantify = app.add_subcommand(
        "quantify", "Minimal white-noise fraction that makes the state extendible");
    quantify->add_option("--state", qa.state, "preset:... string or state file path")
        ->required();
    quantify->add_option("--settings", qa.settings, "copies per side, MA,MB (default 2,2)");
    quantify->add_option("--mode", qa.mode, "positive | ppt-quasi");
    quantify->add_option("--tol", qa.tol, "solver gap/feasibility tolerance");
    quantify->add_flag("--bisect", qa.bisect, "bisection over the projection oracle");
    quantify->add_option("--format", qa.format, "text | json");

    CommonArgs ca;
    auto* check = app.add_subcommand(
        "check-extension", "Does the state admit a symmetric extension as-is?");
    check->add_option("--state", ca.state, "preset:... string or state file path")->required();
    check->add_option("--settings", ca.settings, "copies per side, MA,MB (default 2,2)");
    check->add_option("--mode", ca.mode, "positive | ppt-quasi");
    check->add_option("--tol", ca.tol, "solver gap/feasibility tolerance");
    check->add_option("--format", ca.format, "text | json");

    CommonArgs ma;
    auto* metrics = app.add_subcommand(
        "metrics", "Bell-violation and entanglement measures for the state");
    metrics->add_option("--state", ma.state, "preset:... string or state file path")->required();
    metrics->add_option("--format", ma.format, "text | json");

    SweepArgs sa;
    auto* sweep = app.add_subcommand("sweep", "Figure-data grids written as CSV");
    sweep->add_option("--experiment", sa.experiment, "fig2a | fig2b | fig3 | custom")
        ->required();
    sweep->add_option("--points", sa.points, "grid points per axis (default 61)");
    sweep->add_option("--out", sa.out, "output directory (default .)");
    sweep->add_option("--settings", sa.settings, "copies per side, MA,MB (default 2,2)");
    sweep->add_option("--mode", sa.mode, "positive | ppt-quasi");
    sweep->add_option("--tol", sa.tol, "solver gap/feasibility tolerance");
    sweep->add_flag("--bisect", sa.bisect, "bisection over the projection oracle");
    sweep->add_flag("--chsh-violation", sa.chsh_violation,
                    "report max(chsh-2,0)/(2sqrt2-2) instead of chsh/(2sqrt2)");
    sweep->add_option("--threads", sa.threads, "worker pool size (default: all cores)");
    sweep->add_option("--family", sa.family, "custom only: pure-theta | mems | ghz3-beta");
    sweep->add_option("--range", sa.range, "custom only: LO,HI parameter range");
    sweep->add_option("--xi", sa.xi, "custom ghz3-beta only: fixed xi (radians)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (quantify->parsed()) return run_quantify(qa);
        if (check->parsed()) return run_check_extension(ca);
        if (metrics->parsed()) return run_metrics(ma);
        if (sweep->parsed()) return run_sweep_cmd(sa);
    } catch (const nlq::ResourceLimitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitBadInput;
}
