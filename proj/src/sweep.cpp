#include "nlq/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "nlq/cache.hpp"
#include "nlq/metrics.hpp"
#include "nlq/state_io.hpp"

namespace nlq {

namespace {

constexpr double kHalfPi = 1.5707963267948966;
const double kChshScale = 2.0 * std::sqrt(2.0);
const double kCglmpScale = 4.0 * std::sqrt(2.0);
const double kEntropyScale = 2.0 * std::log(3.0);

struct Row {
    std::vector<double> params;
    double n22 = 0.0;
    double metric1 = 0.0;  // chsh_norm or cglmp_norm
    double metric2 = 0.0;  // eof or entropy_norm
    SolveStatus status = SolveStatus::numerical_failure;
    double wall_seconds = 0.0;  // kept off the CSV so bytes stay reproducible
};

struct FilePlan {
    std::string name;
    std::string header;
    bool qutrit_metrics = false;
    std::vector<std::vector<double>> params;               // per row, written as-is
    std::function<DensityMatrix(const std::vector<double>&)> state;
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

Row compute_row(const FilePlan& plan, const std::vector<double>& params,
                const SweepOptions& opts) {
    Row row;
    row.params = params;
    const DensityMatrix rho = plan.state(params);

    const auto t0 = std::chrono::steady_clock::now();
    const QuantifyResult q = cached_quantify(rho, opts.settings, opts.quantify);
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    row.status = q.status;
    row.n22 = std::clamp(q.lambda, 0.0, 1.0);
    if (plan.qutrit_metrics) {
        row.metric1 = cglmp_optimize(rho).value / kCglmpScale;
        row.metric2 = von_neumann_entropy(rho, Party::a) / kEntropyScale;
    } else {
        const double chsh = chsh_max(rho);
        row.metric1 = opts.chsh_violation ? std::max(chsh - 2.0, 0.0) / (kChshScale - 2.0)
                                          : chsh / kChshScale;
        row.metric2 = entanglement_of_formation(rho);
    }
    return row;
}

void write_csv(const std::string& path, const FilePlan& plan, const std::vector<Row>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write sweep output '" + path + "'");
    out << plan.header << '\n';
    for (const auto& r : rows) {
        for (double p : r.params) out << format_double(p, 10) << ',';
        out << format_double(r.n22, 10) << ',' << format_double(r.metric1, 10) << ','
            << format_double(r.metric2, 10) << ',' << to_string(r.status) << '\n';
    }
    if (!out.flush()) throw std::runtime_error("cannot write sweep output '" + path + "'");
}

std::vector<FilePlan> make_plan(const SweepOptions& opts) {
    if (opts.points < 2) throw std::invalid_argument("sweep needs at least 2 grid points");
    const std::size_t n = opts.points;
    std::vector<FilePlan> plans;

    auto one_param_rows = [&](double lo, double hi) {
        std::vector<std::vector<double>> rows;
        for (double v : linspace(lo, hi, n)) rows.push_back({v});
        return rows;
    };

    switch (opts.experiment) {
        case Experiment::fig2a: {
            FilePlan p;
            p.name = "fig2a.csv";
            p.header = "theta,n22,chsh_norm,eof,status";
            p.params = one_param_rows(0.0, kHalfPi);
            p.state = [](const std::vector<double>& v) { return pure_theta(v[0]); };
            plans.push_back(std::move(p));
            break;
        }
        case Experiment::fig2b: {
            FilePlan p;
            p.name = "fig2b.csv";
            p.header = "gamma,n22,chsh_norm,eof,status";
            p.params = one_param_rows(0.0, 1.0);
            p.state = [](const std::vector<double>& v) { return mems(v[0]); };
            plans.push_back(std::move(p));
            break;
        }
        case Experiment::fig3: {
            const std::pair<const char*, double> cuts[] = {
                {"fig3_xi_pi6.csv", M_PI / 6.0},
                {"fig3_xi_pi3.csv", M_PI / 3.0},
                {"fig3_xi_pi2.csv", M_PI / 2.0},
            };
            for (const auto& [name, xi] : cuts) {
                FilePlan p;
                p.name = name;
                p.header = "xi,beta,n22,cglmp_norm,entropy_norm,status";
                p.qutrit_metrics = true;
                for (double beta : linspace(0.0, kHalfPi, n)) p.params.push_back({xi, beta});
                p.state = [](const std::vector<double>& v) {
                    return ghz_two_qutrit(v[0], v[1]);
                };
                plans.push_back(std::move(p));
            }
            break;
        }
        case Experiment::custom: {
            FilePlan p;
            double lo = opts.range_lo, hi = opts.range_hi;
            if (opts.family == "pure-theta") {
                if (lo == hi) lo = 0.0, hi = kHalfPi;
                p.header = "theta,n22,chsh_norm,eof,status";
                p.params = one_param_rows(lo, hi);
                p.state = [](const std::vector<double>& v) { return pure_theta(v[0]); };
            } else if (opts.family == "mems") {
                if (lo == hi) lo = 0.0, hi = 1.0;
                if (lo < 0.0 || hi > 1.0)
                    throw std::invalid_argument("mems range must stay within [0,1]");
                p.header = "gamma,n22,chsh_norm,eof,status";
                p.params = one_param_rows(lo, hi);
                p.state = [](const std::vector<double>& v) { return mems(v[0]); };
            } else if (opts.family == "ghz3-beta") {
                if (lo == hi) lo = 0.0, hi = kHalfPi;
                p.header = "xi,beta,n22,cglmp_norm,entropy_norm,status";
                p.qutrit_metrics = true;
                for (double beta : linspace(lo, hi, n)) p.params.push_back({opts.xi, beta});
                p.state = [](const std::vector<double>& v) {
                    return ghz_two_qutrit(v[0], v[1]);
                };
            } else {
                throw std::invalid_argument("unknown sweep family '" + opts.family +
                                            "' (known: pure-theta, mems, ghz3-beta)");
            }
            p.name = "custom_" + opts.family + ".csv";
            plans.push_back(std::move(p));
            break;
        }
    }
    return plans;
}

}  // namespace

SweepOutcome run_sweep(const SweepOptions& opts) {
    const auto plans = make_plan(opts);
    std::filesystem::create_directories(opts.out_dir);

    std::size_t pool = opts.threads ? opts.threads : std::thread::hardware_concurrency();
    if (pool == 0) pool = 1;

    SweepOutcome outcome;
    for (const auto& plan : plans) {
        std::vector<Row> rows(plan.params.size());
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::string first_error;
        std::mutex error_mutex;

        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= plan.params.size() || failed.load()) return;
                try {
                    rows[i] = compute_row(plan, plan.params[i], opts);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!failed.exchange(true)) first_error = e.what();
                    return;
                }
            }
        };

        std::vector<std::thread> threads;
        const std::size_t count = std::min(pool, plan.params.size());
        threads.reserve(count);
        for (std::size_t t = 0; t < count; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
        if (failed.load()) throw std::runtime_error("sweep row failed: " + first_error);

        const std::string path = (std::filesystem::path(opts.out_dir) / plan.name).string();
        write_csv(path, plan, rows);
        outcome.files.push_back(path);
        outcome.rows += rows.size();
        for (const auto& r : rows)
            if (r.status == SolveStatus::optimal) ++outcome.optimal_rows;
    }
    return outcome;
}

}  // namespace nlq
