#include "nlq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace nlq {

namespace {

void require_two_qubits(const DensityMatrix& rho, const char* what) {
    if (rho.dims().a != 2 || rho.dims().b != 2)
        throw std::invalid_argument(std::string(what) + " requires a two-qubit state");
}

ComplexMatrix pauli(int k) {
    ComplexMatrix m(2, 2);
    switch (k) {
        case 0: m(0, 1) = 1.0; m(1, 0) = 1.0; break;                       // x
        case 1: m(0, 1) = cdouble(0, -1); m(1, 0) = cdouble(0, 1); break;  // y
        default: m(0, 0) = 1.0; m(1, 1) = -1.0; break;                     // z
    }
    return m;
}

ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& m) {
    const auto e = eig_hermitian(m);
    const std::size_t n = m.rows();
    ComplexMatrix r(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = std::sqrt(std::max(0.0, e.values[k]));
        if (lam == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                r(i, j) += lam * e.vectors(i, k) * std::conj(e.vectors(j, k));
    }
    return r;
}

double binary_entropy(double x) {
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

}  // namespace

double chsh_max(const DensityMatrix& rho) {
    require_two_qubits(rho, "chsh_max");
    double t[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t[i][j] = hs_inner(kron(pauli(i), pauli(j)), rho.mat());

    ComplexMatrix m(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += t[k][i] * t[k][j];
            m(std::size_t(i), std::size_t(j)) = s;
        }
    const auto e = eig_hermitian(m);
    return 2.0 * std::sqrt(std::max(0.0, e.values[2] + e.values[1]));
}

double concurrence(const DensityMatrix& rho) {
    require_two_qubits(rho, "concurrence");
    const ComplexMatrix yy = kron(pauli(1), pauli(1));
    const ComplexMatrix flipped = yy * rho.mat().conjugate() * yy;
    const ComplexMatrix root = matrix_sqrt_psd(rho.mat());
    const ComplexMatrix h = (root * flipped * root).hermitized();
    auto e = eig_hermitian(h);
    std::array<double, 4> lam{};
    for (int k = 0; k < 4; ++k) lam[std::size_t(k)] = std::sqrt(std::max(0.0, e.values[std::size_t(k)]));
    // eigenvalues come back ascending; the top one carries the coherence
    return std::max(0.0, lam[3] - lam[2] - lam[1] - lam[0]);
}

double entanglement_of_formation(const DensityMatrix& rho) {
    const double c = concurrence(rho);
    const double x = 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c)));
    return binary_entropy(x);
}

double von_neumann_entropy(const DensityMatrix& rho, Party party) {
    const ComplexMatrix red = party == Party::a ? rho.reduced_a() : rho.reduced_b();
    const auto e = eig_hermitian(red);
    double s = 0.0;
    for (double v : e.values)
        if (v > 1e-15) s -= v * std::log(v);
    return s;
}

ProbabilityTable joint_probabilities(const DensityMatrix& rho, const LocalMeasurements& alice,
                                     const LocalMeasurements& bob) {
    const std::size_t da = rho.dims().a, db = rho.dims().b;

    auto check = [](const LocalMeasurements& m, std::size_t d, const char* who) {
        if (m.vecs.empty()) throw std::invalid_argument("joint_probabilities: no settings");
        const std::size_t outcomes = m.vecs.front().size();
        for (const auto& setting : m.vecs) {
            if (setting.size() != outcomes)
                throw std::invalid_argument("joint_probabilities: ragged outcome count");
            ComplexMatrix sum(d, d);
            for (const auto& v : setting) {
                if (v.size() != d)
                    throw std::invalid_argument(std::string("joint_probabilities: ") + who +
                                                " vector length does not match local dimension");
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) sum(i, j) += v[i] * std::conj(v[j]);
            }
            sum -= ComplexMatrix::identity(d);
            if (sum.max_abs() > 1e-6)
                throw std::invalid_argument(std::string("joint_probabilities: ") + who +
                                            " setting is not a complete orthonormal family");
        }
        return outcomes;
    };
    const std::size_t oa = check(alice, da, "alice");
    const std::size_t ob = check(bob, db, "bob");

    ProbabilityTable t;
    t.settings_a = alice.vecs.size();
    t.settings_b = bob.vecs.size();
    t.outcomes_a = oa;
    t.outcomes_b = ob;
    t.p.assign(t.settings_a * t.settings_b * oa * ob, 0.0);

    const auto& r = rho.mat();
    for (std::size_t x = 0; x < t.settings_a; ++x)
        for (std::size_t y = 0; y < t.settings_b; ++y)
            for (std::size_t a = 0; a < oa; ++a)
                for (std::size_t b = 0; b < ob; ++b) {
                    const auto& va = alice.vecs[x][a];
                    const auto& vb = bob.vecs[y][b];
                    cdouble acc = 0.0;
                    for (std::size_t i = 0; i < da; ++i)
                        for (std::size_t j = 0; j < db; ++j) {
                            const cdouble wl = std::conj(va[i] * vb[j]);
                            if (wl == 0.0) continue;
                            cdouble inner = 0.0;
                            for (std::size_t k = 0; k < da; ++k)
                                for (std::size_t l = 0; l < db; ++l)
                                    inner += r(i * db + j, k * db + l) * va[k] * vb[l];
                            acc += wl * inner;
                        }
                    t.at(x, y, a, b) = std::max(0.0, acc.real());
                }
    return t;
}

double cglmp_value(const ProbabilityTable& table) {
    if (table.settings_a != 2 || table.settings_b != 2 || table.outcomes_a != 3 ||
        table.outcomes_b != 3)
        throw std::invalid_argument("cglmp_value needs a 2x2-setting, 3x3-outcome table");

    auto d = [&](std::size_t i, std::size_t j, std::size_t m) {
        double s = 0.0;
        for (std::size_t a = 0; a < 3; ++a) s += table.at(i, j, a, (a + m) % 3);
        return s;
    };
    return d(0, 0, 0) + d(1, 0, 1) + d(1, 1, 0) + d(0, 1, 0) -
           (d(0, 0, 1) + d(1, 0, 0) + d(1, 1, 1) + d(0, 1, 2));
}

std::pair<LocalMeasurements, LocalMeasurements> cglmp_measurements(double alpha0, double alpha1,
                                                                   double beta0, double beta1) {
    const double tau = 2.0 * std::numbers::pi / 3.0;
    const double norm = 1.0 / std::sqrt(3.0);
    auto alice_setting = [&](double alpha) {
        std::vector<std::vector<cdouble>> outs;
        for (int k = 0; k < 3; ++k) {
            std::vector<cdouble> v(3);
            for (int j = 0; j < 3; ++j)
                v[std::size_t(j)] = norm * std::polar(1.0, tau * j * (k + alpha));
            outs.push_back(std::move(v));
        }
        return outs;
    };
    auto bob_setting = [&](double beta) {
        std::vector<std::vector<cdouble>> outs;
        for (int l = 0; l < 3; ++l) {
            std::vector<cdouble> v(3);
            for (int j = 0; j < 3; ++j)
                v[std::size_t(j)] = norm * std::polar(1.0, tau * j * (-l + beta));
            outs.push_back(std::move(v));
        }
        return outs;
    };
    LocalMeasurements alice, bob;
    alice.vecs = {alice_setting(alpha0), alice_setting(alpha1)};
    bob.vecs = {bob_setting(beta0), bob_setting(beta1)};
    return {alice, bob};
}

namespace {

// Nelder-Mead with fixed coefficients and deterministic tie handling;
// good enough for a 4-dimensional smooth landscape.
std::pair<double, std::array<double, 4>> nelder_mead4(
    const std::function<double(const std::array<double, 4>&)>& f, std::array<double, 4> start,
    double step, int max_iter) {
    constexpr int n = 4;
    std::array<std::array<double, 4>, n + 1> x;
    std::array<double, n + 1> fx;
    x[0] = start;
    for (int i = 1; i <= n; ++i) {
        x[std::size_t(i)] = start;
        x[std::size_t(i)][std::size_t(i - 1)] += step;
    }
    for (int i = 0; i <= n; ++i) fx[std::size_t(i)] = f(x[std::size_t(i)]);

    auto order = [&]() {
        std::array<int, n + 1> idx{};
        for (int i = 0; i <= n; ++i) idx[std::size_t(i)] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return fx[std::size_t(a)] < fx[std::size_t(b)]; });
        std::array<std::array<double, 4>, n + 1> xs;
        std::array<double, n + 1> fs;
        for (int i = 0; i <= n; ++i) {
            xs[std::size_t(i)] = x[std::size_t(idx[std::size_t(i)])];
            fs[std::size_t(i)] = fx[std::size_t(idx[std::size_t(i)])];
        }
        x = xs;
        fx = fs;
    };

    for (int it = 0; it < max_iter; ++it) {
        order();
        double spread = 0.0;
        for (int i = 1; i <= n; ++i)
            spread = std::max(spread, std::abs(fx[std::size_t(i)] - fx[0]));
        if (spread < 1e-13) break;

        std::array<double, 4> centroid{};
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < 4; ++k)
                centroid[std::size_t(k)] += x[std::size_t(i)][std::size_t(k)] / n;

        auto combine = [&](double coef) {
            std::array<double, 4> p{};
            for (int k = 0; k < 4; ++k)
                p[std::size_t(k)] = centroid[std::size_t(k)] +
                                    coef * (x[n][std::size_t(k)] - centroid[std::size_t(k)]);
            return p;
        };

        const auto xr = combine(-1.0);
        const double fr = f(xr);
        if (fr < fx[0]) {
            const auto xe = combine(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
            continue;
        }
        if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
            continue;
        }
        const auto xc = combine(0.5);
        const double fc = f(xc);
        if (fc < fx[n]) {
            x[n] = xc;
            fx[n] = fc;
            continue;
        }
        for (int i = 1; i <= n; ++i) {
            for (int k = 0; k < 4; ++k)
                x[std::size_t(i)][std::size_t(k)] =
                    0.5 * (x[std::size_t(i)][std::size_t(k)] + x[0][std::size_t(k)]);
            fx[std::size_t(i)] = f(x[std::size_t(i)]);
        }
    }
    order();
    return {fx[0], x[0]};
}

}  // namespace

CglmpOptimum cglmp_optimize(const DensityMatrix& rho) {
    if (rho.dims().a != 3 || rho.dims().b != 3)
        throw std::invalid_argument("cglmp_optimize requires a two-qutrit state");

    auto objective = [&](const std::array<double, 4>& ph) {
        const auto meas = cglmp_measurements(ph[0], ph[1], ph[2], ph[3]);
        return -cglmp_value(joint_probabilities(rho, meas.first, meas.second));
    };

    const std::array<std::array<double, 4>, 8> starts{{
        {0.0, 0.5, 0.25, -0.25},
        {0.0, 0.0, 0.0, 0.0},
        {0.25, 0.75, 0.5, 0.0},
        {-0.1, 0.4, 0.15, -0.35},
        {0.1, 0.6, 0.35, -0.15},
        {0.0, 0.5, -0.25, 0.25},
        {0.33, 0.83, 0.58, 0.08},
        {-0.25, 0.25, 0.0, -0.5},
    }};

    CglmpOptimum best;
    best.value = -1e300;
    for (const auto& s : starts) {
        const auto r = nelder_mead4(objective, s, 0.2, 300);
        if (-r.first > best.value) {
            best.value = -r.first;
            best.phases = r.second;
        }
    }
    return best;
}

}  // namespace nlq
