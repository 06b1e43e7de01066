#include "nlq/states.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nlq {

DensityMatrix::DensityMatrix(Dims dims, ComplexMatrix mat) : dims_(dims), mat_(std::move(mat)) {
    if (dims_.a < 1 || dims_.b < 1)
        throw std::invalid_argument("density matrix: local dimensions must be positive");
    if (mat_.rows() != dims_.total() || mat_.cols() != dims_.total())
        throw std::invalid_argument("density matrix: matrix size does not match dims");
}

ComplexMatrix DensityMatrix::reduced_a() const {
    return partial_trace(mat_, {dims_.a, dims_.b}, {0});
}

ComplexMatrix DensityMatrix::reduced_b() const {
    return partial_trace(mat_, {dims_.a, dims_.b}, {1});
}

double DensityMatrix::purity() const {
    return hs_inner(mat_, mat_);
}

ValidationReport validate_density(const ComplexMatrix& m) {
    ValidationReport r;
    std::ostringstream msg;
    if (m.rows() != m.cols() || m.rows() == 0) {
        r.message = "matrix is not square";
        return r;
    }
    r.hermiticity_defect = m.hermiticity_defect();
    r.trace_defect = std::abs(m.trace() - cdouble(1.0));
    const auto eig = eig_hermitian(m);
    r.min_eigenvalue = eig.values.front();

    bool ok = true;
    if (r.hermiticity_defect > 1e-12) {
        ok = false;
        msg << "hermiticity defect " << r.hermiticity_defect << " exceeds 1e-12; ";
    }
    if (r.trace_defect > 1e-10) {
        ok = false;
        msg << "trace defect " << r.trace_defect << " exceeds 1e-10; ";
    }
    if (r.min_eigenvalue < -1e-9) {
        ok = false;
        msg << "smallest eigenvalue " << r.min_eigenvalue << " below -1e-9; ";
    }
    r.pass = ok;
    r.message = msg.str();
    if (!r.message.empty() && r.message.back() == ' ') r.message.pop_back();
    if (!r.message.empty() && r.message.back() == ';') r.message.pop_back();
    return r;
}

DensityMatrix pure_state(const std::vector<cdouble>& amplitudes, Dims dims) {
    if (amplitudes.size() != dims.total())
        throw std::invalid_argument("pure_state: amplitude count does not match dims");
    double n2 = 0.0;
    for (const auto& a : amplitudes) n2 += std::norm(a);
    if (n2 <= 0.0)
        throw std::invalid_argument("pure_state: zero state vector");
    const double inv = 1.0 / std::sqrt(n2);
    const std::size_t d = dims.total();
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            m(i, j) = amplitudes[i] * std::conj(amplitudes[j]) * (inv * inv);
    return DensityMatrix(dims, std::move(m));
}

DensityMatrix mix_white_noise(const DensityMatrix& rho, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("mix_white_noise: lambda must lie in [0,1]");
    const std::size_t d = rho.dims().total();
    ComplexMatrix m = rho.mat();
    m *= (1.0 - lambda);
    for (std::size_t i = 0; i < d; ++i) m(i, i) += lambda / double(d);
    return DensityMatrix(rho.dims(), std::move(m));
}

DensityMatrix bell_state() {
    const double r = 1.0 / std::sqrt(2.0);
    return pure_state({r, 0.0, 0.0, r}, Dims{2, 2});
}

DensityMatrix pure_theta(double theta) {
    return pure_state({std::cos(theta), 0.0, 0.0, std::sin(theta)}, Dims{2, 2});
}

DensityMatrix mems(double gamma) {
    if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("mems: gamma must lie in [0,1]");
    const double f = gamma >= 2.0 / 3.0 ? gamma / 2.0 : 1.0 / 3.0;
    ComplexMatrix m(4, 4);
    m(0, 0) = f;
    m(1, 1) = 1.0 - 2.0 * f;
    m(3, 3) = f;
    m(0, 3) = gamma / 2.0;
    m(3, 0) = gamma / 2.0;
    return DensityMatrix(Dims{2, 2}, std::move(m));
}

DensityMatrix ghz_two_qutrit(double xi, double beta) {
    std::vector<cdouble> amps(9, 0.0);
    amps[0] = std::sin(xi) * std::cos(beta);  // |00>
    amps[4] = std::sin(xi) * std::sin(beta);  // |11>
    amps[8] = std::cos(xi);                   // |22>
    return pure_state(amps, Dims{3, 3});
}

DensityMatrix white_noise_state(std::size_t d) {
    if (d < 4)
        throw std::invalid_argument("white_noise_state: total dimension must be at least 4");
    std::size_t da = 0;
    for (std::size_t k = std::size_t(std::sqrt(double(d))); k >= 2; --k) {
        if (d % k == 0) { da = k; break; }
    }
    if (da == 0)
        throw std::invalid_argument("white_noise_state: total dimension must factor into two parts >= 2");
    const std::size_t db = d / da;
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0 / double(d);
    return DensityMatrix(Dims{da, db}, std::move(m));
}

}  // namespace nlq
