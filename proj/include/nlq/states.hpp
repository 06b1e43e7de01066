#pragma once

#include <cstddef>
#include <string>

#include "nlq/matrix.hpp"

namespace nlq {

struct Dims {
    std::size_t a = 2;
    std::size_t b = 2;
    std::size_t total() const { return a * b; }
};

// Bipartite density operator: dims plus a dense matrix of size a*b.
// Construction does not revalidate; callers that ingest untrusted data run
// validate() and reject before building one of these.
class DensityMatrix {
public:
    DensityMatrix() : dims_{0, 0} {}
    DensityMatrix(Dims dims, ComplexMatrix mat);

    const Dims& dims() const { return dims_; }
    const ComplexMatrix& mat() const { return mat_; }

    ComplexMatrix reduced_a() const;
    ComplexMatrix reduced_b() const;
    double purity() const;

private:
    Dims dims_;
    ComplexMatrix mat_;
};

struct ValidationReport {
    double hermiticity_defect = 0.0;
    double trace_defect = 0.0;   // |Tr - 1|
    double min_eigenvalue = 0.0;
    bool pass = false;
    // Empty when pass; otherwise one human-readable reason per defect.
    std::string message;
};

// Hermitian within 1e-12, trace 1 within 1e-10, eigenvalues >= -1e-9.
ValidationReport validate_density(const ComplexMatrix& m);

// |psi><psi| from amplitudes in the computational product basis
// (row-major: index = ia*db + ib). Normalizes; throws on the zero vector
// or a length mismatch.
DensityMatrix pure_state(const std::vector<cdouble>& amplitudes, Dims dims);

// lambda * I/d + (1-lambda) * rho
DensityMatrix mix_white_noise(const DensityMatrix& rho, double lambda);

// (|00> + |11>)/sqrt(2)
DensityMatrix bell_state();

// cos(theta)|00> + sin(theta)|11>
DensityMatrix pure_theta(double theta);

// X-shaped two-qubit state: populations f, 1-2f, 0, f on the diagonal and
// coherence gamma/2 between |00> and |11>, with f = gamma/2 for
// gamma >= 2/3 and f = 1/3 below. Concurrence equals gamma on all of [0,1].
DensityMatrix mems(double gamma);

// Two-qutrit pure state with amplitudes (sin xi cos beta, sin xi sin beta,
// cos xi) on |00>, |11>, |22>.
DensityMatrix ghz_two_qutrit(double xi, double beta);

// I/(da*db) with d split into factors da <= db (da the largest divisor
// not above sqrt(d)); rejects primes since one factor would be 1.
DensityMatrix white_noise_state(std::size_t d);

}  // namespace nlq
