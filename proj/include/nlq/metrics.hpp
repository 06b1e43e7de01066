#pragma once

#include <array>

#include "nlq/states.hpp"

namespace nlq {

// Largest CHSH value over all measurement choices, computed from the
// correlation matrix T_ij = Tr[rho sigma_i (x) sigma_j]: twice the root of
// the sum of the two largest eigenvalues of T^t T. Two qubits only.
double chsh_max(const DensityMatrix& rho);

// Wootters concurrence through the Hermitian square-root form. Two qubits.
double concurrence(const DensityMatrix& rho);

// Entanglement of formation, binary entropy of (1+sqrt(1-C^2))/2. Two qubits.
double entanglement_of_formation(const DensityMatrix& rho);

enum class Party { a, b };

// -sum p ln p of the reduced state (natural log).
double von_neumann_entropy(const DensityMatrix& rho, Party party);

// vecs[setting][outcome] is an amplitude vector on the local space; each
// setting must be a complete orthonormal family (rank-1 projective).
struct LocalMeasurements {
    std::vector<std::vector<std::vector<cdouble>>> vecs;
};

struct ProbabilityTable {
    std::size_t settings_a = 0, settings_b = 0;
    std::size_t outcomes_a = 0, outcomes_b = 0;
    std::vector<double> p;  // [x][y][a][b] row-major

    double at(std::size_t x, std::size_t y, std::size_t a, std::size_t b) const {
        return p[((x * settings_b + y) * outcomes_a + a) * outcomes_b + b];
    }
    double& at(std::size_t x, std::size_t y, std::size_t a, std::size_t b) {
        return p[((x * settings_b + y) * outcomes_a + a) * outcomes_b + b];
    }
};

ProbabilityTable joint_probabilities(const DensityMatrix& rho, const LocalMeasurements& alice,
                                     const LocalMeasurements& bob);

// Three-outcome two-setting Bell expression; local models stay at 2.
// Table must be 2x2 settings with 3x3 outcomes.
double cglmp_value(const ProbabilityTable& table);

// Fourier-family measurements on a qutrit pair: Alice's vectors carry
// phases w^{j(k+alpha_x)}, Bob's w^{j(-l+beta_y)} with w = exp(2 pi i/3).
std::pair<LocalMeasurements, LocalMeasurements> cglmp_measurements(double alpha0, double alpha1,
                                                                   double beta0, double beta1);

struct CglmpOptimum {
    double value = 0.0;
    std::array<double, 4> phases{};  // alpha0, alpha1, beta0, beta1
};

// Deterministic Nelder-Mead over the four phases from eight fixed starts;
// the canonical start (0, 1/2, 1/4, -1/4) is already optimal for the
// maximally entangled state.
CglmpOptimum cglmp_optimize(const DensityMatrix& rho);

}  // namespace nlq
