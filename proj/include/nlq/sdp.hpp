#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlq/matrix.hpp"

namespace nlq {

// Block-diagonal Hermitian matrix; block b has side SdpProblem::block_sides[b].
struct BlockMatrix {
    std::vector<ComplexMatrix> blocks;
};

struct SdpConstraint {
    BlockMatrix mat;  // A_k, Hermitian per block
    double rhs = 0.0;
};

// Standard form: minimize <C,X> subject to <A_k,X> = b_k, X PSD,
// over block-diagonal Hermitian X. <.,.> is hs_inner summed over blocks.
struct SdpProblem {
    std::vector<std::size_t> block_sides;
    BlockMatrix objective;
    std::vector<SdpConstraint> constraints;
};

enum class SolveStatus {
    optimal,
    primal_infeasible,
    dual_infeasible,
    max_iterations,
    numerical_failure,
};

const char* to_string(SolveStatus s);

struct SdpSolution {
    SolveStatus status = SolveStatus::numerical_failure;
    BlockMatrix x;           // primal point (certificate ray when dual_infeasible)
    std::vector<double> y;   // dual multipliers (certificate ray when primal_infeasible)
    BlockMatrix dual_slack;  // S = C - sum_k y_k A_k at the returned point
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_residual = 0.0;  // max_k |<A_k,X>-b_k| / (1+max|b|)
    double dual_residual = 0.0;    // ||C - A*(y) - S||_max / (1+||C||_max)
    double duality_gap = 0.0;      // |pobj-dobj| / (1+|pobj|+|dobj|)
    std::size_t iterations = 0;
};

struct SolveOptions {
    double gap_tol = 1e-8;
    double feas_tol = 1e-8;
    std::size_t max_iterations = 200;
};

// Interior-point solve of the homogeneous self-dual embedding with
// HKM directions and a predictor-corrector step. Deterministic: identical
// input bits give identical output bits. Constraint rows are orthogonalized
// internally (near-dependent rows dropped; inconsistent dependencies produce
// a primal infeasibility certificate without entering the iteration).
SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {});

// Lagrangian dual of `problem` expressed again in standard form: PSD slack
// blocks mirror the primal blocks and each free multiplier is split into a
// pair of 1x1 blocks. The returned problem's optimal value is the negative
// of the input's dual optimum.
SdpProblem assemble_dual_view(const SdpProblem& problem);

struct FeasibilityResult {
    enum class Verdict { feasible, infeasible, indeterminate };
    Verdict verdict = Verdict::indeterminate;
    BlockMatrix witness;      // near-feasible point (affine-exact, PSD up to residual)
    double residual = 0.0;    // distance between the cone and affine projections
    std::size_t iterations = 0;
};

// Alternating-projection feasibility check (Dykstra correction on the PSD
// side, plain projection onto the affine rows). Cheap cross-check for the
// interior-point path; never proves infeasibility, only reports a residual
// that refuses to shrink.
FeasibilityResult feasibility_oracle(const SdpProblem& problem,
                                     std::size_t iteration_cap = 20000);

// [[Re, -Im], [Im, Re]] with the obvious 2n x 2n layout. Hermitian input
// gives a real symmetric output with each eigenvalue doubled in multiplicity.
ComplexMatrix hermitian_to_real_embedding(const ComplexMatrix& m);

// Sparse SDPA encoding of the problem after real embedding (complex blocks
// are embedded with objective and constraint entries halved so all trace
// values are preserved; real blocks pass through). The file's PSD variable
// lives on its dual side, so the objective block is written negated.
// Values print with %.17g; a write -> read -> write cycle is byte-identical.
void write_sdpa_sparse(const SdpProblem& problem, std::ostream& os);
SdpProblem read_sdpa_sparse(std::istream& is);

}  // namespace nlq
