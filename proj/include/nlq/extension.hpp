#pragma once

#include <stdexcept>

#include "nlq/sdp.hpp"
#include "nlq/states.hpp"

namespace nlq {

// Thrown when a requested problem would not fit the dense solver; distinct
// from invalid_argument so callers can map it to a different exit path.
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SettingsCount {
    int ma = 2;
    int mb = 2;
};

enum class ExtensionMode { positive, ppt_quasi };

const char* to_string(ExtensionMode m);

// Isometry from the permutation-symmetric subspace of (C^d)^{(x) copies}
// into the full tensor space. Columns index multisets in lex order; each
// column spreads 1/sqrt(#arrangements) over the distinct arrangements.
ComplexMatrix symmetric_isometry(std::size_t local_dim, int copies);

// Group average of m over all permutations of the A copies times all
// permutations of the B copies (tensor order: A copies first, then B).
ComplexMatrix symmetrizer_twirl(const ComplexMatrix& m, std::size_t dim_a, int copies_a,
                                std::size_t dim_b, int copies_b);

// lambda <= 1 - 1/sqrt((d^2-1)(d-1)) holds for every state of total
// dimension d, so it brackets the noise parameter in the parametric form.
double lambda_upper_bound(Dims dims);

struct ExtensionProblem {
    Dims dims;
    SettingsCount settings;
    ExtensionMode mode = ExtensionMode::positive;
    bool parametric = false;

    SdpProblem sdp;
    std::size_t nu = 0;               // traceless marginal constraints
    std::size_t mu = 0;               // full extension space dimension
    std::size_t compressed_side = 0;  // symmetric-subspace block side
    double lambda_upper = 0.0;        // box bound (parametric form only)
    ComplexMatrix isometry;           // kron of the per-side isometries
    std::vector<double> rhs_traceless;  // <g_i, rho> for i >= 1
};

// Assembles the search for an extension entirely inside the symmetric
// subspace (no generality is lost: twirling any extension and compressing
// preserves the marginals and positivity). Parametric form carries the
// noise fraction as an extra 1x1 block with box constraint; the plain form
// minimizes Tr Z so that feasibility reads off as optimum <= 1.
ExtensionProblem build_extension_sdp(const DensityMatrix& rho, SettingsCount settings,
                                     bool parametric, ExtensionMode mode);

struct ExtensionCheck {
    enum class Outcome { feasible, infeasible, indeterminate };
    Outcome outcome = Outcome::indeterminate;
    SolveStatus solver_status = SolveStatus::numerical_failure;
    std::size_t iterations = 0;

    // feasible: compressed extension witness plus its measured defects
    ComplexMatrix witness;
    double marginal_defect = 0.0;
    double invariance_defect = 0.0;
    double psd_defect = 0.0;

    // infeasible: dual coefficients over the traceless product basis; the
    // witness operator they define has expectation `certificate_value` > 1
    // on rho while its lifted symmetrization stays below the identity.
    std::vector<double> certificate;
    double certificate_value = 0.0;
};

ExtensionCheck has_symmetric_extension(const DensityMatrix& rho, SettingsCount settings,
                                       ExtensionMode mode = ExtensionMode::positive,
                                       const SolveOptions& opts = {});

struct QuantifyOptions {
    ExtensionMode mode = ExtensionMode::positive;
    bool bisect = false;
    double gap_tol = 1e-8;
    double bisect_tol = 1e-4;
    std::size_t max_iterations = 200;
    std::size_t oracle_cap = 20000;
};

struct QuantifyResult {
    double lambda = 0.0;
    SolveStatus status = SolveStatus::numerical_failure;
    SettingsCount settings;
    ExtensionMode mode = ExtensionMode::positive;
    bool bisection = false;
    double bracket = 0.0;  // final bracket width (bisection only)

    std::size_t nu = 0, mu = 0, compressed_side = 0;
    std::size_t iterations = 0;

    ComplexMatrix witness;  // compressed extension of the lambda-mixed state
    double marginal_defect = 0.0;
    double invariance_defect = 0.0;
    double psd_defect = 0.0;
};

// Minimal white-noise fraction making rho extendible at the given settings.
// Zero fast path via has_symmetric_extension; otherwise one parametric
// interior-point solve, or bisection over the alternating-projection
// feasibility oracle when opts.bisect is set.
QuantifyResult quantify(const DensityMatrix& rho, SettingsCount settings,
                        const QuantifyOptions& opts = {});

}  // namespace nlq
