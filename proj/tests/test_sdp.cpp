#include "doctest.h"

#include <cstring>
#include <random>
#include <sstream>

#include "nlq/sdp.hpp"
#include "test_util.hpp"

using namespace nlq;

namespace {

// min <H,X> with Tr X = 1 picks out the smallest eigenvalue of H.
SdpProblem min_eig_problem(const ComplexMatrix& h) {
    SdpProblem p;
    p.block_sides = {h.rows()};
    p.objective.blocks = {h};
    SdpConstraint tr;
    tr.mat.blocks = {ComplexMatrix::identity(h.rows())};
    tr.rhs = 1.0;
    p.constraints.push_back(tr);
    return p;
}

double min_eig(const ComplexMatrix& h) { return eig_hermitian(h).values.front(); }

double block_min_eig(const BlockMatrix& bm) {
    double lo = 0.0;
    bool first = true;
    for (const auto& b : bm.blocks) {
        if (b.rows() == 0) continue;
        const double v = min_eig(b);
        lo = first ? v : std::min(lo, v);
        first = false;
    }
    return lo;
}

}  // namespace

TEST_CASE("weighted trace toy problem") {
    // min Tr X with <diag(1,2),X> = 1: all weight on the larger entry.
    SdpProblem p;
    p.block_sides = {2};
    p.objective.blocks = {ComplexMatrix::identity(2)};
    SdpConstraint c;
    ComplexMatrix a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 2.0;
    c.mat.blocks = {a};
    c.rhs = 1.0;
    p.constraints.push_back(c);

    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.primal_objective == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(sol.dual_objective == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(sol.x.blocks[0](1, 1).real() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("smallest eigenvalue agrees with the dense eigensolver") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + std::size_t(trial % 5);
        const auto h = testutil::random_hermitian(n, rng);
        const auto sol = solve(min_eig_problem(h));
        REQUIRE(sol.status == SolveStatus::optimal);
        CHECK(sol.primal_objective ==
              doctest::Approx(min_eig(h)).epsilon(1e-7).scale(1.0 + h.max_abs()));
        CHECK(sol.primal_residual < 1e-7);
        CHECK(sol.dual_residual < 1e-7);
        CHECK(sol.duality_gap < 1e-7);
    }
}

TEST_CASE("smallest eigenvalue across mixed real and complex blocks") {
    std::mt19937_64 rng(102);
    const auto hc = testutil::random_hermitian(3, rng);
    ComplexMatrix hr(2, 2);
    hr(0, 0) = -1.5;
    hr(1, 1) = 0.25;
    hr(0, 1) = 0.4;
    hr(1, 0) = 0.4;

    SdpProblem p;
    p.block_sides = {3, 2};
    p.objective.blocks = {hc, hr};
    SdpConstraint tr;
    tr.mat.blocks = {ComplexMatrix::identity(3), ComplexMatrix::identity(2)};
    tr.rhs = 1.0;
    p.constraints.push_back(tr);

    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    const double expect = std::min(min_eig(hc), min_eig(hr));
    CHECK(sol.primal_objective == doctest::Approx(expect).epsilon(1e-7).scale(2.0));
}

namespace {

// Strictly feasible primal/dual pair by construction: b = A(X0), C = A*(y0)+S0.
SdpProblem strictly_feasible_problem(std::mt19937_64& rng, std::vector<double>* y0,
                                     double* primal_feas_value) {
    const std::vector<std::size_t> sides = {4, 3};
    const std::size_t m = 6;

    std::vector<BlockMatrix> rows(m);
    for (auto& r : rows)
        r.blocks = {testutil::random_hermitian(4, rng), testutil::random_hermitian(3, rng)};

    BlockMatrix x0, s0;
    x0.blocks = {testutil::random_psd(4, rng), testutil::random_psd(3, rng)};
    s0.blocks = {testutil::random_psd(4, rng), testutil::random_psd(3, rng)};
    for (auto& b : x0.blocks) b += ComplexMatrix::identity(b.rows());
    for (auto& b : s0.blocks) b += ComplexMatrix::identity(b.rows());

    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    y0->resize(m);
    for (auto& v : *y0) v = uni(rng);

    SdpProblem p;
    p.block_sides = sides;
    p.objective = s0;
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t b = 0; b < 2; ++b) {
            ComplexMatrix t = rows[k].blocks[b];
            t *= (*y0)[k];
            p.objective.blocks[b] += t;
        }

    for (std::size_t k = 0; k < m; ++k) {
        SdpConstraint c;
        c.mat = rows[k];
        c.rhs = hs_inner(rows[k].blocks[0], x0.blocks[0]) +
                hs_inner(rows[k].blocks[1], x0.blocks[1]);
        p.constraints.push_back(c);
    }

    *primal_feas_value = hs_inner(p.objective.blocks[0], x0.blocks[0]) +
                         hs_inner(p.objective.blocks[1], x0.blocks[1]);
    return p;
}

}  // namespace

TEST_CASE("constructed strictly feasible problems solve to optimality") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> y0;
        double feas_value = 0.0;
        const auto p = strictly_feasible_problem(rng, &y0, &feas_value);
        const auto sol = solve(p);
        REQUIRE(sol.status == SolveStatus::optimal);
        CHECK(sol.primal_residual < 1e-7);
        CHECK(sol.dual_residual < 1e-7);
        CHECK(sol.duality_gap < 1e-6);

        // the optimum can only improve on the feasible points we planted
        double d0 = 0.0;
        for (std::size_t k = 0; k < y0.size(); ++k) d0 += y0[k] * p.constraints[k].rhs;
        const double scale = 1.0 + std::abs(feas_value) + std::abs(d0);
        CHECK(sol.primal_objective <= feas_value + 1e-6 * scale);
        CHECK(sol.dual_objective >= d0 - 1e-6 * scale);
        CHECK(sol.primal_objective >= sol.dual_objective - 1e-6 * scale);

        CHECK(block_min_eig(sol.x) > -1e-7 * scale);
        CHECK(block_min_eig(sol.dual_slack) > -1e-7 * scale);
    }
}

TEST_CASE("dual view solves to the negated dual optimum") {
    std::mt19937_64 rng(104);
    std::vector<double> y0;
    double feas_value = 0.0;
    const auto p = strictly_feasible_problem(rng, &y0, &feas_value);
    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);

    const auto dv = assemble_dual_view(p);
    const auto dsol = solve(dv);
    REQUIRE(dsol.status == SolveStatus::optimal);
    const double scale = 1.0 + std::abs(sol.primal_objective);
    CHECK(sol.primal_objective + dsol.primal_objective ==
          doctest::Approx(0.0).epsilon(1e-6).scale(scale));
}

TEST_CASE("negative trace demand is reported primal infeasible with a certificate") {
    SdpProblem p;
    p.block_sides = {3};
    p.objective.blocks = {ComplexMatrix(3, 3)};
    SdpConstraint c;
    c.mat.blocks = {ComplexMatrix::identity(3)};
    c.rhs = -1.0;
    p.constraints.push_back(c);

    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::primal_infeasible);
    REQUIRE(sol.y.size() == 1);
    double by = sol.y[0] * c.rhs;
    CHECK(by > 0.0);
    // -A*(y) must be (near) PSD for a Farkas ray; here it is y[0]*(-I) with y[0]<0
    CHECK(block_min_eig(sol.dual_slack) > -1e-6);
}

TEST_CASE("unbounded objective is reported dual infeasible with a ray") {
    SdpProblem p;
    p.block_sides = {2};
    ComplexMatrix c(2, 2);
    c(0, 0) = -1.0;
    c(1, 1) = -1.0;
    p.objective.blocks = {c};

    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::dual_infeasible);
    const double val = hs_inner(c, sol.x.blocks[0]);
    CHECK(val < 0.0);
    CHECK(block_min_eig(sol.x) > -1e-7);
}

TEST_CASE("unconstrained psd objective floors at zero") {
    SdpProblem p;
    p.block_sides = {2};
    p.objective.blocks = {ComplexMatrix::identity(2)};
    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(std::abs(sol.primal_objective) < 1e-6);
}

TEST_CASE("conflicting duplicate rows yield a farkas certificate before iterating") {
    SdpProblem p;
    p.block_sides = {2};
    p.objective.blocks = {ComplexMatrix::identity(2)};
    SdpConstraint c1, c2;
    c1.mat.blocks = {ComplexMatrix::identity(2)};
    c1.rhs = 1.0;
    c2.mat.blocks = {ComplexMatrix::identity(2)};
    c2.rhs = 2.0;
    p.constraints = {c1, c2};

    const auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::primal_infeasible);
    REQUIRE(sol.y.size() == 2);
    const double by = sol.y[0] * 1.0 + sol.y[1] * 2.0;
    CHECK(by == doctest::Approx(1.0).epsilon(1e-9));
    // A*(y) = (y0+y1) I vanishes on a valid certificate
    CHECK(std::abs(sol.y[0] + sol.y[1]) < 1e-8);
}

TEST_CASE("solves are bit-for-bit deterministic") {
    std::mt19937_64 rng(105);
    std::vector<double> y0;
    double feas_value = 0.0;
    const auto p = strictly_feasible_problem(rng, &y0, &feas_value);

    const auto s1 = solve(p);
    const auto s2 = solve(p);
    REQUIRE(s1.status == s2.status);
    REQUIRE(s1.y.size() == s2.y.size());
    CHECK(std::memcmp(s1.y.data(), s2.y.data(), s1.y.size() * sizeof(double)) == 0);
    for (std::size_t b = 0; b < s1.x.blocks.size(); ++b) {
        const auto& xa = s1.x.blocks[b];
        const auto& xb = s2.x.blocks[b];
        REQUIRE(xa.rows() == xb.rows());
        CHECK(std::memcmp(xa.data().data(), xb.data().data(),
                          xa.rows() * xa.cols() * sizeof(cdouble)) == 0);
    }
    CHECK(s1.primal_objective == s2.primal_objective);
    CHECK(s1.iterations == s2.iterations);
}

TEST_CASE("iteration cap is honored") {
    std::mt19937_64 rng(106);
    std::vector<double> y0;
    double feas_value = 0.0;
    const auto p = strictly_feasible_problem(rng, &y0, &feas_value);
    SolveOptions opts;
    opts.max_iterations = 2;
    const auto sol = solve(p, opts);
    CHECK(sol.iterations <= 2);
    CHECK(sol.status == SolveStatus::max_iterations);
}

TEST_CASE("alternating projection feasibility oracle") {
    SdpProblem feas;
    feas.block_sides = {3};
    feas.objective.blocks = {ComplexMatrix(3, 3)};
    SdpConstraint c;
    c.mat.blocks = {ComplexMatrix::identity(3)};
    c.rhs = 1.0;
    feas.constraints.push_back(c);

    const auto r = feasibility_oracle(feas);
    REQUIRE(r.verdict == FeasibilityResult::Verdict::feasible);
    CHECK(r.residual < 1e-7);
    CHECK(std::abs(r.witness.blocks[0].trace().real() - 1.0) < 1e-6);
    CHECK(block_min_eig(r.witness) > -1e-6);

    SdpProblem infeas = feas;
    infeas.constraints[0].rhs = -1.0;
    const auto r2 = feasibility_oracle(infeas);
    CHECK(r2.verdict == FeasibilityResult::Verdict::infeasible);
}

TEST_CASE("real embedding doubles every eigenvalue") {
    std::mt19937_64 rng(107);
    const auto h = testutil::random_hermitian(3, rng);
    const auto e = hermitian_to_real_embedding(h);
    REQUIRE(e.rows() == 6);
    CHECK(e.max_abs() >= 0.0);
    const auto ev_h = eig_hermitian(h).values;
    const auto ev_e = eig_hermitian(e).values;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ev_e[2 * i] == doctest::Approx(ev_h[i]).epsilon(1e-9).scale(1.0 + h.max_abs()));
        CHECK(ev_e[2 * i + 1] == doctest::Approx(ev_h[i]).epsilon(1e-9).scale(1.0 + h.max_abs()));
    }
}

TEST_CASE("sdpa sparse round trip is byte identical and solve-equivalent") {
    std::mt19937_64 rng(108);
    std::vector<double> y0;
    double feas_value = 0.0;
    const auto p = strictly_feasible_problem(rng, &y0, &feas_value);

    std::ostringstream first;
    write_sdpa_sparse(p, first);
    std::istringstream in(first.str());
    const auto p2 = read_sdpa_sparse(in);
    std::ostringstream second;
    write_sdpa_sparse(p2, second);
    CHECK(first.str() == second.str());

    const auto s1 = solve(p);
    const auto s2 = solve(p2);
    REQUIRE(s1.status == SolveStatus::optimal);
    REQUIRE(s2.status == SolveStatus::optimal);
    CHECK(s1.primal_objective ==
          doctest::Approx(s2.primal_objective).epsilon(1e-6).scale(1.0 + std::abs(s1.primal_objective)));
}

TEST_CASE("sdpa round trip with no constraints") {
    SdpProblem p;
    p.block_sides = {2};
    p.objective.blocks = {ComplexMatrix::identity(2)};

    std::ostringstream first;
    write_sdpa_sparse(p, first);
    std::istringstream in(first.str());
    const auto p2 = read_sdpa_sparse(in);
    CHECK(p2.constraints.empty());
    std::ostringstream second;
    write_sdpa_sparse(p2, second);
    CHECK(first.str() == second.str());
}

TEST_CASE("validation rejects malformed problems") {
    SdpProblem p;
    p.block_sides = {2};
    ComplexMatrix nh(2, 2);
    nh(0, 1) = 1.0;  // not hermitian
    p.objective.blocks = {nh};
    CHECK_THROWS_AS(solve(p), std::invalid_argument);

    SdpProblem q;
    q.block_sides = {2};
    ComplexMatrix bad = ComplexMatrix::identity(2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    q.objective.blocks = {bad};
    CHECK_THROWS_AS(solve(q), std::invalid_argument);
}
