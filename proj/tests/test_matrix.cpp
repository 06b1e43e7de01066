#include "doctest.h"

#include <random>

#include "nlq/matrix.hpp"
#include "test_util.hpp"

using namespace nlq;

TEST_CASE("kron reproduces hand-computed pauli products") {
    ComplexMatrix sx(2, 2), sz(2, 2);
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;

    const ComplexMatrix k = kron(sx, sz);
    CHECK(k.rows() == 4);
    CHECK(k(0, 2) == cdouble(1.0));
    CHECK(k(1, 3) == cdouble(-1.0));
    CHECK(k(2, 0) == cdouble(1.0));
    CHECK(k(3, 1) == cdouble(-1.0));
    CHECK(k(0, 0) == cdouble(0.0));
}

TEST_CASE("kron is associative") {
    std::mt19937_64 rng(11);
    const auto a = testutil::random_matrix(2, rng);
    const auto b = testutil::random_matrix(3, rng);
    const auto c = testutil::random_matrix(2, rng);
    const auto lhs = kron(kron(a, b), c);
    const auto rhs = kron(a, kron(b, c));
    CHECK((lhs - rhs).max_abs() < 1e-12);
}

TEST_CASE("partial trace keeps trace and factors products") {
    std::mt19937_64 rng(12);
    const auto a = testutil::random_hermitian(2, rng);
    const auto b = testutil::random_hermitian(3, rng);
    const auto prod = kron(a, b);

    const auto ta = partial_trace(prod, {2, 3}, {0});
    ComplexMatrix expect_a = a;
    expect_a *= b.trace();
    CHECK((ta - expect_a).max_abs() < 1e-12);

    const auto tb = partial_trace(prod, {2, 3}, {1});
    ComplexMatrix expect_b = b;
    expect_b *= a.trace();
    CHECK((tb - expect_b).max_abs() < 1e-12);

    const auto full = testutil::random_hermitian(6, rng);
    CHECK(std::abs(partial_trace(full, {2, 3}, {0}).trace() - full.trace()) < 1e-12);
}

TEST_CASE("partial trace over middle factor of three") {
    std::mt19937_64 rng(13);
    const auto a = testutil::random_hermitian(2, rng);
    const auto b = testutil::random_hermitian(2, rng);
    const auto c = testutil::random_hermitian(3, rng);
    const auto prod = kron(kron(a, b), c);
    const auto kept = partial_trace(prod, {2, 2, 3}, {0, 2});
    ComplexMatrix expect = kron(a, c);
    expect *= b.trace();
    CHECK((kept - expect).max_abs() < 1e-12);
}

TEST_CASE("partial trace is linear") {
    std::mt19937_64 rng(14);
    const auto x = testutil::random_hermitian(6, rng);
    const auto y = testutil::random_hermitian(6, rng);
    ComplexMatrix combo = x;
    combo *= 0.3;
    {
        ComplexMatrix y2 = y;
        y2 *= 1.7;
        combo += y2;
    }
    auto lhs = partial_trace(combo, {2, 3}, {1});
    ComplexMatrix rhs = partial_trace(x, {2, 3}, {1});
    rhs *= 0.3;
    {
        ComplexMatrix t = partial_trace(y, {2, 3}, {1});
        t *= 1.7;
        rhs += t;
    }
    CHECK((lhs - rhs).max_abs() < 1e-12);
}

TEST_CASE("hermitian eigensolver round trip") {
    std::mt19937_64 rng(15);
    for (std::size_t n : {2, 5, 9, 16}) {
        const auto h = testutil::random_hermitian(n, rng);
        const auto e = eig_hermitian(h);

        for (std::size_t i = 0; i + 1 < n; ++i) CHECK(e.values[i] <= e.values[i + 1]);

        ComplexMatrix recon(n, n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    recon(i, j) += e.values[k] * e.vectors(i, k) * std::conj(e.vectors(j, k));
        CHECK((recon - h).max_abs() < 1e-9 * (1.0 + h.max_abs()));

        const ComplexMatrix gram = e.vectors.adjoint() * e.vectors;
        CHECK((gram - ComplexMatrix::identity(n)).max_abs() < 1e-10);

        double tr = 0.0;
        for (double v : e.values) tr += v;
        CHECK(std::abs(tr - h.trace().real()) < 1e-9 * (1.0 + h.max_abs()));
    }
}

TEST_CASE("pauli x spectrum") {
    ComplexMatrix sx(2, 2);
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    const auto e = eig_hermitian(sx);
    CHECK(e.values[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-site hermitian basis is orthonormal and complete") {
    for (std::size_t d : {2, 3, 4}) {
        const auto basis = hermitian_basis_single(d);
        REQUIRE(basis.size() == d * d);

        ComplexMatrix scaled_id = ComplexMatrix::identity(d);
        scaled_id *= 1.0 / std::sqrt(double(d));
        CHECK((basis[0] - scaled_id).max_abs() < 1e-14);

        for (std::size_t i = 0; i < basis.size(); ++i) {
            CHECK(basis[i].hermiticity_defect() < 1e-14);
            if (i > 0) CHECK(std::abs(basis[i].trace()) < 1e-14);
            for (std::size_t j = i; j < basis.size(); ++j) {
                const double ip = hs_inner(basis[i], basis[j]);
                CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-12);
            }
        }

        std::mt19937_64 rng(16 + d);
        const auto m = testutil::random_hermitian(d, rng);
        ComplexMatrix recon(d, d);
        for (const auto& g : basis) {
            ComplexMatrix t = g;
            t *= hs_inner(g, m);
            recon += t;
        }
        CHECK((recon - m).max_abs() < 1e-10);
    }
}

TEST_CASE("product basis ordering and reconstruction") {
    const auto basis = hermitian_product_basis(2, 3);
    REQUIRE(basis.elements.size() == 36);
    CHECK(basis.dim == 6);

    ComplexMatrix scaled_id = ComplexMatrix::identity(6);
    scaled_id *= 1.0 / std::sqrt(6.0);
    CHECK((basis.elements[0] - scaled_id).max_abs() < 1e-14);

    std::mt19937_64 rng(21);
    const auto m = testutil::random_hermitian(6, rng);
    ComplexMatrix recon(6, 6);
    for (const auto& g : basis.elements) {
        ComplexMatrix t = g;
        t *= hs_inner(g, m);
        recon += t;
    }
    CHECK((recon - m).max_abs() < 1e-10);
}

TEST_CASE("adjoint and hermitized behave") {
    std::mt19937_64 rng(22);
    const auto m = testutil::random_matrix(4, rng);
    CHECK((m.adjoint().adjoint() - m).max_abs() < 1e-15);
    const auto h = m.hermitized();
    CHECK(h.hermiticity_defect() < 1e-15);
}
