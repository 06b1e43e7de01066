#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace nlq {

using cdouble = std::complex<double>;

// Dense row-major complex matrix. Small sizes only (everything in this
// project stays below a few hundred rows), so no blocking or expression
// templates; plain loops are fast enough and keep results deterministic.
class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols) {}

    static ComplexMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cdouble& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const cdouble& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    const std::vector<cdouble>& data() const { return a_; }
    std::vector<cdouble>& data() { return a_; }

    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix& operator*=(cdouble s);

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conjugate() const;

    cdouble trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    // Largest deviation |M - M^dagger| over all entries.
    double hermiticity_defect() const;
    // (M + M^dagger)/2
    ComplexMatrix hermitized() const;

private:
    std::size_t rows_, cols_;
    std::vector<cdouble> a_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cdouble s, ComplexMatrix a);

// Re Tr[A^dagger B]; the real Hilbert-Schmidt inner product on Hermitian
// matrices. Exact for Hermitian arguments, used everywhere constraints live.
double hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Trace out every tensor factor not listed in `keep`. `dims` are the factor
// dimensions in tensor order, `keep` is a strictly increasing index list.
// Result dimension is the product of the kept factors, in their tensor order.
ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

struct EigResult {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // columns; m = V diag(values) V^dagger
};

// Cyclic Jacobi for Hermitian matrices. Deterministic sweep order, no
// pivot search, so repeated runs give bit-identical output.
EigResult eig_hermitian(const ComplexMatrix& h);

// Orthonormal Hermitian basis of d x d matrices: identity/sqrt(d) first,
// then symmetric pairs (row-major over j<k), antisymmetric pairs, then the
// d-1 diagonal traceless elements. All unit norm in hs_inner.
std::vector<ComplexMatrix> hermitian_basis_single(std::size_t d);

struct HermitianBasis {
    std::size_t dim = 0;                  // da*db
    std::vector<ComplexMatrix> elements;  // lex over (a index, b index)
};

// Product basis g_i (x) g_j of the two single-site bases. Element 0 is
// I/sqrt(da*db); elements 1..(da*db)^2-1 are traceless.
HermitianBasis hermitian_product_basis(std::size_t da, std::size_t db);

}  // namespace nlq
