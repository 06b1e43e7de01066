#include "nlq/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nlq {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("matrix shape mismatch in +=");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("matrix shape mismatch in -=");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cdouble s) {
    for (auto& v : a_) v *= s;
    return *this;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

ComplexMatrix ComplexMatrix::conjugate() const {
    ComplexMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = std::conj(a_[i]);
    return r;
}

cdouble ComplexMatrix::trace() const {
    if (rows_ != cols_) throw std::invalid_argument("trace of non-square matrix");
    cdouble t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

double ComplexMatrix::hermiticity_defect() const {
    if (rows_ != cols_) throw std::invalid_argument("hermiticity of non-square matrix");
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i; j < cols_; ++j)
            m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
}

ComplexMatrix ComplexMatrix::hermitized() const {
    if (rows_ != cols_) throw std::invalid_argument("hermitized of non-square matrix");
    ComplexMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            r(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return r;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { a += b; return a; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { a -= b; return a; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix shape mismatch in *");
    ComplexMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cdouble aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    }
    return r;
}

ComplexMatrix operator*(cdouble s, ComplexMatrix a) { a *= s; return a; }

double hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("matrix shape mismatch in hs_inner");
    double s = 0.0;
    const auto& x = a.data();
    const auto& y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    return s;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cdouble aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
    const std::size_t nf = dims.size();
    std::size_t total = 1;
    for (auto d : dims) total *= d;
    if (m.rows() != total || m.cols() != total)
        throw std::invalid_argument("partial_trace: dims do not match matrix size");
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] >= nf || (i > 0 && keep[i] <= keep[i - 1]))
            throw std::invalid_argument("partial_trace: keep must be strictly increasing factor indices");
    }

    std::vector<std::size_t> strides(nf, 1);
    for (std::size_t i = nf; i-- > 1;) strides[i - 1] = strides[i] * dims[i];

    std::vector<std::size_t> traced;
    for (std::size_t i = 0; i < nf; ++i)
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) traced.push_back(i);

    std::size_t dkeep = 1, dtr = 1;
    for (auto i : keep) dkeep *= dims[i];
    for (auto i : traced) dtr *= dims[i];

    // Offset of kept multi-index r (mixed radix over kept factors) into the
    // full index space; same for traced factors.
    auto offset = [&](const std::vector<std::size_t>& which, std::size_t lin) {
        std::size_t off = 0;
        for (std::size_t i = which.size(); i-- > 0;) {
            const std::size_t d = dims[which[i]];
            off += (lin % d) * strides[which[i]];
            lin /= d;
        }
        return off;
    };

    std::vector<std::size_t> koff(dkeep), toff(dtr);
    for (std::size_t r = 0; r < dkeep; ++r) koff[r] = offset(keep, r);
    for (std::size_t t = 0; t < dtr; ++t) toff[t] = offset(traced, t);

    ComplexMatrix out(dkeep, dkeep);
    for (std::size_t r = 0; r < dkeep; ++r)
        for (std::size_t c = 0; c < dkeep; ++c) {
            cdouble s = 0.0;
            for (std::size_t t = 0; t < dtr; ++t)
                s += m(koff[r] + toff[t], koff[c] + toff[t]);
            out(r, c) = s;
        }
    return out;
}

EigResult eig_hermitian(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("eig_hermitian: non-square matrix");
    const std::size_t n = h.rows();
    ComplexMatrix a = h.hermitized();
    ComplexMatrix v = ComplexMatrix::identity(n);

    if (n == 0) return {{}, v};
    if (n == 1) return {{a(0, 0).real()}, v};

    double scale = a.max_abs();
    if (scale == 0.0) scale = 1.0;

    // One Jacobi rotation per off-diagonal pair per sweep; quadratic
    // convergence once the off-diagonal mass is small.
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-15 * scale) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cdouble apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-18 * scale) continue;

                // Phase u makes the pivot real; then a standard symmetric
                // 2x2 rotation annihilates it.
                const cdouble u = apq / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                double t;
                if (tau >= 0.0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cdouble su = s * u;

                // Columns transform by G = [[c, su],[-conj(su), c]] acting on (p,q).
                for (std::size_t i = 0; i < n; ++i) {
                    const cdouble aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - std::conj(su) * aiq;
                    a(i, q) = su * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const cdouble apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - su * aqj;
                    a(q, j) = std::conj(su) * apj + c * aqj;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = cdouble(a(p, p).real(), 0.0);
                a(q, q) = cdouble(a(q, q).real(), 0.0);

                for (std::size_t i = 0; i < n; ++i) {
                    const cdouble vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - std::conj(su) * viq;
                    v(i, q) = su * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });

    EigResult r;
    r.values.resize(n);
    r.vectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        r.values[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) r.vectors(i, j) = v(i, order[j]);
    }
    return r;
}

std::vector<ComplexMatrix> hermitian_basis_single(std::size_t d) {
    if (d < 1) throw std::invalid_argument("hermitian_basis_single: dimension must be positive");
    std::vector<ComplexMatrix> basis;
    basis.reserve(d * d);

    ComplexMatrix id = ComplexMatrix::identity(d);
    id *= 1.0 / std::sqrt(double(d));
    basis.push_back(id);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t j = 0; j + 1 < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) {
            ComplexMatrix m(d, d);
            m(j, k) = inv_sqrt2;
            m(k, j) = inv_sqrt2;
            basis.push_back(m);
        }
    for (std::size_t j = 0; j + 1 < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) {
            ComplexMatrix m(d, d);
            m(j, k) = cdouble(0.0, -inv_sqrt2);
            m(k, j) = cdouble(0.0, inv_sqrt2);
            basis.push_back(m);
        }
    for (std::size_t l = 1; l < d; ++l) {
        ComplexMatrix m(d, d);
        const double norm = 1.0 / std::sqrt(double(l) * double(l + 1));
        for (std::size_t k = 0; k < l; ++k) m(k, k) = norm;
        m(l, l) = -double(l) * norm;
        basis.push_back(m);
    }
    return basis;
}

HermitianBasis hermitian_product_basis(std::size_t da, std::size_t db) {
    HermitianBasis out;
    out.dim = da * db;
    const auto ba = hermitian_basis_single(da);
    const auto bb = hermitian_basis_single(db);
    out.elements.reserve(ba.size() * bb.size());
    for (const auto& ga : ba)
        for (const auto& gb : bb) out.elements.push_back(kron(ga, gb));
    return out;
}

}  // namespace nlq
