#include "nlq/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nlq {

namespace {

// ---------------------------------------------------------------------------
// Dense real symmetric kernel. Everything the interior-point loop touches is
// real; complex blocks enter through the [[Re,-Im],[Im,Re]] embedding.
// ---------------------------------------------------------------------------

struct RMat {
    std::size_t n = 0;
    std::vector<double> a;  // row-major, full storage

    RMat() = default;
    explicit RMat(std::size_t side) : n(side), a(side * side, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

RMat rm_identity(std::size_t n, double s = 1.0) {
    RMat m(n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = s;
    return m;
}

void rm_axpy(double alpha, const RMat& x, RMat& y) {
    for (std::size_t i = 0; i < x.a.size(); ++i) y.a[i] += alpha * x.a[i];
}

void rm_scal(double alpha, RMat& x) {
    for (auto& v : x.a) v *= alpha;
}

double rm_dot(const RMat& x, const RMat& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.a.size(); ++i) s += x.a[i] * y.a[i];
    return s;
}

double rm_maxabs(const RMat& x) {
    double m = 0.0;
    for (double v : x.a) m = std::max(m, std::abs(v));
    return m;
}

void rm_symmetrize(RMat& x) {
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = i + 1; j < x.n; ++j) {
            const double v = 0.5 * (x.at(i, j) + x.at(j, i));
            x.at(i, j) = v;
            x.at(j, i) = v;
        }
}

RMat rm_mul(const RMat& a, const RMat& b) {
    const std::size_t n = a.n;
    RMat c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = &a.a[i * n];
        double* crow = &c.a[i * n];
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &b.a[k * n];
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// Lower Cholesky; returns false when a pivot is not strictly positive.
bool rm_cholesky(const RMat& a, RMat& l) {
    const std::size_t n = a.n;
    l = RMat(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l.at(j, k) * l.at(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double r = std::sqrt(d);
        l.at(j, j) = r;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            l.at(i, j) = s / r;
        }
    }
    return true;
}

bool rm_posdef(const RMat& a) {
    RMat l;
    return rm_cholesky(a, l);
}

// A^{-1} from the Cholesky factor: inverts L by forward substitution, then
// forms L^{-T} L^{-1} and symmetrizes.
bool rm_spd_inverse(const RMat& a, RMat& inv) {
    RMat l;
    if (!rm_cholesky(a, l)) return false;
    const std::size_t n = a.n;
    RMat linv(n);
    for (std::size_t col = 0; col < n; ++col) {
        linv.at(col, col) = 1.0 / l.at(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = col; k < i; ++k) s += l.at(i, k) * linv.at(k, col);
            linv.at(i, col) = -s / l.at(i, i);
        }
    }
    inv = RMat(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < n; ++k) s += linv.at(k, i) * linv.at(k, j);
            inv.at(i, j) = s;
            inv.at(j, i) = s;
        }
    return true;
}

struct RealEig {
    std::vector<double> values;  // ascending
    RMat vectors;
};

// Cyclic Jacobi on a real symmetric matrix; same scheme as the complex one
// in matrix.cpp minus the phase factor.
RealEig rm_eig(const RMat& m) {
    const std::size_t n = m.n;
    RMat a = m;
    rm_symmetrize(a);
    RMat v = rm_identity(n);
    double scale = rm_maxabs(a);
    if (scale == 0.0) scale = 1.0;

    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a.at(p, q)));
        if (off <= 1e-15 * scale) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                const double tau = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t;
                if (tau >= 0.0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - s * aiq;
                    a.at(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = a.at(p, j), aqj = a.at(q, j);
                    a.at(p, j) = c * apj - s * aqj;
                    a.at(q, j) = s * apj + c * aqj;
                }
                a.at(p, q) = 0.0;
                a.at(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = c * vip - s * viq;
                    v.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a.at(x, x) < a.at(y, y); });
    RealEig r;
    r.values.resize(n);
    r.vectors = RMat(n);
    for (std::size_t j = 0; j < n; ++j) {
        r.values[j] = a.at(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) r.vectors.at(i, j) = v.at(i, order[j]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Block-diagonal collections of RMats.
// ---------------------------------------------------------------------------

using BlockReal = std::vector<RMat>;

BlockReal br_zero(const std::vector<std::size_t>& sides) {
    BlockReal b;
    b.reserve(sides.size());
    for (auto s : sides) b.emplace_back(s);
    return b;
}

BlockReal br_identity(const std::vector<std::size_t>& sides, double s) {
    BlockReal b;
    b.reserve(sides.size());
    for (auto n : sides) b.push_back(rm_identity(n, s));
    return b;
}

double br_dot(const BlockReal& a, const BlockReal& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += rm_dot(a[i], b[i]);
    return s;
}

void br_axpy(double alpha, const BlockReal& x, BlockReal& y) {
    for (std::size_t i = 0; i < x.size(); ++i) rm_axpy(alpha, x[i], y[i]);
}

void br_scal(double alpha, BlockReal& x) {
    for (auto& m : x) rm_scal(alpha, m);
}

double br_maxabs(const BlockReal& x) {
    double m = 0.0;
    for (const auto& b : x) m = std::max(m, rm_maxabs(b));
    return m;
}

double br_frob(const BlockReal& x) {
    double s = 0.0;
    for (const auto& b : x) s += rm_dot(b, b);
    return std::sqrt(s);
}

void br_symmetrize(BlockReal& x) {
    for (auto& b : x) rm_symmetrize(b);
}

// ---------------------------------------------------------------------------
// Real embedding of the complex problem plus row orthonormalization.
// ---------------------------------------------------------------------------

RMat embed_block(const ComplexMatrix& m, double scale) {
    const std::size_t n = m.rows();
    RMat r(2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cdouble v = m(i, j);
            r.at(i, j) = scale * v.real();
            r.at(i + n, j + n) = scale * v.real();
            r.at(i, j + n) = -scale * v.imag();
            r.at(i + n, j) = scale * v.imag();
        }
    return r;
}

RMat real_block(const ComplexMatrix& m) {
    RMat r(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r.at(i, j) = m(i, j).real();
    return r;
}

bool block_has_imaginary(const SdpProblem& p, std::size_t b) {
    auto any_imag = [&](const ComplexMatrix& m) {
        for (const auto& v : m.data())
            if (v.imag() != 0.0) return true;
        return false;
    };
    if (any_imag(p.objective.blocks[b])) return true;
    for (const auto& c : p.constraints)
        if (any_imag(c.mat.blocks[b])) return true;
    return false;
}

// Complex block recovered from its embedding by averaging the two real
// copies; `scale` undoes the 1/2 applied to data blocks.
ComplexMatrix extract_block(const RMat& r, bool embedded, double scale) {
    if (!embedded) {
        ComplexMatrix m(r.n, r.n);
        for (std::size_t i = 0; i < r.n; ++i)
            for (std::size_t j = 0; j < r.n; ++j) m(i, j) = scale * 0.5 * (r.at(i, j) + r.at(j, i));
        return m;
    }
    const std::size_t n = r.n / 2;
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double re = 0.5 * (r.at(i, j) + r.at(i + n, j + n));
            const double im = 0.5 * (r.at(i + n, j) - r.at(i, j + n));
            m(i, j) = scale * cdouble(re, im);
        }
    return m.hermitized();
}

struct RealProblem {
    std::vector<std::size_t> sides;    // after embedding
    std::vector<bool> embedded;        // per block
    BlockReal c;
    std::vector<BlockReal> rows;       // orthonormal constraint rows
    std::vector<double> rhs;           // rhs after the same row operations
    std::vector<std::vector<double>> back_map;  // y_orig = back_map^T * y_hat
    std::size_t m_orig = 0;

    bool inconsistent = false;
    std::vector<double> farkas_y;      // set when dependent rows conflict
};

void validate_problem(const SdpProblem& p) {
    const std::size_t nb = p.block_sides.size();
    if (nb == 0) throw std::invalid_argument("sdp: problem has no blocks");
    for (auto s : p.block_sides)
        if (s < 1) throw std::invalid_argument("sdp: block side must be positive");
    auto check_bm = [&](const BlockMatrix& bm, const std::string& what) {
        if (bm.blocks.size() != nb)
            throw std::invalid_argument("sdp: " + what + " has wrong block count");
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& m = bm.blocks[b];
            if (m.rows() != p.block_sides[b] || m.cols() != p.block_sides[b])
                throw std::invalid_argument("sdp: " + what + " block size mismatch");
            for (const auto& v : m.data())
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw std::invalid_argument("sdp: " + what + " has a non-finite entry");
            const double defect = m.hermiticity_defect();
            if (defect > 1e-12 * (1.0 + m.max_abs())) {
                std::ostringstream os;
                os << "sdp: " << what << " block " << b << " not hermitian (defect " << defect << ")";
                throw std::invalid_argument(os.str());
            }
        }
    };
    check_bm(p.objective, "objective");
    for (std::size_t k = 0; k < p.constraints.size(); ++k) {
        std::ostringstream name;
        name << "constraint " << k;
        check_bm(p.constraints[k].mat, name.str());
        if (!std::isfinite(p.constraints[k].rhs))
            throw std::invalid_argument("sdp: constraint rhs not finite");
    }
}

BlockReal embed_data(const BlockMatrix& bm, const std::vector<bool>& emb) {
    BlockReal out;
    out.reserve(bm.blocks.size());
    for (std::size_t b = 0; b < bm.blocks.size(); ++b) {
        if (emb[b])
            out.push_back(embed_block(bm.blocks[b], 0.5));
        else
            out.push_back(real_block(bm.blocks[b]));
    }
    return out;
}

RealProblem embed_and_reduce(const SdpProblem& p) {
    RealProblem rp;
    const std::size_t nb = p.block_sides.size();
    rp.embedded.resize(nb);
    rp.sides.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        rp.embedded[b] = block_has_imaginary(p, b);
        rp.sides[b] = rp.embedded[b] ? 2 * p.block_sides[b] : p.block_sides[b];
    }
    rp.c = embed_data(p.objective, rp.embedded);
    rp.m_orig = p.constraints.size();

    double bmax = 0.0;
    for (const auto& c : p.constraints) bmax = std::max(bmax, std::abs(c.rhs));

    // Modified Gram-Schmidt with one re-orthogonalization pass. Dependent
    // rows either drop silently (rhs consistent) or yield a Farkas vector.
    for (std::size_t k = 0; k < p.constraints.size(); ++k) {
        BlockReal v = embed_data(p.constraints[k].mat, rp.embedded);
        double bv = p.constraints[k].rhs;
        std::vector<double> t(p.constraints.size(), 0.0);
        t[k] = 1.0;
        const double orig_norm = br_frob(v);

        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < rp.rows.size(); ++j) {
                const double cj = br_dot(rp.rows[j], v);
                if (cj == 0.0) continue;
                br_axpy(-cj, rp.rows[j], v);
                bv -= cj * rp.rhs[j];
                for (std::size_t l = 0; l < t.size(); ++l) t[l] -= cj * rp.back_map[j][l];
            }
        }

        const double norm = br_frob(v);
        if (norm <= 1e-12 * std::max(1.0, orig_norm)) {
            if (std::abs(bv) > 1e-8 * (1.0 + bmax)) {
                rp.inconsistent = true;
                rp.farkas_y = t;
                const double sign = bv > 0.0 ? 1.0 : -1.0;
                for (auto& w : rp.farkas_y) w *= sign / std::abs(bv);
                return rp;
            }
            continue;  // redundant row
        }
        br_scal(1.0 / norm, v);
        bv /= norm;
        for (auto& w : t) w /= norm;
        rp.rows.push_back(std::move(v));
        rp.rhs.push_back(bv);
        rp.back_map.push_back(std::move(t));
    }
    return rp;
}

std::vector<double> apply_rows(const RealProblem& rp, const BlockReal& x) {
    std::vector<double> out(rp.rows.size());
    for (std::size_t k = 0; k < rp.rows.size(); ++k) out[k] = br_dot(rp.rows[k], x);
    return out;
}

BlockReal adjoint_rows(const RealProblem& rp, const std::vector<double>& y) {
    BlockReal out = br_zero(rp.sides);
    for (std::size_t k = 0; k < rp.rows.size(); ++k)
        if (y[k] != 0.0) br_axpy(y[k], rp.rows[k], out);
    return out;
}

// Largest alpha in (0, cap] keeping X + alpha dX and S + alpha dS positive
// definite and tau, kappa positive. Cholesky bisection; deterministic.
double max_step(const BlockReal& x, const BlockReal& dx, const BlockReal& s,
                const BlockReal& ds, double tau, double dtau, double kappa,
                double dkappa, double cap) {
    auto ok = [&](double a) {
        if (tau + a * dtau <= 0.0 || kappa + a * dkappa <= 0.0) return false;
        for (std::size_t b = 0; b < x.size(); ++b) {
            RMat probe = x[b];
            rm_axpy(a, dx[b], probe);
            if (!rm_posdef(probe)) return false;
            probe = s[b];
            rm_axpy(a, ds[b], probe);
            if (!rm_posdef(probe)) return false;
        }
        return true;
    };
    if (ok(cap)) return cap;
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

struct IpState {
    BlockReal x, s;
    std::vector<double> y;
    double tau = 1.0, kappa = 1.0;
};

struct IpResult {
    SolveStatus status = SolveStatus::numerical_failure;
    IpState state;
    std::size_t iterations = 0;
};

struct Direction {
    BlockReal dx, ds;
    std::vector<double> dy;
    double dtau = 0.0, dkappa = 0.0;
    bool ok = false;
};

// Shared per-iteration quantities for both predictor and corrector solves.
struct IterContext {
    BlockReal sinv;
    BlockReal xcsinv;              // X C S^{-1}
    std::vector<BlockReal> w;      // W_l = X A_l S^{-1}
    RMat mchol;                    // Cholesky factor of the Schur complement
    std::vector<double> u;         // A(X C S^{-1}) + b
    double t_c = 0.0;              // <C, X C S^{-1}>
    bool ok = false;
};

std::vector<double> chol_solve_vec(const RMat& l, std::vector<double> r) {
    const std::size_t n = l.n;
    for (std::size_t i = 0; i < n; ++i) {
        double s = r[i];
        for (std::size_t k = 0; k < i; ++k) s -= l.at(i, k) * r[k];
        r[i] = s / l.at(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = r[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l.at(k, i) * r[k];
        r[i] = s / l.at(i, i);
    }
    return r;
}

IterContext build_context(const RealProblem& rp, const IpState& st) {
    IterContext ctx;
    const std::size_t m = rp.rows.size();
    ctx.sinv.reserve(st.s.size());
    for (const auto& sb : st.s) {
        RMat inv;
        if (!rm_spd_inverse(sb, inv)) return ctx;
        ctx.sinv.push_back(std::move(inv));
    }

    ctx.xcsinv = br_zero(rp.sides);
    for (std::size_t b = 0; b < rp.sides.size(); ++b)
        ctx.xcsinv[b] = rm_mul(st.x[b], rm_mul(rp.c[b], ctx.sinv[b]));

    ctx.w.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
        ctx.w[l] = br_zero(rp.sides);
        for (std::size_t b = 0; b < rp.sides.size(); ++b)
            ctx.w[l][b] = rm_mul(st.x[b], rm_mul(rp.rows[l][b], ctx.sinv[b]));
    }

    RMat schur(m);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = k; l < m; ++l) {
            const double v = br_dot(rp.rows[k], ctx.w[l]);
            schur.at(k, l) = v;
            schur.at(l, k) = v;
        }
    if (m > 0) {
        if (!rm_cholesky(schur, ctx.mchol)) {
            // tiny regularization, then give up if still not positive
            for (std::size_t i = 0; i < m; ++i)
                schur.at(i, i) += 1e-12 * (1.0 + schur.at(i, i));
            if (!rm_cholesky(schur, ctx.mchol)) return ctx;
        }
    }

    ctx.u.resize(m);
    for (std::size_t k = 0; k < m; ++k)
        ctx.u[k] = br_dot(rp.rows[k], ctx.xcsinv) + rp.rhs[k];
    ctx.t_c = br_dot(rp.c, ctx.xcsinv);
    ctx.ok = true;
    return ctx;
}

// One Newton solve of the homogeneous KKT system with HKM scaling.
// eta scales the residual reduction, sigma_mu is the complementarity target,
// corr_* carry the Mehrotra second-order terms (empty for the predictor).
Direction newton_direction(const RealProblem& rp, const IpState& st, const IterContext& ctx,
                           double eta, double sigma_mu, const BlockReal* corr_xs,
                           double corr_tk) {
    Direction d;
    const std::size_t m = rp.rows.size();

    // residuals: rp = A(X) - tau b, rd = A*(y) + S - tau C
    std::vector<double> rp_vec = apply_rows(rp, st.x);
    for (std::size_t k = 0; k < m; ++k) rp_vec[k] -= st.tau * rp.rhs[k];
    BlockReal rd = br_zero(rp.sides);
    br_axpy(-st.tau, rp.c, rd);
    {
        BlockReal ay = adjoint_rows(rp, st.y);
        br_axpy(1.0, ay, rd);
        br_axpy(1.0, st.s, rd);
    }
    const double rg = br_dot(rp.c, st.x) -
                      std::inner_product(rp.rhs.begin(), rp.rhs.end(), st.y.begin(), 0.0) +
                      st.kappa;

    // G = sigma_mu S^{-1} - X - corr S^{-1} + eta X Rd S^{-1}
    BlockReal g = br_zero(rp.sides);
    for (std::size_t b = 0; b < rp.sides.size(); ++b) {
        g[b] = ctx.sinv[b];
        rm_scal(sigma_mu, g[b]);
        rm_axpy(-1.0, st.x[b], g[b]);
        if (corr_xs) {
            RMat t = rm_mul((*corr_xs)[b], ctx.sinv[b]);
            rm_axpy(-1.0, t, g[b]);
        }
        if (eta != 0.0) {
            RMat t = rm_mul(st.x[b], rm_mul(rd[b], ctx.sinv[b]));
            rm_axpy(eta, t, g[b]);
        }
    }

    std::vector<double> ag = apply_rows(rp, g);
    std::vector<double> z0(m), z1(m);
    for (std::size_t k = 0; k < m; ++k) z0[k] = -eta * rp_vec[k] - ag[k];
    if (m > 0) {
        z0 = chol_solve_vec(ctx.mchol, z0);
        z1 = chol_solve_vec(ctx.mchol, ctx.u);
    }

    const double rhs2 = -eta * rg - br_dot(rp.c, g) - (sigma_mu - st.tau * st.kappa - corr_tk) / st.tau;
    double u2z0 = 0.0, u2z1 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double u2 = ctx.u[k] - 2.0 * rp.rhs[k];
        u2z0 += u2 * z0[k];
        u2z1 += u2 * z1[k];
    }
    const double den = u2z1 - ctx.t_c - st.kappa / st.tau;
    if (den == 0.0 || !std::isfinite(den)) return d;
    d.dtau = (rhs2 - u2z0) / den;
    if (!std::isfinite(d.dtau)) return d;

    d.dy.resize(m);
    for (std::size_t k = 0; k < m; ++k) d.dy[k] = z0[k] + d.dtau * z1[k];

    // dS = -eta Rd + C dtau - A*(dy)
    d.ds = br_zero(rp.sides);
    br_axpy(-eta, rd, d.ds);
    br_axpy(d.dtau, rp.c, d.ds);
    {
        BlockReal ady = adjoint_rows(rp, d.dy);
        br_axpy(-1.0, ady, d.ds);
    }

    // dX = G - dtau X C S^{-1} + sum_l dy_l W_l, then symmetrize
    d.dx = g;
    br_axpy(-d.dtau, ctx.xcsinv, d.dx);
    for (std::size_t l = 0; l < m; ++l)
        if (d.dy[l] != 0.0) br_axpy(d.dy[l], ctx.w[l], d.dx);
    br_symmetrize(d.dx);

    d.dkappa = (sigma_mu - st.tau * st.kappa - corr_tk - st.kappa * d.dtau) / st.tau;
    d.ok = std::isfinite(d.dkappa);
    return d;
}

IpResult ip_solve(const RealProblem& rp, const SolveOptions& opts) {
    IpResult out;
    const std::size_t m = rp.rows.size();
    std::size_t ntot = 0;
    for (auto s : rp.sides) ntot += s;

    double bmax = 0.0;
    for (double v : rp.rhs) bmax = std::max(bmax, std::abs(v));
    const double cmax = br_maxabs(rp.c);
    const double s0 = 1.0 + bmax + cmax;

    IpState st;
    st.x = br_identity(rp.sides, s0);
    st.s = br_identity(rp.sides, s0);
    st.y.assign(m, 0.0);
    st.tau = 1.0;
    st.kappa = s0 * s0;

    for (std::size_t iter = 0; iter <= opts.max_iterations; ++iter) {
        out.iterations = iter;
        out.state = st;

        // convergence metrics at the scaled point
        const double inv_tau = 1.0 / st.tau;
        std::vector<double> ax = apply_rows(rp, st.x);
        double pres = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            pres = std::max(pres, std::abs(ax[k] * inv_tau - rp.rhs[k]));
        pres /= 1.0 + bmax;

        BlockReal dres_mat = br_zero(rp.sides);
        br_axpy(1.0, rp.c, dres_mat);
        {
            BlockReal ay = adjoint_rows(rp, st.y);
            br_axpy(-inv_tau, ay, dres_mat);
            br_axpy(-inv_tau, st.s, dres_mat);
        }
        const double dres = br_maxabs(dres_mat) / (1.0 + cmax);

        const double pobj = br_dot(rp.c, st.x) * inv_tau;
        const double dobj =
            std::inner_product(rp.rhs.begin(), rp.rhs.end(), st.y.begin(), 0.0) * inv_tau;
        const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (pres <= opts.feas_tol && dres <= opts.feas_tol && gap <= opts.gap_tol) {
            out.status = SolveStatus::optimal;
            return out;
        }

        if (st.tau < 1e-8 * st.kappa) {
            const double by =
                std::inner_product(rp.rhs.begin(), rp.rhs.end(), st.y.begin(), 0.0);
            BlockReal ys = adjoint_rows(rp, st.y);
            br_axpy(1.0, st.s, ys);  // A*(y) + S, should vanish for a primal ray
            if (by > 0.0 && br_maxabs(ys) <= 1e-6 * by) {
                for (auto& v : out.state.y) v /= by;
                br_scal(1.0 / by, out.state.s);
                out.status = SolveStatus::primal_infeasible;
                return out;
            }
            const double cx = br_dot(rp.c, st.x);
            double axmax = 0.0;
            for (double v : ax) axmax = std::max(axmax, std::abs(v));
            if (cx < 0.0 && axmax <= 1e-6 * (-cx)) {
                br_scal(-1.0 / cx, out.state.x);
                out.status = SolveStatus::dual_infeasible;
                return out;
            }
            out.status = SolveStatus::numerical_failure;
            return out;
        }

        if (iter == opts.max_iterations) break;

        const double mu = (br_dot(st.x, st.s) + st.tau * st.kappa) / double(ntot + 1);
        if (!(mu > 0.0) || !std::isfinite(mu)) {
            out.status = SolveStatus::numerical_failure;
            return out;
        }

        IterContext ctx = build_context(rp, st);
        if (!ctx.ok) {
            out.status = SolveStatus::numerical_failure;
            return out;
        }

        Direction aff = newton_direction(rp, st, ctx, 1.0, 0.0, nullptr, 0.0);
        if (!aff.ok) {
            out.status = SolveStatus::numerical_failure;
            return out;
        }
        const double alpha_aff = max_step(st.x, aff.dx, st.s, aff.ds, st.tau, aff.dtau,
                                          st.kappa, aff.dkappa, 1.0);

        double dot_aff = br_dot(st.x, st.s);
        {
            // <X + a dX, S + a dS> + (tau + a dtau)(kappa + a dkappa)
            dot_aff += alpha_aff * (br_dot(aff.dx, st.s) + br_dot(st.x, aff.ds));
            dot_aff += alpha_aff * alpha_aff * br_dot(aff.dx, aff.ds);
            dot_aff += (st.tau + alpha_aff * aff.dtau) * (st.kappa + alpha_aff * aff.dkappa);
        }
        const double mu_aff = dot_aff / double(ntot + 1);
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::min(1.0, std::max(0.0, sigma));

        BlockReal corr = br_zero(rp.sides);
        for (std::size_t b = 0; b < rp.sides.size(); ++b) corr[b] = rm_mul(aff.dx[b], aff.ds[b]);
        Direction dir = newton_direction(rp, st, ctx, 1.0 - sigma, sigma * mu, &corr,
                                         aff.dtau * aff.dkappa);
        if (!dir.ok) {
            out.status = SolveStatus::numerical_failure;
            return out;
        }

        double alpha = max_step(st.x, dir.dx, st.s, dir.ds, st.tau, dir.dtau, st.kappa,
                                dir.dkappa, 1.0);
        alpha = std::min(1.0, 0.98 * alpha);
        if (alpha <= 1e-12) {
            out.status = SolveStatus::numerical_failure;
            return out;
        }

        br_axpy(alpha, dir.dx, st.x);
        br_axpy(alpha, dir.ds, st.s);
        for (std::size_t k = 0; k < m; ++k) st.y[k] += alpha * dir.dy[k];
        st.tau += alpha * dir.dtau;
        st.kappa += alpha * dir.dkappa;
        br_symmetrize(st.x);
        br_symmetrize(st.s);
    }

    out.status = SolveStatus::max_iterations;
    return out;
}

BlockMatrix extract_blocks(const RealProblem& rp, const std::vector<std::size_t>& orig_sides,
                           const BlockReal& br, double data_scale) {
    BlockMatrix out;
    out.blocks.reserve(orig_sides.size());
    for (std::size_t b = 0; b < orig_sides.size(); ++b)
        out.blocks.push_back(extract_block(br[b], rp.embedded[b], rp.embedded[b] ? data_scale : 1.0));
    return out;
}

void fill_residuals(const SdpProblem& p, SdpSolution& sol) {
    double bmax = 0.0;
    for (const auto& c : p.constraints) bmax = std::max(bmax, std::abs(c.rhs));
    double pres = 0.0;
    for (const auto& c : p.constraints) {
        double v = 0.0;
        for (std::size_t b = 0; b < p.block_sides.size(); ++b)
            v += hs_inner(c.mat.blocks[b], sol.x.blocks[b]);
        pres = std::max(pres, std::abs(v - c.rhs));
    }
    sol.primal_residual = pres / (1.0 + bmax);

    double cmax = 0.0, dres = 0.0;
    for (std::size_t b = 0; b < p.block_sides.size(); ++b) {
        ComplexMatrix r = p.objective.blocks[b];
        cmax = std::max(cmax, r.max_abs());
        for (std::size_t k = 0; k < p.constraints.size(); ++k)
            r -= cdouble(sol.y[k]) * p.constraints[k].mat.blocks[b];
        r -= sol.dual_slack.blocks[b];
        dres = std::max(dres, r.max_abs());
    }
    sol.dual_residual = dres / (1.0 + cmax);

    double pobj = 0.0, dobj = 0.0;
    for (std::size_t b = 0; b < p.block_sides.size(); ++b)
        pobj += hs_inner(p.objective.blocks[b], sol.x.blocks[b]);
    for (std::size_t k = 0; k < p.constraints.size(); ++k)
        dobj += p.constraints[k].rhs * sol.y[k];
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.duality_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
}

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::primal_infeasible: return "primal-infeasible";
        case SolveStatus::dual_infeasible: return "dual-infeasible";
        case SolveStatus::max_iterations: return "max-iterations";
        case SolveStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts) {
    validate_problem(problem);
    RealProblem rp = embed_and_reduce(problem);

    SdpSolution sol;
    if (rp.inconsistent) {
        // dependent rows with conflicting rhs: Farkas certificate, no iteration
        sol.status = SolveStatus::primal_infeasible;
        sol.y = rp.farkas_y;
        sol.x.blocks.assign(problem.block_sides.size(), ComplexMatrix());
        sol.dual_slack.blocks.assign(problem.block_sides.size(), ComplexMatrix());
        for (std::size_t b = 0; b < problem.block_sides.size(); ++b) {
            sol.x.blocks[b] = ComplexMatrix(problem.block_sides[b], problem.block_sides[b]);
            ComplexMatrix s(problem.block_sides[b], problem.block_sides[b]);
            for (std::size_t k = 0; k < problem.constraints.size(); ++k)
                s -= cdouble(sol.y[k]) * problem.constraints[k].mat.blocks[b];
            sol.dual_slack.blocks[b] = s;  // -A*(y), PSD up to roundoff (it vanishes)
        }
        fill_residuals(problem, sol);
        return sol;
    }

    IpResult ip = ip_solve(rp, opts);
    sol.status = ip.status;
    sol.iterations = ip.iterations;

    const bool scaled = ip.status == SolveStatus::optimal || ip.status == SolveStatus::max_iterations;
    const double inv_tau = scaled ? 1.0 / ip.state.tau : 1.0;

    BlockReal xr = ip.state.x;
    BlockReal sr = ip.state.s;
    br_scal(inv_tau, xr);
    br_scal(inv_tau, sr);
    sol.x = extract_blocks(rp, problem.block_sides, xr, 1.0);
    sol.dual_slack = extract_blocks(rp, problem.block_sides, sr, 2.0);

    sol.y.assign(problem.constraints.size(), 0.0);
    for (std::size_t k = 0; k < rp.rows.size(); ++k) {
        const double yk = ip.state.y[k] * inv_tau;
        if (yk == 0.0) continue;
        for (std::size_t l = 0; l < rp.back_map[k].size(); ++l)
            sol.y[l] += rp.back_map[k][l] * yk;
    }

    fill_residuals(problem, sol);
    return sol;
}

SdpProblem assemble_dual_view(const SdpProblem& problem) {
    validate_problem(problem);
    const std::size_t nb = problem.block_sides.size();
    const std::size_t m = problem.constraints.size();

    SdpProblem dual;
    dual.block_sides = problem.block_sides;
    for (std::size_t k = 0; k < m; ++k) {
        dual.block_sides.push_back(1);
        dual.block_sides.push_back(1);
    }

    auto zero_blocks = [&]() {
        BlockMatrix bm;
        for (auto s : dual.block_sides) bm.blocks.emplace_back(s, s);
        return bm;
    };

    dual.objective = zero_blocks();
    for (std::size_t k = 0; k < m; ++k) {
        dual.objective.blocks[nb + 2 * k](0, 0) = -problem.constraints[k].rhs;
        dual.objective.blocks[nb + 2 * k + 1](0, 0) = problem.constraints[k].rhs;
    }

    // S + sum_k (y+_k - y-_k) A_k = C, expanded over an orthonormal Hermitian
    // basis of every slack block.
    for (std::size_t b = 0; b < nb; ++b) {
        const auto basis = hermitian_basis_single(problem.block_sides[b]);
        for (const auto& e : basis) {
            SdpConstraint row;
            row.mat = zero_blocks();
            row.mat.blocks[b] = e;
            for (std::size_t k = 0; k < m; ++k) {
                const double c = hs_inner(e, problem.constraints[k].mat.blocks[b]);
                row.mat.blocks[nb + 2 * k](0, 0) = c;
                row.mat.blocks[nb + 2 * k + 1](0, 0) = -c;
            }
            row.rhs = hs_inner(e, problem.objective.blocks[b]);
            dual.constraints.push_back(std::move(row));
        }
    }
    return dual;
}

FeasibilityResult feasibility_oracle(const SdpProblem& problem, std::size_t iteration_cap) {
    validate_problem(problem);
    RealProblem rp = embed_and_reduce(problem);

    FeasibilityResult res;
    if (rp.inconsistent) {
        res.verdict = FeasibilityResult::Verdict::infeasible;
        res.residual = std::numeric_limits<double>::infinity();
        return res;
    }

    auto project_affine = [&](BlockReal v) {
        for (std::size_t k = 0; k < rp.rows.size(); ++k) {
            const double c = rp.rhs[k] - br_dot(rp.rows[k], v);
            if (c != 0.0) br_axpy(c, rp.rows[k], v);
        }
        return v;
    };
    auto project_psd = [&](const BlockReal& v) {
        BlockReal out = br_zero(rp.sides);
        for (std::size_t b = 0; b < v.size(); ++b) {
            RealEig e = rm_eig(v[b]);
            const std::size_t n = v[b].n;
            for (std::size_t j = 0; j < n; ++j) {
                const double lam = e.values[j];
                if (lam <= 0.0) continue;
                for (std::size_t i = 0; i < n; ++i) {
                    const double vi = lam * e.vectors.at(i, j);
                    for (std::size_t i2 = 0; i2 <= i; ++i2)
                        out[b].at(i, i2) += vi * e.vectors.at(i2, j);
                }
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t i2 = i + 1; i2 < n; ++i2) out[b].at(i, i2) = out[b].at(i2, i);
        }
        return out;
    };

    double bmax = 0.0;
    for (double v : rp.rhs) bmax = std::max(bmax, std::abs(v));
    BlockReal x = project_affine(br_identity(rp.sides, 1.0 + bmax));
    BlockReal p = br_zero(rp.sides);

    double prev_window = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= iteration_cap; ++it) {
        BlockReal ypre = x;
        br_axpy(1.0, p, ypre);
        BlockReal y = project_psd(ypre);
        p = ypre;
        br_axpy(-1.0, y, p);
        x = project_affine(y);

        BlockReal diff = x;
        br_axpy(-1.0, y, diff);
        res.residual = br_frob(diff) / (1.0 + br_frob(y));
        res.iterations = it;

        if (res.residual < 1e-7) {
            res.verdict = FeasibilityResult::Verdict::feasible;
            res.witness = extract_blocks(rp, problem.block_sides, x, 1.0);
            return res;
        }
        // plateau well above the feasibility band: call it infeasible early
        if (it % 500 == 0) {
            if (res.residual >= 1e-4 && std::abs(prev_window - res.residual) <= 1e-9 * res.residual) {
                res.verdict = FeasibilityResult::Verdict::infeasible;
                return res;
            }
            prev_window = res.residual;
        }
    }
    res.verdict = res.residual >= 1e-4 ? FeasibilityResult::Verdict::infeasible
                                       : FeasibilityResult::Verdict::indeterminate;
    return res;
}

ComplexMatrix hermitian_to_real_embedding(const ComplexMatrix& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("embedding requires a square matrix");
    ComplexMatrix r(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cdouble v = m(i, j);
            r(i, j) = v.real();
            r(i + n, j + n) = v.real();
            r(i, j + n) = -v.imag();
            r(i + n, j) = v.imag();
        }
    return r;
}

namespace {

void print_value(std::ostream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

void dump_entries(std::ostream& os, const BlockReal& data, std::size_t k) {
    for (std::size_t b = 0; b < data.size(); ++b) {
        const RMat& m = data[b];
        for (std::size_t i = 0; i < m.n; ++i)
            for (std::size_t j = i; j < m.n; ++j) {
                const double v = m.at(i, j);
                if (v == 0.0) continue;
                os << k << ' ' << (b + 1) << ' ' << (i + 1) << ' ' << (j + 1) << ' ';
                print_value(os, v);
                os << '\n';
            }
    }
}

}  // namespace

void write_sdpa_sparse(const SdpProblem& problem, std::ostream& os) {
    validate_problem(problem);
    const std::size_t nb = problem.block_sides.size();
    std::vector<bool> emb(nb);
    for (std::size_t b = 0; b < nb; ++b) emb[b] = block_has_imaginary(problem, b);

    os << problem.constraints.size() << '\n' << nb << '\n';
    for (std::size_t b = 0; b < nb; ++b) {
        if (b) os << ' ';
        os << (emb[b] ? 2 * problem.block_sides[b] : problem.block_sides[b]);
    }
    os << '\n';
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
        if (k) os << ' ';
        print_value(os, problem.constraints[k].rhs);
    }
    os << '\n';

    // the file's PSD matrix sits on its dual side, so F0 = -C
    BlockReal f0 = embed_data(problem.objective, emb);
    br_scal(-1.0, f0);
    dump_entries(os, f0, 0);
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
        BlockReal fk = embed_data(problem.constraints[k].mat, emb);
        dump_entries(os, fk, k + 1);
    }
}

SdpProblem read_sdpa_sparse(std::istream& is) {
    // tolerant tokenizer: comment lines start with '*' or '"'; braces and
    // commas in the block/rhs lines are treated as spaces
    auto next_line = [&](std::string& line) {
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const char c = line[0];
            if (c == '*' || c == '"') continue;
            for (auto& ch : line)
                if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
            return true;
        }
        return false;
    };

    std::string line;
    long m = -1, nb = -1;
    if (!next_line(line)) throw std::invalid_argument("sdpa: missing constraint count");
    {
        std::istringstream ss(line);
        ss >> m;
        if (m < 0) throw std::invalid_argument("sdpa: bad constraint count");
    }
    if (!next_line(line)) throw std::invalid_argument("sdpa: missing block count");
    {
        std::istringstream ss(line);
        ss >> nb;
        if (nb <= 0) throw std::invalid_argument("sdpa: bad block count");
    }
    if (!next_line(line)) throw std::invalid_argument("sdpa: missing block sizes");
    std::vector<long> raw_sides;
    {
        std::istringstream ss(line);
        long v;
        while (ss >> v) raw_sides.push_back(v);
        if (long(raw_sides.size()) != nb) throw std::invalid_argument("sdpa: block size count mismatch");
    }
    std::vector<double> rhs;
    if (m > 0) {
        if (!next_line(line)) throw std::invalid_argument("sdpa: missing rhs values");
        std::istringstream ss(line);
        double v;
        while (ss >> v) rhs.push_back(v);
        if (long(rhs.size()) != m) throw std::invalid_argument("sdpa: rhs count mismatch");
    }

    SdpProblem p;
    std::vector<bool> diag(nb, false);
    for (long b = 0; b < nb; ++b) {
        if (raw_sides[b] == 0) throw std::invalid_argument("sdpa: zero block size");
        diag[b] = raw_sides[b] < 0;
        p.block_sides.push_back(std::size_t(std::abs(raw_sides[b])));
    }
    auto zero_blocks = [&]() {
        BlockMatrix bm;
        for (auto s : p.block_sides) bm.blocks.emplace_back(s, s);
        return bm;
    };
    p.objective = zero_blocks();
    p.constraints.resize(std::size_t(m));
    for (long k = 0; k < m; ++k) {
        p.constraints[std::size_t(k)].mat = zero_blocks();
        p.constraints[std::size_t(k)].rhs = rhs[std::size_t(k)];
    }

    while (next_line(line)) {
        std::istringstream ss(line);
        long k, b, i, j;
        double v;
        if (!(ss >> k >> b >> i >> j >> v)) throw std::invalid_argument("sdpa: bad entry line: " + line);
        if (k < 0 || k > m || b < 1 || b > nb) throw std::invalid_argument("sdpa: entry index out of range: " + line);
        const std::size_t side = p.block_sides[std::size_t(b - 1)];
        if (i < 1 || j < 1 || std::size_t(i) > side || std::size_t(j) > side)
            throw std::invalid_argument("sdpa: entry position out of range: " + line);
        if (diag[std::size_t(b - 1)] && i != j)
            throw std::invalid_argument("sdpa: off-diagonal entry in diagonal block: " + line);
        ComplexMatrix& target = k == 0 ? p.objective.blocks[std::size_t(b - 1)]
                                       : p.constraints[std::size_t(k - 1)].mat.blocks[std::size_t(b - 1)];
        const double store = k == 0 ? -v : v;
        target(std::size_t(i - 1), std::size_t(j - 1)) = store;
        target(std::size_t(j - 1), std::size_t(i - 1)) = store;
    }
    return p;
}

}  // namespace nlq
