#include "nlq/extension.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

namespace nlq {

namespace {

std::size_t ipow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

void check_settings(Dims dims, SettingsCount s) {
    if (dims.a < 2 || dims.b < 2)
        throw std::invalid_argument("extension: local dimensions must be at least 2");
    if (s.ma < 1 || s.ma > 4 || s.mb < 1 || s.mb > 4)
        throw std::invalid_argument("extension: settings counts must lie in [1,4]");
    if (dims.a > 2 && s.ma > 2)
        throw std::invalid_argument("extension: settings count above 2 requires local dimension 2");
    if (dims.b > 2 && s.mb > 2)
        throw std::invalid_argument("extension: settings count above 2 requires local dimension 2");
    const std::size_t mu = ipow(dims.a, s.ma) * ipow(dims.b, s.mb);
    if (mu > 65536)
        throw ResourceLimitError("extension space dimension too large for the dense solver");
}

// digit k of the big tensor index (copy 0 most significant, A copies first)
std::vector<std::size_t> tensor_dims(Dims dims, SettingsCount s) {
    std::vector<std::size_t> out;
    for (int i = 0; i < s.ma; ++i) out.push_back(dims.a);
    for (int i = 0; i < s.mb; ++i) out.push_back(dims.b);
    return out;
}

std::vector<std::size_t> swap_map(Dims dims, SettingsCount s, bool side_a) {
    const auto td = tensor_dims(dims, s);
    std::size_t mu = 1;
    for (auto d : td) mu *= d;
    const std::size_t p = side_a ? 0 : std::size_t(s.ma);
    const std::size_t q = p + 1;

    std::vector<std::size_t> to(mu);
    std::vector<std::size_t> digits(td.size());
    for (std::size_t r = 0; r < mu; ++r) {
        std::size_t rem = r;
        for (std::size_t k = td.size(); k-- > 0;) {
            digits[k] = rem % td[k];
            rem /= td[k];
        }
        std::swap(digits[p], digits[q]);
        std::size_t idx = 0;
        for (std::size_t k = 0; k < td.size(); ++k) idx = idx * td[k] + digits[k];
        to[r] = idx;
    }
    return to;
}

struct BasisCache {
    std::size_t mu = 0, sc = 0;
    ComplexMatrix isometry;                  // mu x sc
    std::vector<ComplexMatrix> lam;          // product basis, lam[0] = I/sqrt(d)
    std::vector<ComplexMatrix> compressed;   // compressed[i-1] matches lam[i]
};

ComplexMatrix lift_pair(const ComplexMatrix& ga, const ComplexMatrix& gb, Dims dims,
                        SettingsCount s) {
    ComplexMatrix left = s.ma > 1 ? kron(ga, ComplexMatrix::identity(ipow(dims.a, s.ma - 1))) : ga;
    ComplexMatrix right = s.mb > 1 ? kron(gb, ComplexMatrix::identity(ipow(dims.b, s.mb - 1))) : gb;
    return kron(left, right);
}

const BasisCache& cache_for(Dims dims, SettingsCount s) {
    using Key = std::tuple<std::size_t, std::size_t, int, int>;
    static std::mutex mtx;
    static std::map<Key, std::unique_ptr<BasisCache>> store;

    std::lock_guard<std::mutex> lock(mtx);
    const Key key{dims.a, dims.b, s.ma, s.mb};
    auto it = store.find(key);
    if (it != store.end()) return *it->second;

    auto cache = std::make_unique<BasisCache>();
    cache->mu = ipow(dims.a, s.ma) * ipow(dims.b, s.mb);

    const ComplexMatrix va = symmetric_isometry(dims.a, s.ma);
    const ComplexMatrix vb = symmetric_isometry(dims.b, s.mb);
    cache->isometry = kron(va, vb);
    cache->sc = cache->isometry.cols();

    const auto ba = hermitian_basis_single(dims.a);
    const auto bb = hermitian_basis_single(dims.b);
    const ComplexMatrix vdag = cache->isometry.adjoint();
    for (std::size_t ia = 0; ia < ba.size(); ++ia)
        for (std::size_t ib = 0; ib < bb.size(); ++ib) {
            cache->lam.push_back(kron(ba[ia], bb[ib]));
            if (ia == 0 && ib == 0) continue;
            const ComplexMatrix lifted = lift_pair(ba[ia], bb[ib], dims, s);
            cache->compressed.push_back((vdag * (lifted * cache->isometry)).hermitized());
        }

    auto& ref = *cache;
    store.emplace(key, std::move(cache));
    return ref;
}

ComplexMatrix partial_transpose_b(const ComplexMatrix& m, std::size_t sa, std::size_t sb) {
    ComplexMatrix out(sa * sb, sa * sb);
    for (std::size_t za = 0; za < sa; ++za)
        for (std::size_t zb = 0; zb < sb; ++zb)
            for (std::size_t wa = 0; wa < sa; ++wa)
                for (std::size_t wb = 0; wb < sb; ++wb)
                    out(za * sb + zb, wa * sb + wb) = m(za * sb + wb, wa * sb + zb);
    return out;
}

struct WitnessDefects {
    double marginal = 0.0;
    double invariance = 0.0;
    double psd = 0.0;
};

WitnessDefects measure_witness(const BasisCache& cache, Dims dims, SettingsCount s,
                               const ComplexMatrix& ztilde, const ComplexMatrix& target) {
    WitnessDefects d;
    const ComplexMatrix w = cache.isometry * (ztilde * cache.isometry.adjoint());

    const auto td = tensor_dims(dims, s);
    ComplexMatrix marg = partial_trace(w, td, {0, std::size_t(s.ma)});
    marg -= target;
    d.marginal = marg.max_abs();

    auto swap_defect = [&](bool side_a) {
        const auto to = swap_map(dims, s, side_a);
        double md = 0.0;
        for (std::size_t i = 0; i < cache.mu; ++i)
            for (std::size_t j = 0; j < cache.mu; ++j)
                md = std::max(md, std::abs(w(to[i], to[j]) - w(i, j)));
        return md;
    };
    if (s.ma >= 2) d.invariance = std::max(d.invariance, swap_defect(true));
    if (s.mb >= 2) d.invariance = std::max(d.invariance, swap_defect(false));

    const auto eig = eig_hermitian(ztilde);
    d.psd = std::max(0.0, -eig.values.front());
    return d;
}

// min-trace feasibility form rewritten for the projection oracle: fixed unit
// trace, marginal rows scaled to the lambda-mixed state, objective unused.
SdpProblem oracle_problem(const ExtensionProblem& ep, double lambda) {
    SdpProblem p;
    p.block_sides = ep.sdp.block_sides;
    p.objective.blocks.clear();
    for (auto side : p.block_sides) p.objective.blocks.emplace_back(side, side);

    p.constraints = ep.sdp.constraints;
    for (std::size_t i = 0; i < ep.rhs_traceless.size(); ++i)
        p.constraints[i].rhs = (1.0 - lambda) * ep.rhs_traceless[i];

    SdpConstraint trace_row;
    for (auto side : p.block_sides) trace_row.mat.blocks.emplace_back(side, side);
    trace_row.mat.blocks[0] = ComplexMatrix::identity(ep.compressed_side);
    trace_row.rhs = 1.0;
    p.constraints.push_back(std::move(trace_row));
    return p;
}

}  // namespace

const char* to_string(ExtensionMode m) {
    return m == ExtensionMode::positive ? "positive" : "ppt-quasi";
}

ComplexMatrix symmetric_isometry(std::size_t local_dim, int copies) {
    if (local_dim < 1 || copies < 1)
        throw std::invalid_argument("symmetric_isometry: dimension and copies must be positive");

    std::vector<std::vector<int>> multisets;
    std::vector<int> cur(copies, 0);
    while (true) {
        multisets.push_back(cur);
        int k = copies - 1;
        while (k >= 0 && cur[std::size_t(k)] == int(local_dim) - 1) --k;
        if (k < 0) break;
        ++cur[std::size_t(k)];
        for (int l = k + 1; l < copies; ++l) cur[std::size_t(l)] = cur[std::size_t(k)];
    }

    const std::size_t rows = ipow(local_dim, copies);
    ComplexMatrix v(rows, multisets.size());
    for (std::size_t col = 0; col < multisets.size(); ++col) {
        std::vector<int> arr = multisets[col];
        std::vector<std::size_t> cells;
        do {
            std::size_t idx = 0;
            for (int k = 0; k < copies; ++k) idx = idx * local_dim + std::size_t(arr[std::size_t(k)]);
            cells.push_back(idx);
        } while (std::next_permutation(arr.begin(), arr.end()));
        const double amp = 1.0 / std::sqrt(double(cells.size()));
        for (auto idx : cells) v(idx, col) = amp;
    }
    return v;
}

ComplexMatrix symmetrizer_twirl(const ComplexMatrix& m, std::size_t dim_a, int copies_a,
                                std::size_t dim_b, int copies_b) {
    const std::size_t mu = ipow(dim_a, copies_a) * ipow(dim_b, copies_b);
    if (m.rows() != mu || m.cols() != mu)
        throw std::invalid_argument("symmetrizer_twirl: matrix size does not match copies");

    std::vector<std::vector<int>> perms_a, perms_b;
    {
        std::vector<int> pa(static_cast<std::size_t>(copies_a));
        std::iota(pa.begin(), pa.end(), 0);
        do perms_a.push_back(pa);
        while (std::next_permutation(pa.begin(), pa.end()));
        std::vector<int> pb(static_cast<std::size_t>(copies_b));
        std::iota(pb.begin(), pb.end(), 0);
        do perms_b.push_back(pb);
        while (std::next_permutation(pb.begin(), pb.end()));
    }

    std::vector<std::size_t> td;
    for (int i = 0; i < copies_a; ++i) td.push_back(dim_a);
    for (int i = 0; i < copies_b; ++i) td.push_back(dim_b);

    ComplexMatrix out(mu, mu);
    std::vector<std::size_t> to(mu);
    std::vector<std::size_t> digits(td.size()), permuted(td.size());
    for (const auto& pa : perms_a)
        for (const auto& pb : perms_b) {
            for (std::size_t r = 0; r < mu; ++r) {
                std::size_t rem = r;
                for (std::size_t k = td.size(); k-- > 0;) {
                    digits[k] = rem % td[k];
                    rem /= td[k];
                }
                for (int k = 0; k < copies_a; ++k)
                    permuted[std::size_t(k)] = digits[std::size_t(pa[std::size_t(k)])];
                for (int k = 0; k < copies_b; ++k)
                    permuted[std::size_t(copies_a + k)] =
                        digits[std::size_t(copies_a) + std::size_t(pb[std::size_t(k)])];
                std::size_t idx = 0;
                for (std::size_t k = 0; k < td.size(); ++k) idx = idx * td[k] + permuted[k];
                to[r] = idx;
            }
            for (std::size_t r = 0; r < mu; ++r)
                for (std::size_t c = 0; c < mu; ++c) out(to[r], to[c]) += m(r, c);
        }
    out *= 1.0 / double(perms_a.size() * perms_b.size());
    return out;
}

double lambda_upper_bound(Dims dims) {
    const double d = double(dims.total());
    return 1.0 - 1.0 / std::sqrt((d * d - 1.0) * (d - 1.0));
}

ExtensionProblem build_extension_sdp(const DensityMatrix& rho, SettingsCount settings,
                                     bool parametric, ExtensionMode mode) {
    check_settings(rho.dims(), settings);
    {
        const auto report = validate_density(rho.mat());
        if (!report.pass)
            throw std::invalid_argument("extension: input is not a density matrix: " + report.message);
    }

    const Dims dims = rho.dims();
    const BasisCache& cache = cache_for(dims, settings);

    ExtensionProblem ep;
    ep.dims = dims;
    ep.settings = settings;
    ep.mode = mode;
    ep.parametric = parametric;
    ep.nu = dims.total() * dims.total() - 1;
    ep.mu = cache.mu;
    ep.compressed_side = cache.sc;
    ep.isometry = cache.isometry;
    ep.lambda_upper = lambda_upper_bound(dims);

    ep.rhs_traceless.resize(ep.nu);
    for (std::size_t i = 1; i <= ep.nu; ++i)
        ep.rhs_traceless[i - 1] = hs_inner(cache.lam[i], rho.mat());

    const bool ppt = mode == ExtensionMode::ppt_quasi;
    const std::size_t sc = cache.sc;
    SdpProblem& sdp = ep.sdp;
    sdp.block_sides.push_back(sc);
    const std::size_t y_block = ppt ? sdp.block_sides.size() : 0;
    if (ppt) sdp.block_sides.push_back(sc);
    const std::size_t lam_block = parametric ? sdp.block_sides.size() : 0;
    if (parametric) {
        sdp.block_sides.push_back(1);
        sdp.block_sides.push_back(1);
    }

    auto zero_blocks = [&]() {
        BlockMatrix bm;
        for (auto s : sdp.block_sides) bm.blocks.emplace_back(s, s);
        return bm;
    };

    sdp.objective = zero_blocks();
    if (parametric)
        sdp.objective.blocks[lam_block](0, 0) = 1.0;
    else
        sdp.objective.blocks[0] = ComplexMatrix::identity(sc);

    for (std::size_t i = 0; i < ep.nu; ++i) {
        SdpConstraint row;
        row.mat = zero_blocks();
        row.mat.blocks[0] = cache.compressed[i];
        if (parametric) row.mat.blocks[lam_block](0, 0) = ep.rhs_traceless[i];
        row.rhs = ep.rhs_traceless[i];
        sdp.constraints.push_back(std::move(row));
    }

    if (parametric) {
        SdpConstraint trace_row;
        trace_row.mat = zero_blocks();
        trace_row.mat.blocks[0] = ComplexMatrix::identity(sc);
        trace_row.rhs = 1.0;
        sdp.constraints.push_back(std::move(trace_row));

        SdpConstraint box;
        box.mat = zero_blocks();
        box.mat.blocks[lam_block](0, 0) = 1.0;
        box.mat.blocks[lam_block + 1](0, 0) = 1.0;
        box.rhs = ep.lambda_upper;
        sdp.constraints.push_back(std::move(box));
    }

    if (ppt) {
        // Y = partial transpose of Z over the compressed B factor, expanded
        // over an orthonormal Hermitian basis
        const std::size_t sa = symmetric_isometry(dims.a, settings.ma).cols();
        const std::size_t sb = sc / sa;
        for (const auto& e : hermitian_basis_single(sc)) {
            SdpConstraint row;
            row.mat = zero_blocks();
            ComplexMatrix pt = partial_transpose_b(e, sa, sb);
            pt *= -1.0;
            row.mat.blocks[0] = pt;
            row.mat.blocks[y_block] = e;
            row.rhs = 0.0;
            sdp.constraints.push_back(std::move(row));
        }
    }
    return ep;
}

ExtensionCheck has_symmetric_extension(const DensityMatrix& rho, SettingsCount settings,
                                       ExtensionMode mode, const SolveOptions& opts) {
    ExtensionProblem ep = build_extension_sdp(rho, settings, false, mode);
    const BasisCache& cache = cache_for(rho.dims(), settings);

    SdpSolution sol = solve(ep.sdp, opts);
    ExtensionCheck check;
    check.solver_status = sol.status;
    check.iterations = sol.iterations;

    if (sol.status != SolveStatus::optimal) {
        // the min-trace form is strictly feasible on both sides, so anything
        // but optimal is a numerical verdict, not a mathematical one
        return check;
    }

    const double t = sol.primal_objective;
    if (t <= 1.0 + 1e-7) {
        check.outcome = ExtensionCheck::Outcome::feasible;
        ComplexMatrix z = sol.x.blocks[0];
        const double fill = (1.0 - t) / double(ep.compressed_side);
        if (fill > 0.0)
            for (std::size_t i = 0; i < z.rows(); ++i) z(i, i) += fill;
        check.witness = z;
        const auto defects = measure_witness(cache, rho.dims(), settings, z, rho.mat());
        check.marginal_defect = defects.marginal;
        check.invariance_defect = defects.invariance;
        check.psd_defect = defects.psd;
    } else {
        check.outcome = ExtensionCheck::Outcome::infeasible;
        check.certificate.assign(sol.y.begin(), sol.y.begin() + long(ep.nu));
        check.certificate_value = sol.dual_objective;
    }
    return check;
}

QuantifyResult quantify(const DensityMatrix& rho, SettingsCount settings,
                        const QuantifyOptions& opts) {
    QuantifyResult res;
    res.settings = settings;
    res.mode = opts.mode;
    res.bisection = opts.bisect;

    SolveOptions sopts;
    sopts.gap_tol = opts.gap_tol;
    sopts.feas_tol = opts.gap_tol;
    sopts.max_iterations = opts.max_iterations;

    ExtensionCheck at_zero = has_symmetric_extension(rho, settings, opts.mode, sopts);
    {
        ExtensionProblem probe = build_extension_sdp(rho, settings, false, opts.mode);
        res.nu = probe.nu;
        res.mu = probe.mu;
        res.compressed_side = probe.compressed_side;
    }
    res.iterations = at_zero.iterations;

    if (at_zero.outcome == ExtensionCheck::Outcome::feasible) {
        res.lambda = 0.0;
        res.status = SolveStatus::optimal;
        res.witness = at_zero.witness;
        res.marginal_defect = at_zero.marginal_defect;
        res.invariance_defect = at_zero.invariance_defect;
        res.psd_defect = at_zero.psd_defect;
        return res;
    }
    if (at_zero.outcome == ExtensionCheck::Outcome::indeterminate) {
        res.status = at_zero.solver_status;
        return res;
    }

    const BasisCache& cache = cache_for(rho.dims(), settings);

    if (!opts.bisect) {
        ExtensionProblem ep = build_extension_sdp(rho, settings, true, opts.mode);
        SdpSolution sol = solve(ep.sdp, sopts);
        res.status = sol.status;
        res.iterations += sol.iterations;
        if (sol.status == SolveStatus::optimal || sol.status == SolveStatus::max_iterations) {
            res.lambda = sol.primal_objective;
            res.witness = sol.x.blocks[0];
            const auto defects = measure_witness(cache, rho.dims(), settings, res.witness,
                                                 mix_white_noise(rho, std::clamp(res.lambda, 0.0, 1.0)).mat());
            res.marginal_defect = defects.marginal;
            res.invariance_defect = defects.invariance;
            res.psd_defect = defects.psd;
        }
        return res;
    }

    // bisection against the projection oracle; lambda = 0 is already known
    // infeasible and the box bound is feasible by the general norm bound
    ExtensionProblem ep = build_extension_sdp(rho, settings, false, opts.mode);
    double lo = 0.0, hi = ep.lambda_upper;
    bool any_indeterminate = false;
    ComplexMatrix last_witness;
    double last_feasible_lambda = -1.0;

    while (hi - lo > opts.bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        const SdpProblem fp = oracle_problem(ep, mid);
        FeasibilityResult fr = feasibility_oracle(fp, opts.oracle_cap);
        res.iterations += fr.iterations;
        if (fr.verdict == FeasibilityResult::Verdict::feasible) {
            hi = mid;
            last_witness = fr.witness.blocks[0];
            last_feasible_lambda = mid;
        } else if (fr.verdict == FeasibilityResult::Verdict::infeasible) {
            lo = mid;
        } else {
            // projections stalled between the bands; the interior-point
            // check referees this midpoint so the bracket stays unbiased
            ExtensionCheck ref =
                has_symmetric_extension(mix_white_noise(rho, mid), settings, opts.mode, sopts);
            res.iterations += ref.iterations;
            if (ref.outcome == ExtensionCheck::Outcome::feasible) {
                hi = mid;
                last_witness = ref.witness;
                last_feasible_lambda = mid;
            } else {
                lo = mid;
                if (ref.outcome == ExtensionCheck::Outcome::indeterminate)
                    any_indeterminate = true;
            }
        }
    }

    res.lambda = 0.5 * (lo + hi);
    res.bracket = hi - lo;
    res.status = any_indeterminate ? SolveStatus::max_iterations : SolveStatus::optimal;
    if (last_feasible_lambda >= 0.0) {
        res.witness = last_witness;
        const auto defects = measure_witness(cache, rho.dims(), settings, res.witness,
                                             mix_white_noise(rho, last_feasible_lambda).mat());
        res.marginal_defect = defects.marginal;
        res.invariance_defect = defects.invariance;
        res.psd_defect = defects.psd;
    }
    return res;
}

}  // namespace nlq
