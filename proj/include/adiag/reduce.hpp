#pragma once

// Constructive reduction machinery: joint-invertibility perturbation of real
// scalar fields, tridiagonalization of Hermitian fields by per-node
// Householder conjugation of perturbed column tails, the determinant
// recursion q_k = c_k q_{k-1} - b_{k-1}^2 q_{k-2}, and the final adjustment
// that forces an everywhere-distinct spectrum.

#include <optional>

#include "adiag/field.hpp"
#include "adiag/rng.hpp"

namespace adiag {

inline constexpr double kGapTol = 1e-7;
inline constexpr double kGaugeWarnTol = 0.5;

namespace detail {

// min over nodes of sum of squares of real scalar fields
inline double joint_margin(const std::vector<ScalarField>& fs) {
    double margin = std::numeric_limits<double>::infinity();
    const int nodes = fs.front().mesh->node_count();
    for (int x = 0; x < nodes; ++x) {
        double s = 0.0;
        for (const ScalarField& f : fs) s += f.real_at(x) * f.real_at(x);
        margin = std::min(margin, s);
    }
    return margin;
}

// Core of the joint-invertibility perturbation with one deviation bound per
// field. Constant offsets are drawn from the seed and retried with a growing
// magnitude schedule until the sum of squares clears a margin floor.
inline std::vector<ScalarField> perturb_joint_invertible_weighted(
    const std::vector<ScalarField>& fs, const std::vector<double>& bounds, std::uint64_t seed,
    double inv_tol = kInvTol) {
    const size_t m = fs.size();
    if (joint_margin(fs) > inv_tol) return fs;  // already jointly invertible

    const int dim = mesh_dim(fs.front().mesh->kind);
    if (static_cast<int>(m) < dim + 1)
        throw DimensionObstruction(
            "perturb_joint_invertible: " + std::to_string(m) + " field(s) on a " +
            std::to_string(dim) + "-dimensional mesh cannot clear a common zero");

    const double min_bound = *std::min_element(bounds.begin(), bounds.end());
    DetRng rng(seed);
    double best_margin = -1.0;
    std::vector<ScalarField> best;
    for (int attempt = 0; attempt < 32; ++attempt) {
        const double sched = 1.0 - std::pow(0.5, attempt + 1);  // 1/2, 3/4, 7/8, ...
        std::vector<ScalarField> g = fs;
        for (size_t i = 0; i < m; ++i) {
            const double offset = sched * bounds[i] * rng.symmetric();
            for (cxd& v : g[i].values) v += offset;
        }
        const double margin = joint_margin(g);
        const double floor = std::pow(sched * min_bound / 4.0, 2);
        if (margin >= floor) return g;
        if (margin > best_margin) {
            best_margin = margin;
            best = std::move(g);
        }
    }
    if (best_margin > 0.0) return best;
    throw PerturbationFailed("perturb_joint_invertible: 32 draws left a common zero");
}

}  // namespace detail

// Perturbs m real fields by less than eps each so their squares sum to an
// invertible field. Needs m >= dim(M) + 1 unless the input already clears.
inline std::vector<ScalarField> perturb_joint_invertible(const std::vector<ScalarField>& fs,
                                                         double eps, std::uint64_t seed) {
    if (fs.empty()) throw Error("perturb_joint_invertible: no fields");
    if (!(eps > 0.0)) throw Error("perturb_joint_invertible: eps must be positive");
    return detail::perturb_joint_invertible_weighted(fs, std::vector<double>(fs.size(), eps),
                                                     seed);
}

struct TridiagonalField {
    MeshPtr mesh;
    int n = 0;
    std::vector<ScalarField> diag;  // n real fields a_kk (or c_k once centered)
    std::vector<ScalarField> sub;   // n-1 fields; sub[0..n-3] real positive, sub[n-2] complex
    MatrixField conjugator;         // U1 with U1* A U1 ~ T
    double offband_residual = 0.0;
    double gauge_defect = 0.0;   // max edge discontinuity of the conjugator
    bool gauge_warning = false;  // gauge_defect above kGaugeWarnTol
};

// dense Hermitian field carrying the tridiagonal data
inline MatrixField assemble_tridiagonal(const TridiagonalField& t) {
    MatrixField f(t.mesh, t.n, FieldTag::hermitian);
    for (int x = 0; x < t.mesh->node_count(); ++x) {
        CMatrix& a = f.samples[x];
        for (int k = 0; k < t.n; ++k) a(k, k) = cxd(t.diag[k].real_at(x), 0.0);
        for (int k = 0; k + 1 < t.n; ++k) {
            const cxd b = t.sub[k].values[x];
            a(k + 1, k) = b;
            a(k, k + 1) = std::conj(b);
        }
    }
    return f;
}

// same data with a_nn subtracted from the diagonal; second member is the
// removed field so callers can re-add it to eigenvalues afterwards
inline std::pair<TridiagonalField, ScalarField> centered(const TridiagonalField& t) {
    TridiagonalField c = t;
    const ScalarField ann = t.diag[t.n - 1];
    for (int k = 0; k < t.n; ++k)
        for (int x = 0; x < t.mesh->node_count(); ++x)
            c.diag[k].values[x] -= ann.values[x];
    return {c, ann};
}

inline bool is_centered(const TridiagonalField& t) {
    for (const cxd& v : t.diag[t.n - 1].values)
        if (v != cxd(0.0, 0.0)) return false;
    return true;
}

namespace detail {

// exact zero test for everything strictly below the first subdiagonal
inline bool already_tridiagonal(const MatrixField& a) {
    for (const CMatrix& s : a.samples)
        for (int i = 0; i < a.n; ++i)
            for (int j = 0; j < a.n; ++j)
                if (std::abs(i - j) > 1 && s(i, j) != cxd(0.0, 0.0)) return false;
    return true;
}

inline bool positive_real_subdiagonal(const MatrixField& a) {
    for (const CMatrix& s : a.samples)
        for (int k = 0; k + 2 < a.n; ++k)
            if (s(k + 1, k).imag() != 0.0 || s(k + 1, k).real() <= 0.0) return false;
    return true;
}

inline TridiagonalField read_off_tridiagonal(const MatrixField& a) {
    TridiagonalField t;
    t.mesh = a.mesh;
    t.n = a.n;
    for (int k = 0; k < a.n; ++k) {
        ScalarField d(a.mesh, true);
        for (int x = 0; x < a.mesh->node_count(); ++x)
            d.values[x] = cxd(a.samples[x](k, k).real(), 0.0);
        t.diag.push_back(std::move(d));
    }
    for (int k = 0; k + 1 < a.n; ++k) {
        ScalarField s(a.mesh, k + 1 < a.n - 1);
        for (int x = 0; x < a.mesh->node_count(); ++x) s.values[x] = a.samples[x](k + 1, k);
        t.sub.push_back(std::move(s));
    }
    MatrixField id(a.mesh, a.n, FieldTag::unitary);
    for (auto& s : id.samples) s = CMatrix::identity(a.n);
    t.conjugator = std::move(id);
    return t;
}

}  // namespace detail

// Tridiagonal reduction of a Hermitian field. Each stage perturbs the live
// column tail (real and imaginary parts jointly invertible), conjugates by a
// per-node Householder alignment, and leaves a strictly positive real
// subdiagonal entry. The per-entry perturbation stays below eps, so the
// reconstruction residual stays below (n-1)^{3/2} eps.
inline TridiagonalField tridiagonalize(const MatrixField& a, double eps, std::uint64_t seed) {
    require_tag(a, FieldTag::hermitian, "tridiagonalize");
    if (a.n < 2) throw Error("tridiagonalize: n must be at least 2");
    if (!(eps > 0.0)) throw Error("tridiagonalize: eps must be positive");
    const int n = a.n;
    const int nodes = a.mesh->node_count();

    if (n == 2) return detail::read_off_tridiagonal(a);
    if (detail::already_tridiagonal(a) && detail::positive_real_subdiagonal(a))
        return detail::read_off_tridiagonal(a);

    std::vector<CMatrix> cur(a.samples);
    for (CMatrix& s : cur) s = hermitize(s);
    std::vector<CMatrix> accum(nodes, CMatrix::identity(n));  // product of stage unitaries

    TridiagonalField t;
    t.mesh = a.mesh;
    t.n = n;
    std::vector<ScalarField> b_fields;  // the constructed positive subdiagonals

    for (int stage = 0; stage <= n - 3; ++stage) {
        const int tail = n - 1 - stage;
        // 2*tail real fields: Re and Im of each live tail entry
        std::vector<ScalarField> parts(2 * tail, ScalarField(a.mesh, true));
        for (int x = 0; x < nodes; ++x)
            for (int r = 0; r < tail; ++r) {
                const cxd v = cur[x](stage + 1 + r, stage);
                parts[2 * r].values[x] = cxd(v.real(), 0.0);
                parts[2 * r + 1].values[x] = cxd(v.imag(), 0.0);
            }
        const std::vector<double> bounds(2 * tail, eps / std::sqrt(2.0));
        parts = detail::perturb_joint_invertible_weighted(parts, bounds, mix_seed(seed, stage));

        ScalarField b(a.mesh, true);
        for (int x = 0; x < nodes; ++x) {
            CVector g(tail);
            for (int r = 0; r < tail; ++r)
                g[r] = cxd(parts[2 * r].real_at(x), parts[2 * r + 1].real_at(x));
            const double norm = vec_norm(g);
            b.values[x] = cxd(norm, 0.0);
            for (int r = 0; r < tail; ++r) {
                cur[x](stage + 1 + r, stage) = g[r];
                cur[x](stage, stage + 1 + r) = std::conj(g[r]);
            }
            const auto hh = householder_to_e1(g);  // aligned: H g = ||g|| e1
            CMatrix w = CMatrix::identity(n);
            for (int i = 0; i < tail; ++i)
                for (int j = 0; j < tail; ++j) w(stage + 1 + i, stage + 1 + j) = hh.u(i, j);
            cur[x] = hermitize(w * cur[x] * w.adjoint());
            accum[x] = w * accum[x];
        }
        b_fields.push_back(std::move(b));
    }

    for (int k = 0; k < n; ++k) {
        ScalarField d(a.mesh, true);
        for (int x = 0; x < nodes; ++x) d.values[x] = cxd(cur[x](k, k).real(), 0.0);
        t.diag.push_back(std::move(d));
    }
    t.sub = std::move(b_fields);  // sub[0..n-3], real positive by construction
    ScalarField last(a.mesh, false);
    for (int x = 0; x < nodes; ++x) last.values[x] = cur[x](n - 1, n - 2);
    t.sub.push_back(std::move(last));

    t.conjugator = MatrixField(a.mesh, n, FieldTag::unitary);
    for (int x = 0; x < nodes; ++x) t.conjugator.samples[x] = accum[x].adjoint();

    t.offband_residual =
        sup_norm(field_sub(field_conjugate(a, t.conjugator), assemble_tridiagonal(t)));
    t.gauge_defect = continuity_modulus(t.conjugator);
    t.gauge_warning = t.gauge_defect > kGaugeWarnTol;
    return t;
}

struct QSequence {
    std::vector<ScalarField> q;  // q[0] = 1, q[1] = c_1, ..., q[n-1]
};

// Determinants of the leading tridiagonal blocks of a centered field via the
// three-term recursion. Only the real subdiagonals enter.
inline QSequence q_sequence(const TridiagonalField& t) {
    if (!is_centered(t)) throw Error("q_sequence: diagonal must be centered (c_n = 0)");
    const int nodes = t.mesh->node_count();
    QSequence qs;
    qs.q.assign(t.n, ScalarField(t.mesh, true));
    for (int x = 0; x < nodes; ++x) qs.q[0].values[x] = cxd(1.0, 0.0);
    if (t.n >= 2) qs.q[1] = t.diag[0];
    for (int k = 2; k <= t.n - 1; ++k) {
        for (int x = 0; x < nodes; ++x) {
            const double ck = t.diag[k - 1].real_at(x);
            const double bk1 = t.sub[k - 2].real_at(x);
            qs.q[k].values[x] =
                cxd(ck * qs.q[k - 1].real_at(x) - bk1 * bk1 * qs.q[k - 2].real_at(x), 0.0);
        }
    }
    return qs;
}

struct DistinctSpectrumResult {
    MatrixField b;                         // centered perturbed field, distinct spectrum
    std::optional<ScalarField> det_target; // perturbed q_{n-1}; det of the leading block
    double movement = 0.0;                 // sup_norm(B - B0)
    double min_gap = 0.0;                  // min over nodes of the spectral gap
};

// Final perturbation forcing an everywhere-distinct spectrum: jointly perturb
// the last complex subdiagonal and q_{n-1}, then adjust c_{n-1} and b_{n-2}
// so the leading block determinant equals the perturbed target exactly.
// Takes and returns centered fields.
inline DistinctSpectrumResult distinct_spectrum_perturbation(const TridiagonalField& t,
                                                             double eps, std::uint64_t seed,
                                                             double gap_tol = kGapTol) {
    if (!is_centered(t))
        throw Error("distinct_spectrum_perturbation: diagonal must be centered");
    if (!(eps > 0.0)) throw Error("distinct_spectrum_perturbation: eps must be positive");
    const int n = t.n;
    const int nodes = t.mesh->node_count();
    const MatrixField b0 = assemble_tridiagonal(t);

    TridiagonalField out = t;
    std::optional<ScalarField> det_target;

    if (n == 2) {
        // explicit 2x2 construction: perturb (c1, Re b, Im b) jointly invertible
        std::vector<ScalarField> parts(3, ScalarField(t.mesh, true));
        for (int x = 0; x < nodes; ++x) {
            parts[0].values[x] = cxd(t.diag[0].real_at(x), 0.0);
            parts[1].values[x] = cxd(t.sub[0].values[x].real(), 0.0);
            parts[2].values[x] = cxd(t.sub[0].values[x].imag(), 0.0);
        }
        parts = detail::perturb_joint_invertible_weighted(
            parts, std::vector<double>(3, eps), mix_seed(seed, 0x22));
        for (int x = 0; x < nodes; ++x) {
            const double b1 = parts[0].real_at(x);
            out.sub[0].values[x] = cxd(parts[1].real_at(x), parts[2].real_at(x));
            // B = [[c1, b*], [b, c1 - b1]] with b1 the perturbed c1
            out.diag[1].values[x] = cxd(t.diag[0].real_at(x) - b1, 0.0);
        }
    } else {
        const QSequence qs = q_sequence(t);
        const ScalarField& qn1 = qs.q[n - 1];
        const ScalarField& qn2 = qs.q[n - 2];
        const ScalarField& qn3 = qs.q[n - 3];

        double s_margin = std::numeric_limits<double>::infinity();
        double qn2_sup = 0.0, qn3_sup = 0.0;
        for (int x = 0; x < nodes; ++x) {
            const double s =
                qn2.real_at(x) * qn2.real_at(x) + qn3.real_at(x) * qn3.real_at(x);
            s_margin = std::min(s_margin, s);
            qn2_sup = std::max(qn2_sup, std::abs(qn2.real_at(x)));
            qn3_sup = std::max(qn3_sup, std::abs(qn3.real_at(x)));
        }
        if (!(s_margin > 0.0))
            throw PerturbationFailed(
                "distinct_spectrum_perturbation: q_{n-2}^2 + q_{n-3}^2 vanishes at a node");

        double m = std::numeric_limits<double>::infinity();
        for (int x = 0; x < nodes; ++x) m = std::min(m, t.sub[n - 3].real_at(x));
        if (!(m > 0.0))
            throw PerturbationFailed("distinct_spectrum_perturbation: b_{n-2} not positive");

        // || q_{n-1} - b || < min(eps, m eps, m^2/2) / ((||q_{n-2}|| + ||q_{n-3}||)
        //                     * ||(q_{n-2}^2 + q_{n-3}^2)^{-1}||)
        const double q_bound = std::min({eps, m * eps, 0.5 * m * m}) /
                               ((qn2_sup + qn3_sup) * (1.0 / s_margin));

        std::vector<ScalarField> parts(3, ScalarField(t.mesh, true));
        parts[0] = qn1;
        for (int x = 0; x < nodes; ++x) {
            parts[1].values[x] = cxd(t.sub[n - 2].values[x].real(), 0.0);
            parts[2].values[x] = cxd(t.sub[n - 2].values[x].imag(), 0.0);
        }
        parts = detail::perturb_joint_invertible_weighted(parts, {q_bound, eps, eps},
                                                          mix_seed(seed, 0x33));
        const ScalarField& b_det = parts[0];

        for (int x = 0; x < nodes; ++x) {
            const double s =
                qn2.real_at(x) * qn2.real_at(x) + qn3.real_at(x) * qn3.real_at(x);
            const double delta = b_det.real_at(x) - qn1.real_at(x);
            out.diag[n - 2].values[x] =
                cxd(t.diag[n - 2].real_at(x) + delta * qn2.real_at(x) / s, 0.0);
            const double inside = t.sub[n - 3].real_at(x) * t.sub[n - 3].real_at(x) -
                                  delta * qn3.real_at(x) / s;
            if (!(inside > 0.0))
                throw PerturbationFailed(
                    "distinct_spectrum_perturbation: adjusted b_{n-2}^2 not positive");
            out.sub[n - 3].values[x] = cxd(std::sqrt(inside), 0.0);
            out.sub[n - 2].values[x] = cxd(parts[1].real_at(x), parts[2].real_at(x));
        }
        det_target = b_det;
    }

    DistinctSpectrumResult r;
    r.b = assemble_tridiagonal(out);
    r.det_target = std::move(det_target);
    r.movement = sup_norm(field_sub(r.b, b0));

    const auto bands = pointwise_spectra(r.b);
    double gap = std::numeric_limits<double>::infinity();
    for (int x = 0; x < nodes; ++x) {
        std::vector<double> v(n);
        for (int j = 0; j < n; ++j) v[j] = bands[j].real_at(x);
        gap = std::min(gap, min_gap(v));
    }
    r.min_gap = gap;
    if (!(gap >= gap_tol))
        throw GapCollapse("distinct_spectrum_perturbation: minimal spectral gap " +
                          std::to_string(gap) + " below gap_tol " + std::to_string(gap_tol));
    return r;
}

}  // namespace adiag
