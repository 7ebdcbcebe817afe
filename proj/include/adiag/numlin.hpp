#pragma once

// Dense complex linear algebra for small n (2 <= n <= ~32): Hermitian
// eigensolver (cyclic complex Jacobi), Householder alignment, polar
// decomposition, operator norm, det/trace, spectral gap. Everything is a pure
// function of its input bits; no global state, no randomness.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "adiag/errors.hpp"

namespace adiag {

using cxd = std::complex<double>;
using CVector = std::vector<cxd>;

inline constexpr double kHermTol = 1e-10;
inline constexpr double kSingTol = 1e-12;
inline constexpr double kTolEig = 1e-10;

class CMatrix {
  public:
    CMatrix() : n_(0) {}
    explicit CMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, cxd(0.0, 0.0)) {}

    static CMatrix identity(int n) {
        CMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int n() const { return n_; }

    cxd& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    const cxd& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    const std::vector<cxd>& data() const { return a_; }
    std::vector<cxd>& data() { return a_; }

    CMatrix adjoint() const {
        CMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    CMatrix operator+(const CMatrix& o) const {
        CMatrix r(n_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
        return r;
    }
    CMatrix operator-(const CMatrix& o) const {
        CMatrix r(n_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
        return r;
    }
    CMatrix operator*(const CMatrix& o) const {
        CMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) {
                const cxd aik = (*this)(i, k);
                if (aik == cxd(0.0, 0.0)) continue;
                for (int j = 0; j < n_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }
    CMatrix operator*(cxd s) const {
        CMatrix r(n_);
        for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * s;
        return r;
    }

    CVector apply(const CVector& v) const {
        CVector r(n_, cxd(0.0, 0.0));
        for (int i = 0; i < n_; ++i) {
            cxd s(0.0, 0.0);
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }

    CVector column(int j) const {
        CVector c(n_);
        for (int i = 0; i < n_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_column(int j, const CVector& c) {
        for (int i = 0; i < n_; ++i) (*this)(i, j) = c[i];
    }

    bool finite() const {
        for (const cxd& z : a_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    bool operator==(const CMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }

  private:
    int n_;
    std::vector<cxd> a_;
};

inline double frobenius_norm(const CMatrix& m) {
    double s = 0.0;
    for (const cxd& z : m.data()) s += std::norm(z);
    return std::sqrt(s);
}

inline double hermiticity_defect(const CMatrix& m) {
    return frobenius_norm(m - m.adjoint());
}

inline CMatrix hermitize(const CMatrix& m) {
    CMatrix h = m;
    const int n = m.n();
    for (int i = 0; i < n; ++i) {
        h(i, i) = cxd(m(i, i).real(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const cxd v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    }
    return h;
}

inline double vec_norm(const CVector& v) {
    double s = 0.0;
    for (const cxd& z : v) s += std::norm(z);
    return std::sqrt(s);
}

// <a, b> conjugate-linear in the first slot
inline cxd vec_dot(const CVector& a, const CVector& b) {
    cxd s(0.0, 0.0);
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

struct Spectrum {
    std::vector<double> values;  // sorted non-increasingly
    CMatrix vectors;             // columns are unit eigenvectors, matching order
};

// Hermitian eigensolver: cyclic complex Jacobi with deterministic sweep order.
// Converges when the off-diagonal Frobenius mass drops below 1e-14 * ||A||_F,
// capped at 100 sweeps.
inline Spectrum herm_eig(const CMatrix& a, double tol_eig = kTolEig, double herm_tol = kHermTol) {
    const int n = a.n();
    const double scale = frobenius_norm(a);
    if (hermiticity_defect(a) > herm_tol * (scale + 1.0))
        throw NotHermitian("herm_eig: input is not Hermitian within tolerance");

    CMatrix w = hermitize(a);
    CMatrix v = CMatrix::identity(n);

    const double target = 1e-14 * scale;
    const int max_sweeps = 100;
    bool converged = (n == 1);
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * std::norm(w(p, q));
        if (std::sqrt(off) <= target) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cxd wpq = w(p, q);
                const double apq = std::abs(wpq);
                if (apq == 0.0) continue;
                // phase that makes the pivot real, then a real Jacobi rotation
                const cxd phase = wpq / apq;  // w(p,q) = apq * phase
                const double app = w(p, p).real();
                const double aqq = w(q, q).real();
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // column rotation J restricted to (p,q):
                //   [ c        s      ]
                //   [-s*conj(phase)  c*conj(phase) ]  (phase folded into column q)
                const cxd jpp = c;
                const cxd jpq = s;
                const cxd jqp = -s * std::conj(phase);
                const cxd jqq = c * std::conj(phase);
                // w <- J^* w J
                for (int i = 0; i < n; ++i) {
                    const cxd wip = w(i, p);
                    const cxd wiq = w(i, q);
                    w(i, p) = wip * jpp + wiq * jqp;
                    w(i, q) = wip * jpq + wiq * jqq;
                }
                for (int j = 0; j < n; ++j) {
                    const cxd wpj = w(p, j);
                    const cxd wqj = w(q, j);
                    w(p, j) = std::conj(jpp) * wpj + std::conj(jqp) * wqj;
                    w(q, j) = std::conj(jpq) * wpj + std::conj(jqq) * wqj;
                }
                w(p, q) = cxd(0.0, 0.0);
                w(q, p) = cxd(0.0, 0.0);
                w(p, p) = cxd(w(p, p).real(), 0.0);
                w(q, q) = cxd(w(q, q).real(), 0.0);
                for (int i = 0; i < n; ++i) {
                    const cxd vip = v(i, p);
                    const cxd viq = v(i, q);
                    v(i, p) = vip * jpp + viq * jqp;
                    v(i, q) = vip * jpq + viq * jqq;
                }
            }
        }
    }
    if (!converged) {
        // past the sweep cap the result is still acceptable while the
        // leftover off-diagonal mass cannot push the reconstruction residual
        // over the caller's tolerance
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * std::norm(w(p, q));
        if (std::sqrt(off) > std::max(target, 0.5 * tol_eig * (1.0 + scale)))
            throw NoConvergence("herm_eig: Jacobi sweep cap exceeded");
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return w(i, i).real() > w(j, j).real(); });

    Spectrum sp;
    sp.values.resize(n);
    sp.vectors = CMatrix(n);
    for (int k = 0; k < n; ++k) {
        sp.values[k] = w(order[k], order[k]).real();
        for (int i = 0; i < n; ++i) sp.vectors(i, k) = v(i, order[k]);
    }
    return sp;
}

enum class PhaseConvention {
    reflector,  // raw Householder reflector, U v = e^{i phi} e1 with phi = arg(v1) + pi
    align_e1,   // first row rescaled so that U v = e1 exactly, phi = 0
};

struct HouseholderResult {
    CMatrix u;
    double phase;  // phi with U v = e^{i phi} e1, in (-pi, pi]
};

// Unitary sending a unit vector to (a phase times) e1. The reflector uses
// w = v + e^{i arg(v1)} e1, the cancellation-avoiding sign.
inline HouseholderResult householder_to_e1(const CVector& vin,
                                           PhaseConvention convention = PhaseConvention::align_e1,
                                           double tol = kSingTol) {
    const int m = static_cast<int>(vin.size());
    const double nv = vec_norm(vin);
    if (nv < tol) throw ZeroVector("householder_to_e1: vector norm below tolerance");
    CVector v(m);
    for (int i = 0; i < m; ++i) v[i] = vin[i] / nv;

    const double a1 = std::abs(v[0]);
    const cxd eia = (a1 == 0.0) ? cxd(1.0, 0.0) : v[0] / a1;  // e^{i arg(v1)}
    CVector w = v;
    w[0] += eia;
    const double wn2 = 2.0 + 2.0 * a1;  // ||w||^2 for unit v

    CMatrix u = CMatrix::identity(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) u(i, j) -= 2.0 * w[i] * std::conj(w[j]) / wn2;
    // now u * v = -e^{i arg(v1)} e1

    HouseholderResult r;
    if (convention == PhaseConvention::align_e1) {
        const cxd fix = -std::conj(eia);  // unit factor, -1 exactly when v1 >= 0 real
        for (int j = 0; j < m; ++j) u(0, j) *= fix;
        r.phase = 0.0;
    } else {
        double phi = std::arg(v[0]) + M_PI;
        if (phi > M_PI) phi -= 2.0 * M_PI;
        r.phase = phi;
    }
    r.u = std::move(u);
    return r;
}

// determinant by LU with partial pivoting, trace by diagonal sum
inline std::pair<cxd, cxd> det_tr(const CMatrix& x) {
    const int n = x.n();
    cxd tr(0.0, 0.0);
    for (int i = 0; i < n; ++i) tr += x(i, i);

    CMatrix lu = x;
    cxd det(1.0, 0.0);
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double cand = std::abs(lu(i, k));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best == 0.0) return {cxd(0.0, 0.0), tr};
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            det = -det;
        }
        det *= lu(k, k);
        for (int i = k + 1; i < n; ++i) {
            const cxd f = lu(i, k) / lu(k, k);
            for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    return {det, tr};
}

// largest singular value, via the Hermitian spectrum of X*X
inline double op_norm(const CMatrix& x) {
    if (x.n() == 0) return 0.0;
    const CMatrix s = hermitize(x.adjoint() * x);
    const Spectrum sp = herm_eig(s);
    return std::sqrt(std::max(0.0, sp.values.front()));
}

// unitary polar factor X (X*X)^{-1/2}
inline CMatrix polar_unitary(const CMatrix& x, double sing_tol = kSingTol) {
    const int n = x.n();
    const CMatrix s = hermitize(x.adjoint() * x);
    const Spectrum sp = herm_eig(s);
    const double smin = std::sqrt(std::max(0.0, sp.values.back()));
    if (smin <= sing_tol) throw Singular("polar_unitary: smallest singular value below tolerance");
    CMatrix inv_sqrt(n);
    for (int k = 0; k < n; ++k) {
        const double w = 1.0 / std::sqrt(sp.values[k]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                inv_sqrt(i, j) += sp.vectors(i, k) * w * std::conj(sp.vectors(j, k));
    }
    return x * inv_sqrt;
}

// minimal gap of a non-increasing list; +inf for a single value
inline double min_gap(const std::vector<double>& values) {
    if (values.size() <= 1) return std::numeric_limits<double>::infinity();
    double g = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k + 1 < values.size(); ++k) g = std::min(g, values[k] - values[k + 1]);
    return g;
}

struct UnitaryEig {
    std::vector<double> angles;  // in (-pi, pi], sorted non-increasingly
    CMatrix vectors;             // columns are unit eigenvectors, matching order
};

// Spectral decomposition of a unitary matrix. A unitary is normal, so its
// Hermitian and anti-Hermitian parts commute; a generic real combination
// cos-part + mu * sin-part separates the eigenspaces, and the Rayleigh
// quotients v* V v recover the unit eigenvalues. mu candidates are swept
// deterministically until every eigenpair passes a residual check.
inline UnitaryEig unitary_eig(const CMatrix& v, double tol = 1e-9) {
    const int n = v.n();
    const CMatrix gram = v.adjoint() * v;
    if (frobenius_norm(gram - CMatrix::identity(n)) > 1e-8 * (n + frobenius_norm(v)))
        throw NotUnitary("unitary_eig: input is not unitary within tolerance");

    const CMatrix re = hermitize((v + v.adjoint()) * cxd(0.5, 0.0));
    const CMatrix im = hermitize((v - v.adjoint()) * cxd(0.0, -0.5));

    static const double mu_candidates[] = {0.5,
                                           0.6180339887498949,
                                           0.25,
                                           1.3247179572447460,
                                           0.1,
                                           0.9102392266268373,
                                           2.4142135623730951,
                                           0.3819660112501051,
                                           1.7548776662466927,
                                           0.0730869287734498,
                                           3.3027756377319946,
                                           0.8191725133961644};

    for (double mu : mu_candidates) {
        const CMatrix k = re + im * cxd(mu, 0.0);
        Spectrum sp;
        try {
            sp = herm_eig(k);
        } catch (const NoConvergence&) {
            continue;
        }
        UnitaryEig out;
        out.angles.resize(n);
        out.vectors = CMatrix(n);
        bool ok = true;
        std::vector<std::pair<double, int>> keyed(n);
        CMatrix vecs(n);
        for (int idx = 0; idx < n; ++idx) {
            CVector col = sp.vectors.column(idx);
            CVector wv = v.apply(col);
            const cxd lam = vec_dot(col, wv);
            if (std::abs(std::abs(lam) - 1.0) > tol) {
                ok = false;
                break;
            }
            double resid = 0.0;
            for (int i = 0; i < n; ++i) resid += std::norm(wv[i] - lam * col[i]);
            if (std::sqrt(resid) > tol * (1.0 + std::sqrt(static_cast<double>(n)))) {
                ok = false;
                break;
            }
            keyed[idx] = {std::arg(lam), idx};
            vecs.set_column(idx, col);
        }
        if (!ok) continue;
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (int k2 = 0; k2 < n; ++k2) {
            out.angles[k2] = keyed[k2].first;
            out.vectors.set_column(k2, vecs.column(keyed[k2].second));
        }
        return out;
    }
    throw NoConvergence("unitary_eig: no separating combination found");
}

}  // namespace adiag
