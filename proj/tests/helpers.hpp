#pragma once

// Shared test utilities: seeded random inputs and the independent oracles
// (cofactor determinants, characteristic-polynomial bisection) that expected
// values are frozen against. Oracles must stay independent of the library
// code paths they check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "adiag/numlin.hpp"
#include "adiag/rng.hpp"

namespace testutil {

using adiag::CMatrix;
using adiag::CVector;
using adiag::cxd;
using adiag::DetRng;

inline CMatrix random_hermitian(int n, DetRng& rng, double scale = 1.0) {
    CMatrix a(n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = cxd(scale * rng.symmetric(), 0.0);
        for (int j = i + 1; j < n; ++j) {
            const cxd v(scale * rng.symmetric(), scale * rng.symmetric());
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }
    return a;
}

inline CMatrix random_matrix(int n, DetRng& rng, double scale = 1.0) {
    CMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = cxd(scale * rng.symmetric(), scale * rng.symmetric());
    return a;
}

inline CVector random_unit_vector(int n, DetRng& rng) {
    CVector v(n);
    double norm2 = 0.0;
    while (norm2 < 1e-12) {
        for (int i = 0; i < n; ++i) v[i] = cxd(rng.symmetric(), rng.symmetric());
        norm2 = 0.0;
        for (const cxd& z : v) norm2 += std::norm(z);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (cxd& z : v) z *= inv;
    return v;
}

// determinant by cofactor expansion along the first row (oracle, n <= ~8)
inline cxd cofactor_det(const CMatrix& a) {
    const int n = a.n();
    if (n == 1) return a(0, 0);
    cxd det(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        if (a(0, j) == cxd(0.0, 0.0)) continue;
        CMatrix minor(n - 1);
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c) {
                if (c == j) continue;
                minor(r - 1, cc++) = a(r, c);
            }
        }
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        det += sign * a(0, j) * cofactor_det(minor);
    }
    return det;
}

// det(H - t I) for Hermitian H is real for real t
inline double charpoly(const CMatrix& h, double t) {
    CMatrix shifted = h;
    for (int i = 0; i < h.n(); ++i) shifted(i, i) -= t;
    return cofactor_det(shifted).real();
}

// All eigenvalues of a Hermitian matrix by sign-change bracketing plus
// bisection of det(H - tI), returned non-increasing. Requires the spectrum
// to be simple enough for a fine scan to find n brackets.
inline std::vector<double> bisection_eigenvalues(const CMatrix& h, int scan_points = 20000) {
    const int n = h.n();
    double radius = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = std::abs(h(i, i));
        for (int j = 0; j < n; ++j)
            if (j != i) row += std::abs(h(i, j));
        radius = std::max(radius, row);
    }
    const double lo = -radius - 1.0, hi = radius + 1.0;
    std::vector<double> roots;
    double prev_t = lo;
    double prev_v = charpoly(h, lo);
    for (int k = 1; k <= scan_points; ++k) {
        const double t = lo + (hi - lo) * k / scan_points;
        const double v = charpoly(h, t);
        if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0) || v == 0.0) {
            double a = prev_t, b = t;
            double fa = prev_v;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = charpoly(h, mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_t = t;
        prev_v = v;
    }
    std::sort(roots.begin(), roots.end(), std::greater<double>());
    return roots;
}

// orthonormal basis of a random j-dimensional subspace, columns of an n x j slab
inline std::vector<CVector> random_subspace(int n, int j, DetRng& rng) {
    std::vector<CVector> basis;
    while (static_cast<int>(basis.size()) < j) {
        CVector v = random_unit_vector(n, rng);
        for (const CVector& b : basis) {
            const cxd c = adiag::vec_dot(b, v);
            for (int i = 0; i < n; ++i) v[i] -= c * b[i];
        }
        const double norm = adiag::vec_norm(v);
        if (norm < 1e-6) continue;
        for (cxd& z : v) z /= norm;
        basis.push_back(std::move(v));
    }
    return basis;
}

// min of the Rayleigh quotient over a subspace: smallest eigenvalue of the
// compressed matrix Q* A Q
inline double min_rayleigh(const CMatrix& a, const std::vector<CVector>& basis) {
    const int j = static_cast<int>(basis.size());
    CMatrix compressed(j);
    for (int p = 0; p < j; ++p) {
        const CVector ab = a.apply(basis[p]);
        for (int q = 0; q < j; ++q) compressed(q, p) = adiag::vec_dot(basis[q], ab);
    }
    const adiag::Spectrum sp = adiag::herm_eig(adiag::hermitize(compressed));
    return sp.values.back();
}

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace testutil
