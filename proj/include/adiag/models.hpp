#pragma once

// Built-in field generators. These are evaluated at node coordinates only and
// are fully determined by (name, mesh kind, resolution, params, seed), which
// is what makes golden-file tests and the generator form of the field file
// format reproducible.

#include <functional>
#include <string>

#include "adiag/field.hpp"
#include "adiag/rng.hpp"

namespace adiag {

struct ModelParams {
    int n = 2;          // matrix dimension where the model is dimension-generic
    int k = 1;          // winding multiplier for the unitary circle models
    double scale = 1.0; // overall amplitude
};

namespace detail {

inline CMatrix random_hermitian(int n, DetRng& rng, double scale) {
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

// smooth scalar basis adapted to each mesh geometry
inline std::vector<double> smooth_basis(const Mesh& m, int node) {
    const auto& c = m.nodes[node].coord;
    switch (m.kind) {
        case MeshKind::interval: {
            const double x = c[0];
            return {1.0, std::cos(M_PI * x), std::sin(M_PI * x), std::cos(2.0 * M_PI * x),
                    std::sin(2.0 * M_PI * x)};
        }
        case MeshKind::circle: {
            const double t = c[0];
            return {1.0, std::cos(t), std::sin(t), std::cos(2.0 * t), std::sin(2.0 * t)};
        }
        case MeshKind::square: {
            const double x = c[0], y = c[1];
            return {1.0,
                    std::cos(M_PI * x),
                    std::sin(M_PI * x),
                    std::cos(M_PI * y),
                    std::sin(M_PI * y),
                    std::cos(M_PI * x) * std::cos(M_PI * y),
                    std::sin(M_PI * x) * std::sin(M_PI * y)};
        }
        case MeshKind::torus: {
            const double t = c[0], p = c[1];
            return {1.0,
                    std::cos(t),
                    std::sin(t),
                    std::cos(p),
                    std::sin(p),
                    std::cos(t) * std::cos(p),
                    std::sin(t) * std::sin(p)};
        }
        case MeshKind::sphere: {
            const double x = c[0], y = c[1], z = c[2];
            return {1.0, x, y, z, x * y, y * z, z * x, x * x - y * y, 3.0 * z * z - 1.0};
        }
    }
    return {1.0};
}

inline CMatrix pauli_dot(double x, double y, double z) {
    CMatrix a(2);
    a(0, 0) = cxd(z, 0.0);
    a(0, 1) = cxd(x, -y);
    a(1, 0) = cxd(x, y);
    a(1, 1) = cxd(-z, 0.0);
    return a;
}

// azimuth-doubling self-map of the unit sphere, degree 2
inline std::array<double, 3> double_azimuth(const std::array<double, 3>& p) {
    const double rho2 = p[0] * p[0] + p[1] * p[1];
    if (rho2 == 0.0) return {0.0, 0.0, p[2]};
    const double rho = std::sqrt(rho2);
    return {(p[0] * p[0] - p[1] * p[1]) / rho, 2.0 * p[0] * p[1] / rho, p[2]};
}

inline CMatrix matrix_exp_i(const CMatrix& h) {
    const Spectrum sp = herm_eig(h);
    const int n = h.n();
    CMatrix r(n);
    for (int k = 0; k < n; ++k) {
        const cxd w = std::polar(1.0, sp.values[k]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                r(i, j) += sp.vectors(i, k) * w * std::conj(sp.vectors(j, k));
    }
    return r;
}

}  // namespace detail

// Seeded constant Hermitian field.
inline MatrixField model_constant(MeshPtr mesh, const ModelParams& p, std::uint64_t seed) {
    DetRng rng(mix_seed(seed, 0xC0));
    const CMatrix a = detail::random_hermitian(p.n, rng, p.scale);
    MatrixField f(std::move(mesh), p.n, FieldTag::hermitian);
    for (auto& s : f.samples) s = a;
    return f;
}

// Smooth random Hermitian field: one random coefficient matrix per smooth
// basis function, amplitudes decaying with the basis index.
inline MatrixField model_fourier(MeshPtr mesh, const ModelParams& p, std::uint64_t seed) {
    DetRng rng(mix_seed(seed, 0xF0));
    const auto basis0 = detail::smooth_basis(*mesh, 0);
    std::vector<CMatrix> coeff;
    for (size_t b = 0; b < basis0.size(); ++b)
        coeff.push_back(detail::random_hermitian(p.n, rng, p.scale / (1.0 + 0.7 * b)));
    MatrixField f(mesh, p.n, FieldTag::hermitian);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const auto basis = detail::smooth_basis(*mesh, x);
        CMatrix a(p.n);
        for (size_t b = 0; b < basis.size(); ++b) a = a + coeff[b] * cxd(basis[b], 0.0);
        f.samples[x] = a;
    }
    return f;
}

// [[0, 1], [1, -x]] on the interval; eigenvalues (-x +- sqrt(x^2+4))/2.
inline MatrixField model_two_by_two(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::hermitian);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const double t = mesh->nodes[x].coord[0];
        CMatrix a(2);
        a(0, 1) = cxd(1.0, 0.0);
        a(1, 0) = cxd(1.0, 0.0);
        a(1, 1) = cxd(-t, 0.0);
        f.samples[x] = a;
    }
    return f;
}

// [[cos t, sin t], [sin t, -cos t]] over the circle, eigenvalues +-1.
inline MatrixField model_circle_rotation(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::hermitian);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const double t = mesh->nodes[x].coord[0];
        f.samples[x] = detail::pauli_dot(std::sin(t), 0.0, std::cos(t));
    }
    return f;
}

// p . sigma on the sphere; band Chern numbers -1 (lower eigenvalue band of
// the report ordering carries +1 eigenvalue).
inline MatrixField model_berry_sphere(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::hermitian);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const auto& c = mesh->nodes[x].coord;
        f.samples[x] = detail::pauli_dot(c[0], c[1], c[2]);
    }
    return f;
}

// Berry field pulled back along a degree-2 self-map of the sphere.
inline MatrixField model_berry_sphere_deg2(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::hermitian);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const auto q = detail::double_azimuth(mesh->nodes[x].coord);
        f.samples[x] = detail::pauli_dot(q[0], q[1], q[2]);
    }
    return f;
}

// [[0, 1], [e^{i k t}, 0]] over the circle; det winds k times.
inline MatrixField model_winding_unitary(MeshPtr mesh, const ModelParams& p) {
    MatrixField f(mesh, 2, FieldTag::unitary);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const double t = mesh->nodes[x].coord[0];
        CMatrix a(2);
        a(0, 1) = cxd(1.0, 0.0);
        a(1, 0) = std::polar(1.0, p.k * t);
        f.samples[x] = a;
    }
    return f;
}

// diag(e^{i t}, e^{-i t}) over the circle; det identically 1.
inline MatrixField model_unitary_diag(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::unitary);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const double t = mesh->nodes[x].coord[0];
        CMatrix a(2);
        a(0, 0) = std::polar(1.0, t);
        a(1, 1) = std::polar(1.0, -t);
        f.samples[x] = a;
    }
    return f;
}

// exp(i H) for a smooth Hermitian field squashed well inside the principal
// branch; winding-free and diagonalizable along the logarithm route.
inline MatrixField model_unitary_exp(MeshPtr mesh, const ModelParams& p, std::uint64_t seed) {
    ModelParams q = p;
    q.scale = 0.3 * p.scale;
    MatrixField h = model_fourier(mesh, q, seed);
    MatrixField f(mesh, p.n, FieldTag::unitary);
    for (int x = 0; x < mesh->node_count(); ++x)
        f.samples[x] = detail::matrix_exp_i(h.samples[x]);
    return f;
}

// rank-1 projector onto span(cos x, sin x) over the interval
inline MatrixField model_projection_rank1(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::projection);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const double t = mesh->nodes[x].coord[0];
        const double c = std::cos(t), s = std::sin(t);
        CMatrix a(2);
        a(0, 0) = cxd(c * c, 0.0);
        a(0, 1) = cxd(c * s, 0.0);
        a(1, 0) = cxd(c * s, 0.0);
        a(1, 1) = cxd(s * s, 0.0);
        f.samples[x] = a;
    }
    return f;
}

// projector onto the lower band of p . sigma, the nontrivial line bundle
inline MatrixField model_projection_sphere(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::projection);
    const CMatrix id = CMatrix::identity(2);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const auto& c = mesh->nodes[x].coord;
        f.samples[x] = (id - detail::pauli_dot(c[0], c[1], c[2])) * cxd(0.5, 0.0);
    }
    return f;
}

inline MatrixField make_model(const std::string& name, MeshPtr mesh, const ModelParams& p,
                              std::uint64_t seed) {
    if (name == "constant") return model_constant(std::move(mesh), p, seed);
    if (name == "fourier") return model_fourier(std::move(mesh), p, seed);
    if (name == "two-by-two") return model_two_by_two(std::move(mesh));
    if (name == "circle-rotation") return model_circle_rotation(std::move(mesh));
    if (name == "berry-sphere") return model_berry_sphere(std::move(mesh));
    if (name == "berry-sphere-deg2") return model_berry_sphere_deg2(std::move(mesh));
    if (name == "winding-unitary") return model_winding_unitary(std::move(mesh), p);
    if (name == "unitary-diag") return model_unitary_diag(std::move(mesh));
    if (name == "unitary-exp") return model_unitary_exp(std::move(mesh), p, seed);
    if (name == "projection-rank1") return model_projection_rank1(std::move(mesh));
    if (name == "projection-sphere") return model_projection_sphere(std::move(mesh));
    throw ParseError("unknown model: " + name);
}

inline std::vector<std::string> model_names() {
    return {"constant",      "fourier",           "two-by-two",   "circle-rotation",
            "berry-sphere",  "berry-sphere-deg2", "winding-unitary", "unitary-diag",
            "unitary-exp",   "projection-rank1",  "projection-sphere"};
}

}  // namespace adiag
