#pragma once

// Matrix- and scalar-valued fields over a mesh. A field is its node samples:
// sup-norms are node maxima, invertibility margins node minima, and no value
// is ever interpolated between nodes. continuity_modulus quantifies how well
// the samples represent a continuous field.

#include <memory>
#include <vector>

#include "adiag/mesh.hpp"
#include "adiag/numlin.hpp"

namespace adiag {

enum class FieldTag { hermitian, unitary, projection, general };

inline const char* to_string(FieldTag t) {
    switch (t) {
        case FieldTag::hermitian: return "hermitian";
        case FieldTag::unitary: return "unitary";
        case FieldTag::projection: return "projection";
        case FieldTag::general: return "general";
    }
    return "?";
}

inline FieldTag field_tag_from_string(const std::string& s) {
    if (s == "hermitian") return FieldTag::hermitian;
    if (s == "unitary") return FieldTag::unitary;
    if (s == "projection") return FieldTag::projection;
    if (s == "general") return FieldTag::general;
    throw ParseError("unknown field tag: " + s);
}

struct ScalarField {
    MeshPtr mesh;
    std::vector<cxd> values;
    bool real_valued = false;

    ScalarField() = default;
    ScalarField(MeshPtr m, bool real_flag)
        : mesh(std::move(m)), values(mesh->node_count(), cxd(0.0, 0.0)), real_valued(real_flag) {}

    double real_at(int node) const { return values[node].real(); }
};

struct MatrixField {
    MeshPtr mesh;
    int n = 0;
    std::vector<CMatrix> samples;
    FieldTag tag = FieldTag::general;

    MatrixField() = default;
    MatrixField(MeshPtr m, int dim, FieldTag t)
        : mesh(std::move(m)), n(dim), samples(mesh->node_count(), CMatrix(dim)), tag(t) {}
};

inline constexpr double kInvTol = 1e-8;
inline constexpr double kTagTol = 1e-10;

// largest violation of the structural tag over all nodes (0 for general)
inline double tag_defect(const MatrixField& f) {
    double worst = 0.0;
    const CMatrix id = CMatrix::identity(f.n);
    for (const CMatrix& a : f.samples) {
        switch (f.tag) {
            case FieldTag::hermitian:
                worst = std::max(worst, op_norm(a - a.adjoint()));
                break;
            case FieldTag::unitary:
                worst = std::max(worst, op_norm(a.adjoint() * a - id));
                break;
            case FieldTag::projection:
                worst = std::max(worst, op_norm(a - a.adjoint()));
                worst = std::max(worst, op_norm(a * a - a));
                break;
            case FieldTag::general:
                break;
        }
    }
    return worst;
}

inline void require_tag(const MatrixField& f, FieldTag expected, const char* who) {
    if (f.tag != expected)
        throw NotHermitian(std::string(who) + ": field tag is " + to_string(f.tag) +
                           ", expected " + to_string(expected));
}

inline MatrixField field_sub(const MatrixField& a, const MatrixField& b) {
    MatrixField r(a.mesh, a.n, FieldTag::general);
    for (size_t k = 0; k < a.samples.size(); ++k) r.samples[k] = a.samples[k] - b.samples[k];
    return r;
}

inline MatrixField field_mul(const MatrixField& a, const MatrixField& b) {
    MatrixField r(a.mesh, a.n, FieldTag::general);
    for (size_t k = 0; k < a.samples.size(); ++k) r.samples[k] = a.samples[k] * b.samples[k];
    return r;
}

// nodewise U*(x) A(x) U(x)
inline MatrixField field_conjugate(const MatrixField& a, const MatrixField& u) {
    MatrixField r(a.mesh, a.n, a.tag);
    for (size_t k = 0; k < a.samples.size(); ++k)
        r.samples[k] = u.samples[k].adjoint() * a.samples[k] * u.samples[k];
    return r;
}

// max over nodes of op_norm, the mesh-scale realization of the sup-norm;
// reduction runs in node-id order so results are bitwise reproducible
inline double sup_norm(const MatrixField& f) {
    double m = 0.0;
    for (const CMatrix& a : f.samples) m = std::max(m, op_norm(a));
    return m;
}

// sorted eigenvalue fields lambda_1 >= ... >= lambda_n, one herm_eig per node
inline std::vector<ScalarField> pointwise_spectra(const MatrixField& f) {
    require_tag(f, FieldTag::hermitian, "pointwise_spectra");
    std::vector<ScalarField> bands(f.n, ScalarField(f.mesh, true));
    for (int x = 0; x < f.mesh->node_count(); ++x) {
        const Spectrum sp = herm_eig(f.samples[x]);
        for (int j = 0; j < f.n; ++j) bands[j].values[x] = cxd(sp.values[j], 0.0);
    }
    return bands;
}

inline std::pair<ScalarField, ScalarField> field_det_tr(const MatrixField& f) {
    ScalarField det(f.mesh, false), tr(f.mesh, false);
    for (int x = 0; x < f.mesh->node_count(); ++x) {
        auto [d, t] = det_tr(f.samples[x]);
        det.values[x] = d;
        tr.values[x] = t;
    }
    return {det, tr};
}

// min over nodes of |value|
inline double invertibility_margin(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (const cxd& v : f.values) m = std::min(m, std::abs(v));
    return m;
}

// min over nodes of |det|
inline double invertibility_margin(const MatrixField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (const CMatrix& a : f.samples) m = std::min(m, std::abs(det_tr(a).first));
    return m;
}

inline bool is_invertible(const ScalarField& f, double inv_tol = kInvTol) {
    return invertibility_margin(f) > inv_tol;
}
inline bool is_invertible(const MatrixField& f, double inv_tol = kInvTol) {
    return invertibility_margin(f) > inv_tol;
}

// max over edges of op_norm(F(x) - F(y))
inline double continuity_modulus(const MatrixField& f) {
    double m = 0.0;
    for (const MeshEdge& e : f.mesh->edges)
        m = std::max(m, op_norm(f.samples[e.tail] - f.samples[e.head]));
    return m;
}

inline double continuity_modulus(const ScalarField& f) {
    double m = 0.0;
    for (const MeshEdge& e : f.mesh->edges)
        m = std::max(m, std::abs(f.values[e.tail] - f.values[e.head]));
    return m;
}

// true when every sample equals the first bit for bit
inline bool field_constant(const MatrixField& f) {
    for (const CMatrix& a : f.samples)
        if (!(a == f.samples.front())) return false;
    return true;
}

}  // namespace adiag
