#include <catch2/catch_amalgamated.hpp>

#include "adiag/diag.hpp"
#include "helpers.hpp"

using namespace adiag;

namespace {

// [[0, e^{2 pi i t}], [e^{-2 pi i t}, 0]] over the unit interval
MatrixField phase_offdiag_model(MeshPtr mesh) {
    MatrixField f(mesh, 2, FieldTag::hermitian);
    for (int x = 0; x < mesh->node_count(); ++x) {
        const double t = 2.0 * M_PI * mesh->nodes[x].coord[0];
        f.samples[x](0, 1) = std::polar(1.0, t);
        f.samples[x](1, 0) = std::polar(1.0, -t);
    }
    return f;
}

MatrixField constant_projection(MeshPtr mesh) {
    MatrixField f(std::move(mesh), 2, FieldTag::projection);
    for (auto& s : f.samples) s(0, 0) = 1.0;
    return f;
}

// conjugated diagonal phases: eigenvalue angles cover the whole circle but
// the determinant does not wind
MatrixField covering_unitary(MeshPtr mesh) {
    MatrixField f(std::move(mesh), 2, FieldTag::unitary);
    const double r = 1.0 / std::sqrt(2.0);
    for (int x = 0; x < f.mesh->node_count(); ++x) {
        const double t = f.mesh->nodes[x].coord[0];
        CMatrix d(2);
        d(0, 0) = std::polar(1.0, t);
        d(1, 1) = std::polar(1.0, -t);
        CMatrix h(2);
        h(0, 0) = h(0, 1) = h(1, 0) = r;
        h(1, 1) = -r;
        f.samples[x] = h * d * h;
    }
    return f;
}

}  // namespace

TEST_CASE("hermitian: constant field takes the single-matrix fast path") {
    for (auto kind : {MeshKind::interval, MeshKind::sphere}) {
        const MeshPtr mesh = build_mesh_shared(kind, kind == MeshKind::interval ? 9 : 6);
        const MatrixField a = model_constant(mesh, ModelParams{3, 1, 1.0}, 42);
        const DiagonalizationReport r = approx_diagonalize_hermitian(a, 0.1, 42);
        REQUIRE(r.status == DiagStatus::success);
        REQUIRE(r.epsilon_achieved < 1e-9);
        REQUIRE(r.u.has_value());
        for (const CMatrix& s : r.u->samples) REQUIRE(s == r.u->samples.front());
    }
}

TEST_CASE("hermitian: phase off-diagonal model meets eps = 0.05 with flat spectrum") {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 64);
    const MatrixField a = phase_offdiag_model(interval);
    const DiagonalizationReport r = approx_diagonalize_hermitian(a, 0.05, 7);
    REQUIRE(r.status == DiagStatus::success);
    REQUIRE(r.epsilon_achieved < 0.05);
    for (int x = 0; x < interval->node_count(); ++x) {
        REQUIRE(r.lambda[0].real_at(x) == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(r.lambda[1].real_at(x) == Catch::Approx(-1.0).margin(1e-10));
    }
    const VerifyResult v = verify_report(a, r);
    REQUIRE(v.ok);
}

TEST_CASE("hermitian: Berry sphere reports the obstruction") {
    const MeshPtr sphere = build_mesh_shared(MeshKind::sphere, 16);
    const MatrixField a = model_berry_sphere(sphere);
    const DiagonalizationReport r = approx_diagonalize_hermitian(a, 0.1, 11);
    REQUIRE(r.status == DiagStatus::obstructed);
    REQUIRE(r.obstruction.chern_numbers == std::vector<int>{-1, +1});
    REQUIRE_FALSE(r.u.has_value());
}

TEST_CASE("hermitian: end-to-end on the solvable mesh kinds") {
    struct Case {
        MeshKind kind;
        int n_mesh;
    };
    for (const Case c : {Case{MeshKind::interval, 31}, Case{MeshKind::circle, 32},
                         Case{MeshKind::square, 17}}) {
        const MeshPtr mesh = build_mesh_shared(c.kind, c.n_mesh);
        for (double eps : {0.1, 0.01}) {
            const MatrixField a = model_fourier(mesh, ModelParams{3, 1, 1.0}, 2025);
            const DiagonalizationReport r = approx_diagonalize_hermitian(a, eps, 5);
            INFO(to_string(c.kind) << " eps " << eps << ": " << r.message);
            REQUIRE(r.status == DiagStatus::success);
            REQUIRE(r.epsilon_achieved < eps);
            REQUIRE(r.breakdown.unitarity_defect <= 1e-9);
            const auto spectra = pointwise_spectra(a);
            for (int j = 0; j < 3; ++j)
                for (int x = 0; x < mesh->node_count(); ++x)
                    REQUIRE(std::abs(r.lambda[j].real_at(x) - spectra[j].real_at(x)) < eps);
        }
    }
}

TEST_CASE("hermitian: every built-in model solves on the H2-trivial mesh kinds") {
    struct Case {
        MeshKind kind;
        int n_mesh;
    };
    for (const Case c : {Case{MeshKind::interval, 31}, Case{MeshKind::circle, 32},
                         Case{MeshKind::square, 17}}) {
        const MeshPtr mesh = build_mesh_shared(c.kind, c.n_mesh);
        for (const char* name : {"constant", "fourier", "two-by-two", "circle-rotation"}) {
            const MatrixField a = make_model(name, mesh, ModelParams{2, 1, 1.0}, 77);
            for (double eps : {0.1, 0.01}) {
                const DiagonalizationReport r = approx_diagonalize_hermitian(a, eps, 6);
                INFO(name << " on " << to_string(c.kind) << " eps " << eps << ": " << r.message);
                REQUIRE(r.status == DiagStatus::success);
                REQUIRE(r.epsilon_achieved < eps);
            }
        }
    }
}

TEST_CASE("hermitian: halving eps never turns success into obstructed") {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 21);
    const MatrixField a = model_fourier(interval, ModelParams{4, 1, 1.0}, 303);
    const DiagonalizationReport coarse = approx_diagonalize_hermitian(a, 0.1, 3);
    const DiagonalizationReport fine = approx_diagonalize_hermitian(a, 0.05, 3);
    REQUIRE(coarse.status == DiagStatus::success);
    REQUIRE(fine.status != DiagStatus::obstructed);

    const MeshPtr sphere = build_mesh_shared(MeshKind::sphere, 8);
    const MatrixField berry = model_berry_sphere(sphere);
    REQUIRE(approx_diagonalize_hermitian(berry, 0.1, 3).status == DiagStatus::obstructed);
    REQUIRE(approx_diagonalize_hermitian(berry, 0.05, 3).status == DiagStatus::obstructed);
}

TEST_CASE("hermitian: bitwise deterministic") {
    const MeshPtr circle = build_mesh_shared(MeshKind::circle, 16);
    const MatrixField a = model_fourier(circle, ModelParams{3, 1, 1.0}, 88);
    const DiagonalizationReport r1 = approx_diagonalize_hermitian(a, 0.05, 9);
    const DiagonalizationReport r2 = approx_diagonalize_hermitian(a, 0.05, 9);
    REQUIRE(r1.epsilon_achieved == r2.epsilon_achieved);
    for (int x = 0; x < circle->node_count(); ++x)
        REQUIRE(r1.u->samples[x] == r2.u->samples[x]);
}

TEST_CASE("projection: constant diag(1, 0) is exact") {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 9);
    const DiagonalizationReport r = diagonalize_projection(constant_projection(interval), 4);
    REQUIRE(r.status == DiagStatus::success);
    for (int x = 0; x < interval->node_count(); ++x) {
        REQUIRE(r.lambda[0].values[x] == cxd(1.0, 0.0));
        REQUIRE(r.lambda[1].values[x] == cxd(0.0, 0.0));
    }
}

TEST_CASE("projection: rank-1 rotating projector rounds to diag(1, 0)") {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 41);
    const MatrixField p = model_projection_rank1(interval);
    const DiagonalizationReport r = diagonalize_projection(p, 6);
    REQUIRE(r.status == DiagStatus::success);
    REQUIRE(r.epsilon_achieved < 0.25);
    for (int x = 0; x < interval->node_count(); ++x) {
        REQUIRE(r.lambda[0].values[x] == cxd(1.0, 0.0));
        REQUIRE(r.lambda[1].values[x] == cxd(0.0, 0.0));
    }
    // rounded diagonal reproduces U*PU within twice the residual
    double worst = 0.0;
    for (int x = 0; x < interval->node_count(); ++x) {
        CMatrix d = r.u->samples[x].adjoint() * p.samples[x] * r.u->samples[x];
        d(0, 0) -= 1.0;
        worst = std::max(worst, op_norm(d));
    }
    REQUIRE(worst <= 2.0 * r.epsilon_achieved + 1e-12);
}

TEST_CASE("projection: Berry band projector is obstructed") {
    const MeshPtr sphere = build_mesh_shared(MeshKind::sphere, 12);
    const DiagonalizationReport r = diagonalize_projection(model_projection_sphere(sphere), 8);
    REQUIRE(r.status == DiagStatus::obstructed);
    REQUIRE(r.obstruction.chern_available);
    bool has_nonzero = false;
    for (int c : r.obstruction.chern_numbers) has_nonzero |= (c != 0);
    REQUIRE(has_nonzero);
}

TEST_CASE("unitary: identity and exactly diagonal fields succeed immediately") {
    const MeshPtr circle = build_mesh_shared(MeshKind::circle, 24);
    MatrixField id(circle, 2, FieldTag::unitary);
    for (auto& s : id.samples) s = CMatrix::identity(2);
    DiagonalizationReport r = approx_diagonalize_unitary(id, 0.05, 5);
    REQUIRE(r.status == DiagStatus::success);
    REQUIRE(r.epsilon_achieved <= 1e-15);

    const MatrixField vd = model_unitary_diag(circle);
    r = approx_diagonalize_unitary(vd, 0.05, 5);
    REQUIRE(r.status == DiagStatus::success);
    REQUIRE(r.obstruction.winding_numbers == std::vector<int>{0});
    REQUIRE(r.epsilon_achieved < 0.05);
    const VerifyResult v = verify_report(vd, r);
    REQUIRE(v.ok);
}

TEST_CASE("unitary: odd winding is obstructed, the control proceeds") {
    const MeshPtr circle = build_mesh_shared(MeshKind::circle, 32);
    const MatrixField v1 = model_winding_unitary(circle, ModelParams{2, 1, 1.0});
    DiagonalizationReport r = approx_diagonalize_unitary(v1, 0.1, 3);
    REQUIRE(r.status == DiagStatus::obstructed);
    REQUIRE(r.obstruction.winding_numbers == std::vector<int>{1});

    const MatrixField v0 = model_winding_unitary(circle, ModelParams{2, 0, 1.0});
    r = approx_diagonalize_unitary(v0, 0.1, 3);
    REQUIRE(r.status == DiagStatus::success);
    REQUIRE(r.epsilon_achieved < 0.1);
}

TEST_CASE("unitary: smooth winding-free field runs the logarithm route") {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 21);
    const MatrixField v = model_unitary_exp(interval, ModelParams{3, 1, 1.0}, 17);
    const DiagonalizationReport r = approx_diagonalize_unitary(v, 0.05, 21);
    REQUIRE(r.status == DiagStatus::success);
    REQUIRE(r.epsilon_achieved < 0.05);
    // diagonal entries are unit modulus and match the spectrum angles
    const VerifyResult check = verify_report(v, r);
    REQUIRE(check.ok);
    for (int x = 0; x < interval->node_count(); ++x) {
        const UnitaryEig ue = unitary_eig(v.samples[x]);
        for (int k = 0; k < 3; ++k) {
            const double d_angle =
                std::remainder(r.lambda[k].real_at(x) - r.log_rotation, 2.0 * M_PI);
            double best = 10.0;
            for (double ang : ue.angles)
                best = std::min(best, std::abs(std::remainder(ang - d_angle, 2.0 * M_PI)));
            REQUIRE(best < 0.05);
        }
    }
}

TEST_CASE("unitary: spectrum covering the circle is reported unresolved") {
    const MeshPtr circle = build_mesh_shared(MeshKind::circle, 48);
    const MatrixField v = covering_unitary(circle);
    const DiagonalizationReport r = approx_diagonalize_unitary(v, 0.1, 5);
    REQUIRE(r.status == DiagStatus::unresolved);
    REQUIRE_FALSE(r.angle_histogram.empty());
    int total = 0;
    for (int c : r.angle_histogram) total += c;
    REQUIRE(total == 2 * circle->node_count());
}

TEST_CASE("verify_report: accepts the genuine report and its phase twins") {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 17);
    const MatrixField a = model_fourier(interval, ModelParams{3, 1, 1.0}, 55);
    DiagonalizationReport r = approx_diagonalize_hermitian(a, 0.05, 55);
    REQUIRE(r.status == DiagStatus::success);
    REQUIRE(verify_report(a, r).ok);

    // flipping one column phase at one node leaves the residual unchanged
    DiagonalizationReport twisted = r;
    for (int i = 0; i < 3; ++i) twisted.u->samples[5](i, 2) *= -1.0;
    twisted.epsilon_achieved = detail::diag_residual(a, *twisted.u, twisted.lambda);
    REQUIRE(twisted.epsilon_achieved == Catch::Approx(r.epsilon_achieved).margin(1e-12));
    REQUIRE(verify_report(a, twisted).ok);
}

TEST_CASE("verify_report: catches corruption and disorder") {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 17);
    const MatrixField a = model_fourier(interval, ModelParams{3, 1, 1.0}, 56);
    const DiagonalizationReport r = approx_diagonalize_hermitian(a, 0.05, 56);
    REQUIRE(r.status == DiagStatus::success);

    DiagonalizationReport corrupt = r;
    corrupt.u->samples[3](1, 1) += 0.1;
    const VerifyResult vc = verify_report(a, corrupt);
    REQUIRE_FALSE(vc.ok);
    REQUIRE(vc.unitarity_defect > 1e-9);

    DiagonalizationReport swapped = r;
    std::swap(swapped.lambda[0], swapped.lambda[2]);
    const VerifyResult vs = verify_report(a, swapped);
    REQUIRE_FALSE(vs.ok);
    REQUIRE_FALSE(vs.sorted_ok);
}
