// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fails. Tolerances are pinned here, not configurable. Criterion 10 drives
// the installed CLI binary; everything else goes through the library.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adiag/diag.hpp"
#include "adiag/io.hpp"

using namespace adiag;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int num, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", num, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <typename Fn>
void guarded(int num, const std::string& name, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        criterion(num, name, false, std::string("exception: ") + e.what());
    }
}

CMatrix random_hermitian(int n, DetRng& rng, double scale = 1.0) {
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

CMatrix random_matrix(int n, DetRng& rng) {
    CMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cxd(rng.symmetric(), rng.symmetric());
    return a;
}

cxd cofactor_det(const CMatrix& a) {
    const int n = a.n();
    if (n == 1) return a(0, 0);
    cxd det(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        CMatrix minor(n - 1);
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = a(r, c);
        }
        det += ((j % 2 == 0) ? 1.0 : -1.0) * a(0, j) * cofactor_det(minor);
    }
    return det;
}

// the 20-field corpus: 5 seeds x 4 dimensions
const std::uint64_t kCorpusSeeds[5] = {2025, 303, 7, 55, 99};
const int kCorpusDims[4] = {2, 3, 4, 5};

struct MeshSpec {
    MeshKind kind;
    int n;
};
const MeshSpec kMeshes[3] = {
    {MeshKind::interval, 101}, {MeshKind::circle, 128}, {MeshKind::square, 33}};

void criterion_1() {
    bool pass = true;
    std::string detail;
    int runs = 0;
    for (const MeshSpec& ms : kMeshes) {
        const MeshPtr mesh = build_mesh_shared(ms.kind, ms.n);
        for (std::uint64_t seed : kCorpusSeeds)
            for (int n : kCorpusDims) {
                const MatrixField a = model_fourier(mesh, ModelParams{n, 1, 1.0}, seed);
                const DiagonalizationReport r = approx_diagonalize_hermitian(a, 0.01, seed);
                ++runs;
                bool ok = r.status == DiagStatus::success && r.epsilon_achieved < 0.01 &&
                          r.breakdown.unitarity_defect <= 1e-9;
                if (ok) {
                    const auto spectra = pointwise_spectra(a);
                    for (int j = 0; j < n && ok; ++j)
                        for (int x = 0; x < mesh->node_count(); ++x)
                            if (std::abs(r.lambda[j].real_at(x) - spectra[j].real_at(x)) >=
                                0.01) {
                                ok = false;
                                break;
                            }
                }
                if (!ok && pass) {
                    pass = false;
                    detail = std::string(to_string(ms.kind)) + " seed " +
                             std::to_string(seed) + " n " + std::to_string(n) + ": " +
                             to_string(r.status) + " eps " +
                             std::to_string(r.epsilon_achieved) + " " + r.message;
                }
            }
    }
    if (pass) detail = std::to_string(runs) + " runs, all success below eps = 0.01";
    criterion(1, "Hermitian end-to-end on interval/circle/square", pass, detail);
}

void criterion_2() {
    bool pass = true;
    std::string detail;
    double worst_ratio = 0.0;
    const double eps = 1e-3;
    for (const MeshSpec& ms : kMeshes) {
        const MeshPtr mesh = build_mesh_shared(ms.kind, ms.n);
        for (std::uint64_t seed : kCorpusSeeds)
            for (int n : kCorpusDims) {
                const MatrixField a = model_fourier(mesh, ModelParams{n, 1, 1.0}, seed);
                const TridiagonalField t = tridiagonalize(a, eps, seed);
                const double bound = std::pow(n - 1.0, 1.5) * eps;
                worst_ratio = std::max(worst_ratio, t.offband_residual / bound);
                if (!(t.offband_residual < bound) && pass) {
                    pass = false;
                    detail = std::string(to_string(ms.kind)) + " n " + std::to_string(n) +
                             ": residual " + std::to_string(t.offband_residual) +
                             " vs bound " + std::to_string(bound);
                }
            }
    }
    if (pass) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "offband residual at most %.2e of the bound",
                      worst_ratio);
        detail = buf;
    }
    criterion(2, "tridiagonal reduction bound at eps = 1e-3", pass, detail);
}

void criterion_3() {
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 101);
    const MatrixField a = model_two_by_two(interval);
    const auto bands = pointwise_spectra(a);
    double worst = 0.0;
    for (int x = 0; x < interval->node_count(); ++x) {
        const double t = interval->nodes[x].coord[0];
        const double root = std::sqrt(t * t + 4.0);
        worst = std::max(worst, std::abs(bands[0].real_at(x) - (-t + root) / 2.0));
        worst = std::max(worst, std::abs(bands[1].real_at(x) - (-t - root) / 2.0));
    }
    criterion(3, "closed-form 2x2 eigenvalue fields within 1e-9", worst < 1e-9,
              "max deviation " + std::to_string(worst));
}

void criterion_4() {
    const MeshPtr mesh = build_mesh_shared(MeshKind::interval, 5);
    DetRng rng(777);
    bool pass = true;
    std::string detail;
    // 100 random tridiagonal instances, n <= 6: q_k vs cofactor determinants
    for (int rep = 0; rep < 100 && pass; ++rep) {
        const int n = 3 + static_cast<int>(rng.next_u64() % 4);
        TridiagonalField t;
        t.mesh = mesh;
        t.n = n;
        for (int k = 0; k < n; ++k) {
            ScalarField d(mesh, true);
            for (auto& v : d.values)
                v = (k == n - 1) ? cxd(0.0, 0.0) : cxd(rng.symmetric(), 0.0);
            t.diag.push_back(std::move(d));
        }
        for (int k = 0; k + 1 < n; ++k) {
            ScalarField s(mesh, k < n - 2);
            for (auto& v : s.values)
                v = (k < n - 2) ? cxd(0.05 + rng.uniform01(), 0.0)
                                : cxd(rng.symmetric(), rng.symmetric());
            t.sub.push_back(std::move(s));
        }
        const QSequence qs = q_sequence(t);
        const MatrixField dense = assemble_tridiagonal(t);
        for (int x = 0; x < mesh->node_count() && pass; ++x)
            for (int k = 1; k <= n - 1; ++k) {
                CMatrix block(k);
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) block(i, j) = dense.samples[x](i, j);
                if (std::abs(cofactor_det(block) - qs.q[k].values[x]) > 1e-9) {
                    pass = false;
                    detail = "q recursion mismatch at n " + std::to_string(n);
                    break;
                }
            }
    }
    // det(B'_{n-1}) = b after the distinct-spectrum step
    const MeshPtr interval = build_mesh_shared(MeshKind::interval, 21);
    for (std::uint64_t seed : {11ULL, 22ULL, 33ULL, 44ULL}) {
        for (int n : {3, 4, 5, 6}) {
            const MatrixField a = model_fourier(interval, ModelParams{n, 1, 1.0}, seed);
            const TridiagonalField t =
                tridiagonalize(a, 1e-3 / std::pow(n - 1.0, 1.5), seed);
            auto [tc, ann] = centered(t);
            const DistinctSpectrumResult r = distinct_spectrum_perturbation(tc, 1e-3, seed);
            for (int x = 0; x < interval->node_count() && pass; ++x) {
                CMatrix block(n - 1);
                for (int i = 0; i + 1 < n; ++i)
                    for (int j = 0; j + 1 < n; ++j) block(i, j) = r.b.samples[x](i, j);
                if (std::abs(cofactor_det(block) - r.det_target->values[x]) > 1e-9) {
                    pass = false;
                    detail = "det(B'_{n-1}) != b at n " + std::to_string(n);
                }
            }
        }
    }
    criterion(4, "q-recursion and leading-block determinant identities", pass, detail);
}

void criterion_5() {
    DetRng rng(515);
    bool pass = true;
    std::string detail;
    for (int rep = 0; rep < 1000 && pass; ++rep) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        const CMatrix a = random_hermitian(n, rng);
        const CMatrix b = random_hermitian(n, rng);
        const Spectrum sa = herm_eig(a);
        const Spectrum sb = herm_eig(b);
        const double dist = op_norm(a - b);
        for (int j = 0; j < n; ++j)
            if (std::abs(sa.values[j] - sb.values[j]) - dist > 1e-9) {
                pass = false;
                detail = "Weyl violated";
            }
        // min-max: random subspaces never exceed lambda_j; the top-j span attains it
        const int j = 1 + static_cast<int>(rng.next_u64() % n);
        CMatrix slab(n);
        std::vector<CVector> basis;
        for (int c = 0; c < j; ++c) {
            CVector v(n);
            for (int i = 0; i < n; ++i) v[i] = cxd(rng.symmetric(), rng.symmetric());
            for (const CVector& prev : basis) {
                const cxd coef = vec_dot(prev, v);
                for (int i = 0; i < n; ++i) v[i] -= coef * prev[i];
            }
            const double norm = vec_norm(v);
            if (norm < 1e-8) continue;
            for (cxd& z : v) z /= norm;
            basis.push_back(std::move(v));
        }
        if (static_cast<int>(basis.size()) == j) {
            CMatrix compressed(j);
            for (int p = 0; p < j; ++p) {
                const CVector av = a.apply(basis[p]);
                for (int q = 0; q < j; ++q) compressed(q, p) = vec_dot(basis[q], av);
            }
            const double min_rayleigh = herm_eig(hermitize(compressed)).values.back();
            if (min_rayleigh - sa.values[j - 1] > 1e-9) {
                pass = false;
                detail = "min-max upper bound violated";
            }
        }
        std::vector<CVector> top;
        for (int c = 0; c < j; ++c) top.push_back(sa.vectors.column(c));
        CMatrix compressed(j);
        for (int p = 0; p < j; ++p) {
            const CVector av = a.apply(top[p]);
            for (int q = 0; q < j; ++q) compressed(q, p) = vec_dot(top[q], av);
        }
        const double attained = herm_eig(hermitize(compressed)).values.back();
        if (std::abs(attained - sa.values[j - 1]) > 1e-9) {
            pass = false;
            detail = "min-max equality at the top span violated";
        }
    }
    criterion(5, "Weyl and min-max inequalities over 1000 random pairs", pass, detail);
}

void criterion_6() {
    DetRng rng(616);
    bool pass = true;
    std::string detail;
    for (int rep = 0; rep < 1000 && pass; ++rep) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 4);
        const CMatrix a = random_matrix(n, rng);
        const CMatrix b = random_matrix(n, rng);
        const double dist = op_norm(a - b);
        const auto [da, ta] = det_tr(a);
        const auto [db, tb] = det_tr(b);
        if (std::abs(ta - tb) - n * dist > 1e-9) {
            pass = false;
            detail = "trace bound violated";
        }
        double fact = 1.0;
        for (int k = 2; k <= n; ++k) fact *= k;
        const double na = op_norm(a), nb = op_norm(b);
        double growth = 0.0;
        for (int k = 0; k < n; ++k) growth += std::pow(na, k) * std::pow(nb, n - 1 - k);
        if (std::abs(da - db) - fact * growth * dist > 1e-9) {
            pass = false;
            detail = "determinant bound violated";
        }
    }
    criterion(6, "trace and determinant Lipschitz bounds over 1000 random pairs", pass, detail);
}

void criterion_7() {
    bool pass = true;
    std::string detail;
    for (int n : {8, 16, 32}) {
        const MeshPtr sphere = build_mesh_shared(MeshKind::sphere, n);
        const MatrixField berry = model_berry_sphere(sphere);
        const auto bands = eigenframes(berry);
        if (chern_number(bands[0]) != -1 || chern_number(bands[1]) != +1) {
            pass = false;
            detail = "Chern pair wrong at N " + std::to_string(n);
        }
        bool threw = false;
        try {
            trivialize(bands[0]);
        } catch (const ObstructionError& e) {
            threw = (e.chern == -1);
        }
        if (!threw) {
            pass = false;
            detail = "trivialize did not raise at N " + std::to_string(n);
        }
        const DiagonalizationReport r = approx_diagonalize_hermitian(berry, 0.1, 4);
        if (r.status != DiagStatus::obstructed) {
            pass = false;
            detail = "pipeline not obstructed at N " + std::to_string(n);
        }
    }
    for (int n : {16, 32}) {
        const auto bands =
            eigenframes(model_berry_sphere_deg2(build_mesh_shared(MeshKind::sphere, n)));
        if (chern_number(bands[0]) != -2 || chern_number(bands[1]) != +2) {
            pass = false;
            detail = "degree-2 pullback Chern pair wrong at N " + std::to_string(n);
        }
    }
    criterion(7, "Chern obstruction soundness on the Berry sphere", pass, detail);
}

void criterion_8() {
    bool pass = true;
    std::string detail;
    const MeshPtr circle = build_mesh_shared(MeshKind::circle, 128);
    const Cycle cycle = cycle_basis(*circle)[0];
    for (int k : {1, 2, 3}) {
        ModelParams p;
        p.k = k;
        const MatrixField v = model_winding_unitary(circle, p);
        const int w = winding_number(field_det_tr(v).first, cycle);
        if (w != k) {
            pass = false;
            detail = "det winding " + std::to_string(w) + " for k " + std::to_string(k);
        }
        if (k % 2 == 1) {
            const DiagonalizationReport r = approx_diagonalize_unitary(v, 0.1, 2);
            if (r.status != DiagStatus::obstructed) {
                pass = false;
                detail = "odd winding k " + std::to_string(k) + " not obstructed";
            }
        }
    }
    ModelParams p0;
    p0.k = 0;
    const DiagonalizationReport r0 =
        approx_diagonalize_unitary(model_winding_unitary(circle, p0), 0.1, 2);
    if (!(r0.status == DiagStatus::success && r0.epsilon_achieved < 0.1)) {
        pass = false;
        detail = "k = 0 control failed: " + std::string(to_string(r0.status));
    }
    criterion(8, "determinant-winding obstruction soundness", pass, detail);
}

void criterion_9() {
    bool pass = true;
    std::string detail;
    for (const MeshSpec ms : {MeshSpec{MeshKind::interval, 101}, MeshSpec{MeshKind::square, 17}}) {
        const MeshPtr mesh = build_mesh_shared(ms.kind, ms.n);
        const DiagonalizationReport r =
            diagonalize_projection(model_projection_rank1(mesh), 6);
        if (r.status != DiagStatus::success) {
            pass = false;
            detail = std::string("rank-1 projection failed on ") + to_string(ms.kind) + ": " +
                     r.message;
            continue;
        }
        for (const ScalarField& band : r.lambda)
            for (const cxd& v : band.values)
                if (!(v == cxd(0.0, 0.0) || v == cxd(1.0, 0.0))) {
                    pass = false;
                    detail = "diagonal entry not exactly idempotent";
                }
    }
    const DiagonalizationReport rb =
        diagonalize_projection(model_projection_sphere(build_mesh_shared(MeshKind::sphere, 16)), 6);
    if (rb.status != DiagStatus::obstructed) {
        pass = false;
        detail = "Berry band projector not obstructed";
    }
    criterion(9, "projection fields round to exact idempotents", pass, detail);
}

void criterion_10() {
#ifndef ADIAG_CLI_PATH
    criterion(10, "demo determinism (CLI)", false, "CLI path not configured");
#else
    bool pass = true;
    std::string detail;
    const fs::path base = fs::temp_directory_path() / "adiag_acceptance_demos";
    fs::remove_all(base);
    for (const char* name : {"two-by-two", "circle-rotation", "berry-sphere",
                             "winding-unitary", "projection-sphere"}) {
        for (int run = 1; run <= 2 && pass; ++run) {
            const fs::path dir = base / ("run" + std::to_string(run));
            const std::string cmd = std::string(ADIAG_CLI_PATH) + " demo " + name +
                                    " --outdir " + dir.string() + " --seed 42 > /dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
            if (code != 0 && code != 2) {
                pass = false;
                detail = std::string(name) + " exited " + std::to_string(code);
            }
        }
        if (!pass) break;
        auto stripped = [&](int run) {
            const fs::path p = base / ("run" + std::to_string(run)) / name / "report.json";
            std::ifstream in(p);
            nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
            j.erase("timing");
            return j.dump();
        };
        if (stripped(1) != stripped(2)) {
            pass = false;
            detail = std::string(name) + " reports differ between identical runs";
        }
    }
    criterion(10, "demo determinism (CLI, timing excluded)", pass, detail);
#endif
}

}  // namespace

int main() {
    std::printf("acceptance suite, tool version %s\n", kToolVersion);
    guarded(1, "Hermitian end-to-end on interval/circle/square", criterion_1);
    guarded(2, "tridiagonal reduction bound at eps = 1e-3", criterion_2);
    guarded(3, "closed-form 2x2 eigenvalue fields within 1e-9", criterion_3);
    guarded(4, "q-recursion and leading-block determinant identities", criterion_4);
    guarded(5, "Weyl and min-max inequalities over 1000 random pairs", criterion_5);
    guarded(6, "trace and determinant Lipschitz bounds over 1000 random pairs", criterion_6);
    guarded(7, "Chern obstruction soundness on the Berry sphere", criterion_7);
    guarded(8, "determinant-winding obstruction soundness", criterion_8);
    guarded(9, "projection fields round to exact idempotents", criterion_9);
    guarded(10, "demo determinism (CLI, timing excluded)", criterion_10);
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
