#pragma once

// Top-level algorithms: approximate diagonalization of Hermitian fields
// (tridiagonalize -> distinct-spectrum perturbation -> eigenframes ->
// trivialize -> assemble, with the error budget split eps/14 and 6 eps/14),
// exact diagonalization of projection fields by rounding, the unitary route
// through a branch-cut rotation and the principal logarithm, and independent
// report verification.

#include <chrono>
#include <optional>

#include "adiag/bundle.hpp"
#include "adiag/models.hpp"

namespace adiag {

enum class DiagStatus { success, obstructed, unresolved };

inline const char* to_string(DiagStatus s) {
    switch (s) {
        case DiagStatus::success: return "success";
        case DiagStatus::obstructed: return "obstructed";
        case DiagStatus::unresolved: return "unresolved";
    }
    return "?";
}

struct ResidualBreakdown {
    double offband_residual = 0.0;    // tridiagonal reconstruction error
    double perturbation_move = 0.0;   // sup_norm(B - B0)
    double conjugator_defect = 0.0;   // edge discontinuity of U1
    double u_edge_defect = 0.0;       // edge discontinuity of the final U
    double unitarity_defect = 0.0;    // max nodewise op_norm(U*U - I)
};

struct DiagonalizationReport {
    DiagStatus status = DiagStatus::unresolved;
    double epsilon_requested = 0.0;
    double epsilon_achieved = 0.0;
    std::optional<MatrixField> u;
    std::vector<ScalarField> lambda;
    ObstructionReport obstruction;
    ResidualBreakdown breakdown;
    std::string message;

    FieldTag input_tag = FieldTag::hermitian;
    double log_rotation = 0.0;  // unitary route: D_k = exp(i (lambda_k - log_rotation))
    std::vector<int> angle_histogram;  // filled when the rotation search fails

    MeshKind mesh_kind = MeshKind::interval;
    int resolution = 0;
    int n = 0;
    std::uint64_t seed = 0;
    double elapsed_seconds = 0.0;
};

namespace detail {

class StageTimer {
  public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline void stamp_meta(DiagonalizationReport& r, const MatrixField& a, double eps,
                       std::uint64_t seed) {
    r.epsilon_requested = eps;
    r.input_tag = a.tag;
    r.mesh_kind = a.mesh->kind;
    r.resolution = a.mesh->resolution;
    r.n = a.n;
    r.seed = seed;
}

inline double diag_residual(const MatrixField& a, const MatrixField& u,
                            const std::vector<ScalarField>& lambda) {
    double worst = 0.0;
    for (int x = 0; x < a.mesh->node_count(); ++x) {
        CMatrix d = u.samples[x].adjoint() * a.samples[x] * u.samples[x];
        for (int j = 0; j < a.n; ++j) d(j, j) -= lambda[j].values[x];
        worst = std::max(worst, op_norm(d));
    }
    return worst;
}

inline double max_unitarity_defect(const MatrixField& u) {
    double worst = 0.0;
    const CMatrix id = CMatrix::identity(u.n);
    for (const CMatrix& s : u.samples)
        worst = std::max(worst, op_norm(s.adjoint() * s - id));
    return worst;
}

inline double field_min_gap(const std::vector<ScalarField>& bands) {
    double gap = std::numeric_limits<double>::infinity();
    const int nodes = bands.front().mesh->node_count();
    std::vector<double> v(bands.size());
    for (int x = 0; x < nodes; ++x) {
        for (size_t j = 0; j < bands.size(); ++j) v[j] = bands[j].real_at(x);
        gap = std::min(gap, min_gap(v));
    }
    return gap;
}

// constant fields short-circuit the whole pipeline: one diagonalization
// serves every node
inline DiagonalizationReport constant_field_report(const MatrixField& a, double eps,
                                                   std::uint64_t seed) {
    DiagonalizationReport r;
    stamp_meta(r, a, eps, seed);
    const Spectrum sp = herm_eig(a.samples.front());
    MatrixField u(a.mesh, a.n, FieldTag::unitary);
    for (auto& s : u.samples) s = sp.vectors;
    r.lambda.assign(a.n, ScalarField(a.mesh, true));
    for (int j = 0; j < a.n; ++j)
        for (int x = 0; x < a.mesh->node_count(); ++x)
            r.lambda[j].values[x] = cxd(sp.values[j], 0.0);
    r.epsilon_achieved = diag_residual(a, u, r.lambda);
    r.breakdown.unitarity_defect = max_unitarity_defect(u);
    r.u = std::move(u);
    r.obstruction.resolved.assign(a.n, true);
    if (a.mesh->closed_2d) {
        r.obstruction.chern_numbers.assign(a.n, 0);  // constant frames, zero curvature
        r.obstruction.chern_available = true;
    }
    r.obstruction.min_gap = min_gap(sp.values);
    r.status = DiagStatus::success;
    return r;
}

}  // namespace detail

inline DiagonalizationReport approx_diagonalize_hermitian(const MatrixField& a, double eps,
                                                          std::uint64_t seed) {
    require_tag(a, FieldTag::hermitian, "approx_diagonalize_hermitian");
    if (!(eps > 0.0)) throw Error("approx_diagonalize_hermitian: eps must be positive");
    const detail::StageTimer timer;

    if (field_constant(a)) {
        DiagonalizationReport r = detail::constant_field_report(a, eps, seed);
        r.elapsed_seconds = timer.seconds();
        return r;
    }

    DiagonalizationReport r;
    detail::stamp_meta(r, a, eps, seed);
    const double eps0 = eps / 14.0;  // 7 eps0 for the movement, 7 eps0 for the Weyl transfer
    try {
        const double stage_eps =
            (a.n >= 3) ? eps0 / std::pow(a.n - 1.0, 1.5) : eps0;
        const TridiagonalField t = tridiagonalize(a, stage_eps, mix_seed(seed, 1));
        r.breakdown.offband_residual = t.offband_residual;
        r.breakdown.conjugator_defect = t.gauge_defect;

        auto [tc, ann] = centered(t);
        const DistinctSpectrumResult d =
            distinct_spectrum_perturbation(tc, eps0, mix_seed(seed, 2));
        r.breakdown.perturbation_move = d.movement;
        r.obstruction.min_gap = d.min_gap;

        std::vector<LineBundleData> bands = eigenframes(d.b);
        r.obstruction.resolved.resize(a.n);
        r.obstruction.min_overlap = std::numeric_limits<double>::infinity();
        for (int j = 0; j < a.n; ++j) {
            r.obstruction.resolved[j] = bands[j].resolved;
            r.obstruction.min_overlap = std::min(r.obstruction.min_overlap, bands[j].min_overlap);
        }

        if (a.mesh->closed_2d) {
            r.obstruction.chern_numbers.resize(a.n);
            for (int j = 0; j < a.n; ++j) r.obstruction.chern_numbers[j] = chern_number(bands[j]);
            r.obstruction.chern_available = true;
            if (r.obstruction.any_nonzero()) {
                r.status = DiagStatus::obstructed;
                r.message = "nonzero band Chern number blocks a global eigenframe";
                r.elapsed_seconds = timer.seconds();
                return r;
            }
        }

        std::vector<LineBundleData> aligned;
        aligned.reserve(a.n);
        for (const LineBundleData& band : bands) aligned.push_back(trivialize(band));
        const MatrixField u2 = assemble_unitary(aligned);

        MatrixField u(a.mesh, a.n, FieldTag::unitary);
        for (int x = 0; x < a.mesh->node_count(); ++x)
            u.samples[x] = t.conjugator.samples[x] * u2.samples[x];

        r.lambda = pointwise_spectra(a);
        r.epsilon_achieved = detail::diag_residual(a, u, r.lambda);
        r.breakdown.u_edge_defect = continuity_modulus(u);
        r.breakdown.unitarity_defect = detail::max_unitarity_defect(u);
        r.u = std::move(u);

        if (r.epsilon_achieved < eps) {
            r.status = DiagStatus::success;
        } else {
            r.status = DiagStatus::unresolved;
            r.message = "residual " + std::to_string(r.epsilon_achieved) +
                        " did not meet the requested bound";
        }
    } catch (const ObstructionError& e) {
        r.status = DiagStatus::obstructed;
        r.message = e.what();
        if (r.obstruction.chern_numbers.empty())
            r.obstruction.chern_numbers.assign(a.n, 0);
        if (e.band >= 0 && e.band < a.n) r.obstruction.chern_numbers[e.band] = e.chern;
        r.obstruction.chern_available = true;
    } catch (const GapCollapse& e) {
        r.status = DiagStatus::unresolved;
        r.message = e.what();
    } catch (const Unresolved& e) {
        r.status = DiagStatus::unresolved;
        r.message = e.what();
    } catch (const PerturbationFailed& e) {
        r.status = DiagStatus::unresolved;
        r.message = e.what();
    }
    r.elapsed_seconds = timer.seconds();
    return r;
}

// Projection case: run the Hermitian pipeline at eps = 1/4, then round the
// diagonal to {0, 1}. Weyl keeps every eigenvalue within 1/4 of {0, 1}, so
// any value in (1/4, 3/4) is a genuine ambiguity.
inline DiagonalizationReport diagonalize_projection(const MatrixField& p, std::uint64_t seed) {
    require_tag(p, FieldTag::projection, "diagonalize_projection");
    MatrixField as_herm = p;
    as_herm.tag = FieldTag::hermitian;
    DiagonalizationReport r = approx_diagonalize_hermitian(as_herm, 0.25, seed);
    r.input_tag = FieldTag::projection;
    if (r.status != DiagStatus::success) return r;
    try {
        for (ScalarField& band : r.lambda) {
            band.real_valued = true;
            for (cxd& v : band.values) {
                const double t = v.real();
                if (t <= 0.25)
                    v = cxd(0.0, 0.0);
                else if (t >= 0.75)
                    v = cxd(1.0, 0.0);
                else
                    throw RoundingAmbiguous("diagonalize_projection: eigenvalue " +
                                            std::to_string(t) + " is not within 1/4 of {0,1}");
            }
        }
    } catch (const RoundingAmbiguous& e) {
        r.status = DiagStatus::unresolved;
        r.message = e.what();
        return r;
    }
    r.epsilon_achieved = detail::diag_residual(p, *r.u, r.lambda);
    if (!(r.epsilon_achieved < r.epsilon_requested)) {
        r.status = DiagStatus::unresolved;
        r.message = "rounded residual did not meet the 1/4 bound";
    }
    return r;
}

inline DiagonalizationReport approx_diagonalize_unitary(const MatrixField& v, double eps,
                                                        std::uint64_t seed) {
    require_tag(v, FieldTag::unitary, "approx_diagonalize_unitary");
    if (!(eps > 0.0)) throw Error("approx_diagonalize_unitary: eps must be positive");
    const detail::StageTimer timer;
    DiagonalizationReport r;
    detail::stamp_meta(r, v, eps, seed);

    // detector first: determinant windings along every basis cycle
    const auto basis = cycle_basis(*v.mesh);
    if (!basis.empty()) {
        const ScalarField det = field_det_tr(v).first;
        for (const Cycle& c : basis)
            r.obstruction.winding_numbers.push_back(winding_number(det, c));
        if (r.obstruction.any_nonzero()) {
            r.status = DiagStatus::obstructed;
            r.message = "nonzero determinant winding: the phase class of det(V) generates "
                        "an integer obstruction";
            r.elapsed_seconds = timer.seconds();
            return r;
        }
    }

    // exactly diagonal fields: sort the diagonal per node and stop
    bool diagonal = true;
    for (const CMatrix& s : v.samples)
        for (int i = 0; i < v.n && diagonal; ++i)
            for (int j = 0; j < v.n; ++j)
                if (i != j && s(i, j) != cxd(0.0, 0.0)) {
                    diagonal = false;
                    break;
                }
    if (diagonal) {
        MatrixField u(v.mesh, v.n, FieldTag::unitary);
        r.lambda.assign(v.n, ScalarField(v.mesh, true));
        for (int x = 0; x < v.mesh->node_count(); ++x) {
            std::vector<int> order(v.n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
                return std::arg(v.samples[x](i, i)) > std::arg(v.samples[x](j, j));
            });
            for (int k = 0; k < v.n; ++k) {
                u.samples[x](order[k], k) = 1.0;
                r.lambda[k].values[x] = cxd(std::arg(v.samples[x](order[k], order[k])), 0.0);
            }
        }
        r.log_rotation = 0.0;
        MatrixField d(v.mesh, v.n, FieldTag::unitary);
        for (int x = 0; x < v.mesh->node_count(); ++x)
            for (int k = 0; k < v.n; ++k)
                d.samples[x](k, k) = std::polar(1.0, r.lambda[k].real_at(x));
        r.epsilon_achieved = sup_norm(field_sub(field_conjugate(v, u), d));
        r.breakdown.unitarity_defect = detail::max_unitarity_defect(u);
        r.u = std::move(u);
        r.status = DiagStatus::success;
        r.elapsed_seconds = timer.seconds();
        return r;
    }

    // nodewise unitary spectra, then a rotation that clears the branch cut
    const int nodes = v.mesh->node_count();
    std::vector<UnitaryEig> eigs;
    eigs.reserve(nodes);
    for (int x = 0; x < nodes; ++x) eigs.push_back(unitary_eig(v.samples[x]));

    const double gap_angle = M_PI / (8.0 * v.n);
    const int grid = 720;
    double best_clearance = -1.0;
    int best_g = 0;
    for (int g = 0; g < grid; ++g) {
        const double rot = 2.0 * M_PI * g / grid;
        double clearance = std::numeric_limits<double>::infinity();
        for (const UnitaryEig& ue : eigs)
            for (double ang : ue.angles) {
                double shifted = std::remainder(ang + rot, 2.0 * M_PI);
                clearance = std::min(clearance, M_PI - std::abs(shifted));
            }
        if (clearance > best_clearance) {
            best_clearance = clearance;
            best_g = g;
        }
    }
    if (best_clearance <= gap_angle) {
        std::vector<int> hist(grid, 0);
        for (const UnitaryEig& ue : eigs)
            for (double ang : ue.angles) {
                int bin = static_cast<int>(std::floor((ang + M_PI) / (2.0 * M_PI) * grid));
                hist[std::clamp(bin, 0, grid - 1)] += 1;
            }
        r.status = DiagStatus::unresolved;
        r.angle_histogram = std::move(hist);
        r.message = "no rotation clears the unitary spectrum away from -1 (best clearance " +
                    std::to_string(best_clearance) + ", need > " + std::to_string(gap_angle) +
                    ")";
        r.elapsed_seconds = timer.seconds();
        return r;
    }
    const double rot = 2.0 * M_PI * best_g / grid;

    // principal logarithm of e^{i rot} V, then the Hermitian pipeline at eps/2
    MatrixField h(v.mesh, v.n, FieldTag::hermitian);
    for (int x = 0; x < nodes; ++x) {
        CMatrix a(v.n);
        for (int k = 0; k < v.n; ++k) {
            const double ang = std::remainder(eigs[x].angles[k] + rot, 2.0 * M_PI);
            for (int i = 0; i < v.n; ++i)
                for (int j = 0; j < v.n; ++j)
                    a(i, j) += eigs[x].vectors(i, k) * ang * std::conj(eigs[x].vectors(j, k));
        }
        h.samples[x] = hermitize(a);
    }

    DiagonalizationReport inner = approx_diagonalize_hermitian(h, eps / 2.0, mix_seed(seed, 7));
    r.obstruction.chern_numbers = inner.obstruction.chern_numbers;
    r.obstruction.chern_available = inner.obstruction.chern_available;
    r.obstruction.resolved = inner.obstruction.resolved;
    r.obstruction.min_overlap = inner.obstruction.min_overlap;
    r.obstruction.min_gap = inner.obstruction.min_gap;
    r.breakdown = inner.breakdown;
    if (inner.status != DiagStatus::success) {
        r.status = inner.status;
        r.message = inner.message;
        r.elapsed_seconds = timer.seconds();
        return r;
    }

    r.lambda = inner.lambda;
    r.log_rotation = rot;
    MatrixField d(v.mesh, v.n, FieldTag::unitary);
    for (int x = 0; x < nodes; ++x)
        for (int k = 0; k < v.n; ++k)
            d.samples[x](k, k) = std::polar(1.0, r.lambda[k].real_at(x) - rot);
    r.epsilon_achieved = sup_norm(field_sub(field_conjugate(v, *inner.u), d));
    r.breakdown.unitarity_defect = detail::max_unitarity_defect(*inner.u);
    r.breakdown.u_edge_defect = continuity_modulus(*inner.u);
    r.u = std::move(inner.u);
    r.status = r.epsilon_achieved < eps ? DiagStatus::success : DiagStatus::unresolved;
    if (r.status == DiagStatus::unresolved)
        r.message = "unitary residual did not meet the requested bound";
    r.elapsed_seconds = timer.seconds();
    return r;
}

struct VerifyResult {
    bool ok = true;
    std::string first_violation;
    double recomputed_epsilon = 0.0;
    double unitarity_defect = 0.0;
    double max_weyl_gap = 0.0;
    bool sorted_ok = true;
};

// Independent re-measurement of a success report: unitarity, sortedness, the
// residual recomputed from scratch, and the Weyl transfer from Lambda to the
// true pointwise spectra.
inline VerifyResult verify_report(const MatrixField& a, const DiagonalizationReport& r) {
    VerifyResult v;
    auto fail = [&](const std::string& why) {
        if (v.ok) {
            v.ok = false;
            v.first_violation = why;
        }
    };
    if (r.status != DiagStatus::success) {
        fail("report status is not success");
        return v;
    }
    if (!r.u.has_value()) {
        fail("report carries no unitary");
        return v;
    }

    v.unitarity_defect = detail::max_unitarity_defect(*r.u);
    if (v.unitarity_defect > 1e-9) fail("U is not nodewise unitary within 1e-9");

    if (r.input_tag != FieldTag::unitary) {
        for (int x = 0; x < a.mesh->node_count() && v.sorted_ok; ++x)
            for (size_t j = 0; j + 1 < r.lambda.size(); ++j)
                if (r.lambda[j].real_at(x) < r.lambda[j + 1].real_at(x) - 1e-12) {
                    v.sorted_ok = false;
                    break;
                }
        if (!v.sorted_ok) fail("Lambda fields are not sorted non-increasingly");

        v.recomputed_epsilon = detail::diag_residual(a, *r.u, r.lambda);
        if (std::abs(v.recomputed_epsilon - r.epsilon_achieved) >
            1e-9 * (1.0 + r.epsilon_achieved))
            fail("stored epsilon_achieved disagrees with the recomputed residual");

        MatrixField as_herm = a;
        as_herm.tag = FieldTag::hermitian;
        const auto spectra = pointwise_spectra(as_herm);
        for (size_t j = 0; j < r.lambda.size(); ++j)
            for (int x = 0; x < a.mesh->node_count(); ++x)
                v.max_weyl_gap = std::max(
                    v.max_weyl_gap,
                    std::abs(r.lambda[j].real_at(x) - spectra[j].real_at(x)));
        if (v.max_weyl_gap > v.recomputed_epsilon + 1e-9)
            fail("Lambda strays from the pointwise spectra beyond the residual");
    } else {
        MatrixField d(a.mesh, a.n, FieldTag::unitary);
        for (int x = 0; x < a.mesh->node_count(); ++x)
            for (int k = 0; k < a.n; ++k)
                d.samples[x](k, k) =
                    std::polar(1.0, r.lambda[k].real_at(x) - r.log_rotation);
        v.recomputed_epsilon = sup_norm(field_sub(field_conjugate(a, *r.u), d));
        if (std::abs(v.recomputed_epsilon - r.epsilon_achieved) >
            1e-9 * (1.0 + r.epsilon_achieved))
            fail("stored epsilon_achieved disagrees with the recomputed residual");
        // eigenvalue-angle multisets must match within the requested bound
        for (int x = 0; x < a.mesh->node_count(); ++x) {
            const UnitaryEig ue = unitary_eig(a.samples[x]);
            std::vector<bool> used(a.n, false);
            for (int k = 0; k < a.n; ++k) {
                const double target = std::remainder(r.lambda[k].real_at(x) - r.log_rotation,
                                                     2.0 * M_PI);
                double best = std::numeric_limits<double>::infinity();
                int best_i = -1;
                for (int i = 0; i < a.n; ++i) {
                    if (used[i]) continue;
                    const double dist =
                        std::abs(std::remainder(ue.angles[i] - target, 2.0 * M_PI));
                    if (dist < best) {
                        best = dist;
                        best_i = i;
                    }
                }
                used[best_i] = true;
                v.max_weyl_gap = std::max(v.max_weyl_gap, best);
            }
        }
        if (v.max_weyl_gap > r.epsilon_requested + 1e-6)
            fail("diagonal angles stray from the unitary spectrum beyond epsilon");
    }
    return v;
}

}  // namespace adiag
