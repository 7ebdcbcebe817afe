#pragma once

// Discrete line-bundle machinery for one spectral band: unit eigenvector
// frames per node, link phases per edge, plaquette curvature (principal
// argument of the ordered link-phase product), lattice Chern numbers, phase
// windings along basis cycles, and the gauge fixing that aligns frames into a
// discretely continuous section exactly when the integer obstructions vanish.

#include "adiag/field.hpp"
#include "adiag/reduce.hpp"

namespace adiag {

inline constexpr double kOverlapTol = 0.1;
inline constexpr double kChernTol = 1e-6;

// default alignment target: aligned frames of a smooth section differ per
// edge by O(1/N)
inline double smooth_tol(const Mesh& m) { return 4.0 * M_PI / m.resolution; }

struct LineBundleData {
    MeshPtr mesh;
    int band = 0;
    std::vector<CVector> frame;      // unit eigenvector per node
    std::vector<cxd> link_phase;     // per edge tail->head, unit modulus
    std::vector<double> overlap_mag; // |<frame(tail), frame(head)>| per edge
    std::vector<double> curvature;   // per plaquette, principal arg in (-pi, pi]
    double min_overlap = 0.0;
    double max_link_arg = 0.0;
    bool resolved = false;
};

struct ObstructionReport {
    std::vector<int> chern_numbers;    // per band, closed 2-d meshes only
    std::vector<int> winding_numbers;  // per cycle-basis element
    std::vector<bool> resolved;        // per band
    bool chern_available = false;
    // infinities mean "not computed"; serialized as -1
    double min_overlap = std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();

    bool any_nonzero() const {
        for (int c : chern_numbers)
            if (c != 0) return true;
        for (int w : winding_numbers)
            if (w != 0) return true;
        return false;
    }
};

namespace detail {

inline void refresh_link_data(LineBundleData& l) {
    const Mesh& m = *l.mesh;
    l.link_phase.assign(m.edge_count(), cxd(1.0, 0.0));
    l.overlap_mag.assign(m.edge_count(), 0.0);
    l.min_overlap = std::numeric_limits<double>::infinity();
    l.max_link_arg = 0.0;
    for (int e = 0; e < m.edge_count(); ++e) {
        // overlap phase, conjugate-linear in the head frame; this slot choice
        // fixes the sign of every curvature and Chern number downstream
        const cxd u = vec_dot(l.frame[m.edges[e].head], l.frame[m.edges[e].tail]);
        const double mag = std::abs(u);
        l.overlap_mag[e] = mag;
        l.min_overlap = std::min(l.min_overlap, mag);
        l.link_phase[e] = (mag > 0.0) ? u / mag : cxd(1.0, 0.0);
        l.max_link_arg = std::max(l.max_link_arg, std::abs(std::arg(l.link_phase[e])));
    }
    l.resolved = l.min_overlap > kOverlapTol;
    l.curvature.assign(m.plaquette_count(), 0.0);
    for (int p = 0; p < m.plaquette_count(); ++p) {
        cxd hol(1.0, 0.0);
        for (int k = 0; k < 4; ++k) {
            const cxd u = l.link_phase[m.plaquettes[p].edge[k]];
            hol *= (m.plaquettes[p].sign[k] > 0) ? u : std::conj(u);
        }
        l.curvature[p] = std::arg(hol);
    }
}

// deterministic anchor: largest-modulus component of the root frame made
// real positive
inline void anchor_phase(CVector& v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = static_cast<int>(i);
    const double mag = std::abs(v[best]);
    if (mag == 0.0) return;
    const cxd fix = std::conj(v[best] / mag);
    for (cxd& z : v) z *= fix;
}

}  // namespace detail

// One LineBundleData per band of a Hermitian field whose spectrum has an
// everywhere-positive gap. Frame phases are whatever the eigensolver
// produced; trivialize aligns them.
inline std::vector<LineBundleData> eigenframes(const MatrixField& b, double gap_tol = kGapTol) {
    require_tag(b, FieldTag::hermitian, "eigenframes");
    const int nodes = b.mesh->node_count();
    std::vector<LineBundleData> bands(b.n);
    for (int j = 0; j < b.n; ++j) {
        bands[j].mesh = b.mesh;
        bands[j].band = j;
        bands[j].frame.resize(nodes);
    }
    for (int x = 0; x < nodes; ++x) {
        const Spectrum sp = herm_eig(b.samples[x]);
        const double gap = min_gap(sp.values);
        if (!(gap > gap_tol))
            throw GapCollapse("eigenframes: spectral gap " + std::to_string(gap) +
                              " at node " + std::to_string(x) + " not above gap_tol " +
                              std::to_string(gap_tol));
        for (int j = 0; j < b.n; ++j) bands[j].frame[x] = sp.vectors.column(j);
    }
    for (auto& band : bands) detail::refresh_link_data(band);
    return bands;
}

// Lattice first Chern number: plaquette curvature sum over 2 pi, integer
// within kChernTol by construction, gauge invariant exactly.
inline int chern_number(const LineBundleData& l, double chern_tol = kChernTol) {
    if (!l.mesh->closed_2d)
        throw NotClosed("chern_number: mesh " + std::string(to_string(l.mesh->kind)) +
                        " has a boundary");
    if (!l.resolved)
        throw Unresolved("chern_number: minimal frame overlap " +
                         std::to_string(l.min_overlap) +
                         " below overlap_tol; refine the mesh");
    double total = 0.0;
    for (double f : l.curvature) total += f;
    const double c = total / (2.0 * M_PI);
    const long long rounded = std::llround(c);
    if (std::abs(c - static_cast<double>(rounded)) >= chern_tol)
        throw Error("chern_number: curvature sum " + std::to_string(c) +
                    " is not an integer within tolerance");
    return static_cast<int>(rounded);
}

// (1/2pi) sum of principal phase increments of f along a cycle
inline int winding_number(const ScalarField& f, const Cycle& cycle) {
    if (!(invertibility_margin(f) > kInvTol))
        throw NotInvertible("winding_number: field margin below inv_tol");
    const Mesh& m = *f.mesh;
    double total = 0.0;
    for (const CycleStep& s : cycle) {
        const MeshEdge& e = m.edges[s.edge_id];
        const int from = s.sign > 0 ? e.tail : e.head;
        const int to = s.sign > 0 ? e.head : e.tail;
        total += std::arg(f.values[to] / f.values[from]);
    }
    const double w = total / (2.0 * M_PI);
    const long long rounded = std::llround(w);
    if (std::abs(w - static_cast<double>(rounded)) > 1e-9)
        throw Error("winding_number: phase sum " + std::to_string(w) +
                    " is not an integer within 1e-9");
    return static_cast<int>(rounded);
}

namespace detail {

// Gauss-Seidel solve of the discrete Poisson problem minimizing
// sum_e (theta_e + phi_head - phi_tail)^2 with phi fixed to 0 at node 0.
// Returns the node potential.
inline std::vector<double> poisson_gauge_potential(const Mesh& m,
                                                   const std::vector<double>& theta,
                                                   int max_sweeps = 10000,
                                                   double target = 1e-10) {
    const int nodes = m.node_count();
    struct Inc {
        int other;
        int edge;
        double dir;  // +1 when this node is the tail
    };
    std::vector<std::vector<Inc>> inc(nodes);
    for (int e = 0; e < m.edge_count(); ++e) {
        inc[m.edges[e].tail].push_back({m.edges[e].head, e, +1.0});
        inc[m.edges[e].head].push_back({m.edges[e].tail, e, -1.0});
    }
    std::vector<double> phi(nodes, 0.0);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (int x = 1; x < nodes; ++x) {
            double acc = 0.0;
            for (const Inc& i : inc[x])
                acc += phi[i.other] + i.dir * theta[i.edge];
            const double next = acc / static_cast<double>(inc[x].size());
            worst = std::max(worst, std::abs(next - phi[x]));
            phi[x] = next;
        }
        if (worst < target) break;
    }
    return phi;
}

inline void apply_node_phases(LineBundleData& l, const std::vector<double>& phi) {
    for (int x = 0; x < l.mesh->node_count(); ++x) {
        const cxd rot = std::polar(1.0, phi[x]);
        for (cxd& z : l.frame[x]) z *= rot;
    }
    refresh_link_data(l);
}

inline double cycle_arg_sum(const LineBundleData& l, const Cycle& cycle) {
    double total = 0.0;
    for (const CycleStep& s : cycle)
        total += s.sign * std::arg(l.link_phase[s.edge_id]);
    return total;
}

}  // namespace detail

// Aligns the frames into a discretely continuous section: spanning-tree phase
// propagation, curvature spreading by a Poisson solve on 2-d meshes, and
// holonomy distribution along basis cycles. Fails exactly when an integer
// obstruction is nonzero.
inline LineBundleData trivialize(const LineBundleData& lin) {
    if (!lin.resolved)
        throw Unresolved("trivialize: minimal frame overlap " + std::to_string(lin.min_overlap) +
                         " below overlap_tol; refine the mesh");
    if (lin.mesh->closed_2d) {
        const int c = chern_number(lin);
        if (c != 0) throw ObstructionError(lin.band, c);
    }

    LineBundleData l = lin;
    const Mesh& m = *l.mesh;
    const int nodes = m.node_count();
    const SpanningTree tree = spanning_tree(m);

    // tree gauge: root anchored, every tree link phase made real positive
    detail::anchor_phase(l.frame[tree.root]);
    for (int x : tree.bfs_order) {
        if (x == tree.root) continue;
        const int parent = tree.parent_node[x];
        const cxd u = vec_dot(l.frame[parent], l.frame[x]);
        const double mag = std::abs(u);
        if (mag == 0.0) throw Unresolved("trivialize: vanishing overlap on a tree edge");
        const cxd fix = std::conj(u / mag);
        for (cxd& z : l.frame[x]) z *= fix;
    }
    detail::refresh_link_data(l);

    // spread curvature across 2-d meshes
    if (mesh_dim(m.kind) == 2) {
        std::vector<double> theta(m.edge_count());
        for (int e = 0; e < m.edge_count(); ++e) theta[e] = std::arg(l.link_phase[e]);
        detail::apply_node_phases(l, detail::poisson_gauge_potential(m, theta));
    }

    // distribute holonomy along the non-contractible cycles
    const auto basis = cycle_basis(m);
    if (m.kind == MeshKind::circle) {
        // exact spread: walk the cycle and equalize every edge at s/N,
        // wherever the tree gauge left the concentration
        const Cycle& c = basis.front();
        const double target = detail::cycle_arg_sum(l, c) / static_cast<double>(c.size());
        std::vector<double> phi(nodes, 0.0);
        for (size_t k = 0; k + 1 < c.size(); ++k) {
            const MeshEdge& e = m.edges[c[k].edge_id];
            const int from = c[k].sign > 0 ? e.tail : e.head;
            const int to = c[k].sign > 0 ? e.head : e.tail;
            const double step = c[k].sign * std::arg(l.link_phase[c[k].edge_id]);
            phi[to] = phi[from] + target - step;
        }
        detail::apply_node_phases(l, phi);
    } else if (m.kind == MeshKind::torus) {
        // the Poisson pass spread each direction's holonomy uniformly;
        // remove whole turns with a lattice ramp, then clean up
        const int n = m.resolution;
        std::vector<double> phi(nodes, 0.0);
        for (size_t d = 0; d < basis.size(); ++d) {
            const double s = detail::cycle_arg_sum(l, basis[d]);
            const double slope = -2.0 * M_PI * std::llround(s / (2.0 * M_PI)) / n;
            for (int x = 0; x < nodes; ++x) phi[x] += slope * m.nodes[x].lattice[d];
        }
        detail::apply_node_phases(l, phi);
        std::vector<double> theta(m.edge_count());
        for (int e = 0; e < m.edge_count(); ++e) theta[e] = std::arg(l.link_phase[e]);
        detail::apply_node_phases(l, detail::poisson_gauge_potential(m, theta));
    }
    return l;
}

// U2(x) = (xi_1(x), ..., xi_n(x)) from n mutually orthogonal band frames
inline MatrixField assemble_unitary(const std::vector<LineBundleData>& bands) {
    const MeshPtr mesh = bands.front().mesh;
    const int n = static_cast<int>(bands.size());
    const int nodes = mesh->node_count();
    for (int x = 0; x < nodes; ++x)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(vec_dot(bands[i].frame[x], bands[j].frame[x])) > 1e-9)
                    throw NotOrthogonal("assemble_unitary: bands " + std::to_string(i) + " and " +
                                        std::to_string(j) + " not orthogonal at node " +
                                        std::to_string(x));
    MatrixField u(mesh, n, FieldTag::unitary);
    for (int x = 0; x < nodes; ++x)
        for (int j = 0; j < n; ++j) u.samples[x].set_column(j, bands[j].frame[x]);
    return u;
}

}  // namespace adiag
