#pragma once

// Discretized compact parameter spaces: interval, circle, square, 2-torus,
// 2-sphere. Nodes carry coordinates in a fixed convention (interval [0,1],
// angles in [0,2pi), square [0,1]^2, sphere unit vectors in R^3); edges are
// oriented node pairs; plaquettes are closed 4-cycles of signed edges,
// counter-clockwise in the local chart (outward normal on the sphere).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "adiag/errors.hpp"

namespace adiag {

enum class MeshKind { interval, circle, square, torus, sphere };

inline const char* to_string(MeshKind k) {
    switch (k) {
        case MeshKind::interval: return "interval";
        case MeshKind::circle: return "circle";
        case MeshKind::square: return "square";
        case MeshKind::torus: return "torus";
        case MeshKind::sphere: return "sphere";
    }
    return "?";
}

inline MeshKind mesh_kind_from_string(const std::string& s) {
    if (s == "interval") return MeshKind::interval;
    if (s == "circle") return MeshKind::circle;
    if (s == "square") return MeshKind::square;
    if (s == "torus") return MeshKind::torus;
    if (s == "sphere") return MeshKind::sphere;
    throw ParseError("unknown mesh kind: " + s);
}

// topological dimension of the underlying space
inline int mesh_dim(MeshKind k) {
    return (k == MeshKind::interval || k == MeshKind::circle) ? 1 : 2;
}

struct MeshNode {
    std::array<double, 3> coord{0.0, 0.0, 0.0};
    // integer lattice position where one exists (circle: {k,0}; grid kinds:
    // {i,j}); used for deterministic holonomy spreading
    std::array<int, 2> lattice{0, 0};
};

struct MeshEdge {
    int tail = -1;
    int head = -1;
};

struct MeshPlaquette {
    std::array<int, 4> edge{};  // edge ids, boundary traversal order
    std::array<int, 4> sign{};  // +1 along stored orientation, -1 against
    std::array<int, 4> node{};  // boundary nodes in traversal order
};

struct Mesh {
    MeshKind kind = MeshKind::interval;
    int resolution = 0;
    bool closed_1d = false;
    bool closed_2d = false;
    std::vector<MeshNode> nodes;
    std::vector<MeshEdge> edges;
    std::vector<MeshPlaquette> plaquettes;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
    int plaquette_count() const { return static_cast<int>(plaquettes.size()); }
    int euler_characteristic() const {
        return node_count() - edge_count() + plaquette_count();
    }
};

using MeshPtr = std::shared_ptr<const Mesh>;

namespace detail {

// Registers edges on first use, keyed by the unordered node pair. Returns
// (edge id, sign of traversal a->b relative to the stored orientation).
class EdgePool {
  public:
    explicit EdgePool(std::vector<MeshEdge>& edges) : edges_(edges) {}

    std::pair<int, int> traverse(int a, int b) {
        const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        auto it = index_.find(key);
        if (it == index_.end()) {
            edges_.push_back({a, b});
            it = index_.emplace(key, static_cast<int>(edges_.size()) - 1).first;
            return {it->second, +1};
        }
        const MeshEdge& e = edges_[it->second];
        return {it->second, (e.tail == a && e.head == b) ? +1 : -1};
    }

  private:
    std::vector<MeshEdge>& edges_;
    std::map<std::pair<int, int>, int> index_;
};

inline void add_plaquette(Mesh& m, EdgePool& pool, int a, int b, int c, int d) {
    MeshPlaquette p;
    p.node = {a, b, c, d};
    const std::array<std::pair<int, int>, 4> steps{{{a, b}, {b, c}, {c, d}, {d, a}}};
    for (int k = 0; k < 4; ++k) {
        auto [id, sign] = pool.traverse(steps[k].first, steps[k].second);
        p.edge[k] = id;
        p.sign[k] = sign;
    }
    m.plaquettes.push_back(p);
}

}  // namespace detail

inline Mesh build_mesh(MeshKind kind, int n) {
    const int min_n = (kind == MeshKind::interval || kind == MeshKind::square) ? 2 : 3;
    if (n < min_n)
        throw BadResolution("build_mesh: resolution " + std::to_string(n) + " below minimum " +
                            std::to_string(min_n) + " for " + to_string(kind));

    Mesh m;
    m.kind = kind;
    m.resolution = n;
    detail::EdgePool pool(m.edges);

    switch (kind) {
        case MeshKind::interval: {
            m.nodes.resize(n);
            for (int i = 0; i < n; ++i) {
                m.nodes[i].coord = {static_cast<double>(i) / (n - 1), 0.0, 0.0};
                m.nodes[i].lattice = {i, 0};
            }
            for (int i = 0; i + 1 < n; ++i) pool.traverse(i, i + 1);
            break;
        }
        case MeshKind::circle: {
            m.closed_1d = true;
            m.nodes.resize(n);
            for (int i = 0; i < n; ++i) {
                m.nodes[i].coord = {2.0 * M_PI * i / n, 0.0, 0.0};
                m.nodes[i].lattice = {i, 0};
            }
            for (int i = 0; i < n; ++i) pool.traverse(i, (i + 1) % n);
            break;
        }
        case MeshKind::square: {
            m.nodes.resize(static_cast<size_t>(n) * n);
            auto id = [n](int i, int j) { return i + n * j; };
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    m.nodes[id(i, j)].coord = {static_cast<double>(i) / (n - 1),
                                               static_cast<double>(j) / (n - 1), 0.0};
                    m.nodes[id(i, j)].lattice = {i, j};
                }
            for (int j = 0; j + 1 < n; ++j)
                for (int i = 0; i + 1 < n; ++i)
                    detail::add_plaquette(m, pool, id(i, j), id(i + 1, j), id(i + 1, j + 1),
                                          id(i, j + 1));
            break;
        }
        case MeshKind::torus: {
            m.closed_1d = true;
            m.closed_2d = true;
            m.nodes.resize(static_cast<size_t>(n) * n);
            auto id = [n](int i, int j) { return (i % n) + n * (j % n); };
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    m.nodes[id(i, j)].coord = {2.0 * M_PI * i / n, 2.0 * M_PI * j / n, 0.0};
                    m.nodes[id(i, j)].lattice = {i, j};
                }
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    detail::add_plaquette(m, pool, id(i, j), id(i + 1, j), id(i + 1, j + 1),
                                          id(i, j + 1));
            break;
        }
        case MeshKind::sphere: {
            m.closed_2d = true;
            // Quadrilateralized cube-sphere: 6 faces of an (n x n)-cell grid on
            // the cube surface, shared boundary points deduplicated by their
            // integer cube coordinates, then projected radially. Each face
            // parameterization has du x dv pointing outward.
            std::map<std::array<int, 3>, int> point_ids;
            auto cube_point = [&](std::array<int, 3> key) {
                auto it = point_ids.find(key);
                if (it != point_ids.end()) return it->second;
                MeshNode node;
                const double x = static_cast<double>(key[0]) / n;
                const double y = static_cast<double>(key[1]) / n;
                const double z = static_cast<double>(key[2]) / n;
                const double r = std::sqrt(x * x + y * y + z * z);
                node.coord = {x / r, y / r, z / r};
                m.nodes.push_back(node);
                const int id = static_cast<int>(m.nodes.size()) - 1;
                point_ids.emplace(key, id);
                return id;
            };
            // face(u,v) -> integer cube coordinates in {-n..n}, one entry +-n
            using FaceMap = std::array<int, 3> (*)(int, int, int);
            static const FaceMap faces[6] = {
                [](int u, int v, int n_) { return std::array<int, 3>{+n_, u, v}; },  // +X
                [](int u, int v, int n_) { return std::array<int, 3>{-n_, v, u}; },  // -X
                [](int u, int v, int n_) { return std::array<int, 3>{v, +n_, u}; },  // +Y
                [](int u, int v, int n_) { return std::array<int, 3>{u, -n_, v}; },  // -Y
                [](int u, int v, int n_) { return std::array<int, 3>{u, v, +n_}; },  // +Z
                [](int u, int v, int n_) { return std::array<int, 3>{v, u, -n_}; },  // -Z
            };
            for (const FaceMap face : faces) {
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) {
                        // cell corner integer coordinates 2*i - n in {-n..n}
                        const int u0 = 2 * i - n, u1 = 2 * (i + 1) - n;
                        const int v0 = 2 * j - n, v1 = 2 * (j + 1) - n;
                        const int a = cube_point(face(u0, v0, n));
                        const int b = cube_point(face(u1, v0, n));
                        const int c = cube_point(face(u1, v1, n));
                        const int d = cube_point(face(u0, v1, n));
                        detail::add_plaquette(m, pool, a, b, c, d);
                    }
            }
            break;
        }
    }
    return m;
}

inline MeshPtr build_mesh_shared(MeshKind kind, int n) {
    return std::make_shared<const Mesh>(build_mesh(kind, n));
}

struct SpanningTree {
    int root = 0;
    std::vector<int> edge_ids;     // tree edges, |nodes| - 1 of them
    std::vector<int> parent_node;  // -1 at root
    std::vector<int> parent_edge;  // edge to parent, -1 at root
    std::vector<int> bfs_order;    // root first
    std::vector<bool> in_tree;     // per edge id
};

// Breadth-first tree from node 0, neighbors visited in ascending node order.
inline SpanningTree spanning_tree(const Mesh& m) {
    const int nn = m.node_count();
    std::vector<std::vector<std::pair<int, int>>> adj(nn);  // (neighbor, edge id)
    for (int e = 0; e < m.edge_count(); ++e) {
        adj[m.edges[e].tail].push_back({m.edges[e].head, e});
        adj[m.edges[e].head].push_back({m.edges[e].tail, e});
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());

    SpanningTree t;
    t.parent_node.assign(nn, -1);
    t.parent_edge.assign(nn, -1);
    t.in_tree.assign(m.edge_count(), false);
    std::vector<bool> seen(nn, false);
    std::vector<int> queue{0};
    seen[0] = true;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        const int x = queue[qi];
        t.bfs_order.push_back(x);
        for (auto [y, e] : adj[x]) {
            if (seen[y]) continue;
            seen[y] = true;
            t.parent_node[y] = x;
            t.parent_edge[y] = e;
            t.edge_ids.push_back(e);
            t.in_tree[e] = true;
            queue.push_back(y);
        }
    }
    if (static_cast<int>(queue.size()) != nn)
        throw Error("spanning_tree: mesh is not connected");
    return t;
}

struct CycleStep {
    int edge_id;
    int sign;  // +1 traverses tail->head
};
using Cycle = std::vector<CycleStep>;

// Non-contractible generators of the 1-cycles: none for interval, square,
// sphere; the full loop for the circle; one loop per periodic direction for
// the torus.
inline std::vector<Cycle> cycle_basis(const Mesh& m) {
    std::vector<Cycle> basis;
    const int n = m.resolution;
    auto find_edge = [&m](int a, int b) -> CycleStep {
        for (int e = 0; e < m.edge_count(); ++e) {
            if (m.edges[e].tail == a && m.edges[e].head == b) return {e, +1};
            if (m.edges[e].tail == b && m.edges[e].head == a) return {e, -1};
        }
        throw Error("cycle_basis: edge lookup failed");
    };
    if (m.kind == MeshKind::circle) {
        Cycle c;
        for (int i = 0; i < n; ++i) c.push_back(find_edge(i, (i + 1) % n));
        basis.push_back(std::move(c));
    } else if (m.kind == MeshKind::torus) {
        auto id = [n](int i, int j) { return (i % n) + n * (j % n); };
        Cycle cx, cy;
        for (int i = 0; i < n; ++i) cx.push_back(find_edge(id(i, 0), id(i + 1, 0)));
        for (int j = 0; j < n; ++j) cy.push_back(find_edge(id(0, j), id(0, j + 1)));
        basis.push_back(std::move(cx));
        basis.push_back(std::move(cy));
    }
    return basis;
}

}  // namespace adiag
