#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace eigshape {

struct Edge {
    std::array<int, 2> nodes;
    Point2 midpoint;
    bool boundary = false;
};

/// Uniform refinement of a triangle: the affine image of the standard
/// N-subdivision of the reference triangle.
///
/// Nodes are indexed by barycentric grid coordinates (i, j), i + j <= N,
/// ordered row by row (j outer, i inner). Elements are counterclockwise.
/// element_edges[e][k] is the edge opposite local vertex k.
class Mesh {
public:
    Mesh(const Triangle& tri, int n) : tri_(tri), n_(n)
    {
        if (n < 1) {
            throw InvalidArgument("uniform_mesh: subdivision must be at least 1");
        }
        if (!(tri.signed_area() > 0)) {
            throw DegenerateShape("uniform_mesh: triangle must have positive orientation");
        }
        build();
    }

    const Triangle& triangle() const { return tri_; }
    int subdivision() const { return n_; }
    double h() const { return tri_.longest_edge() / n_; }

    const std::vector<Point2>& nodes() const { return nodes_; }
    const std::vector<std::array<int, 3>>& elements() const { return elements_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::array<int, 3>>& element_edges() const { return element_edges_; }
    const std::vector<bool>& boundary_nodes() const { return boundary_node_; }

    int node_index(int i, int j) const { return j * (n_ + 1) - j * (j - 1) / 2 + i; }

    double element_area(int e) const
    {
        const auto& el = elements_[static_cast<std::size_t>(e)];
        const Point2& a = nodes_[static_cast<std::size_t>(el[0])];
        const Point2& b = nodes_[static_cast<std::size_t>(el[1])];
        const Point2& c = nodes_[static_cast<std::size_t>(el[2])];
        return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    }

    /// Node permutation induced by x -> 1 - x when the triangle is symmetric
    /// about x = 1/2 (B.x = 1/2); empty otherwise.
    std::optional<std::vector<int>> node_reflection(double tol = 1e-12) const
    {
        if (std::abs(tri_.B.x - 0.5) > tol || tri_.O.x != 0.0 || tri_.O.y != 0.0 || tri_.A.x != 1.0 ||
            tri_.A.y != 0.0) {
            return std::nullopt;
        }
        std::vector<int> map(nodes_.size());
        for (int j = 0; j <= n_; ++j) {
            for (int i = 0; i + j <= n_; ++i) {
                map[static_cast<std::size_t>(node_index(i, j))] = node_index(n_ - i - j, j);
            }
        }
        return map;
    }

    std::optional<std::vector<int>> edge_reflection(double tol = 1e-12) const
    {
        const auto nmap = node_reflection(tol);
        if (!nmap) {
            return std::nullopt;
        }
        std::vector<int> map(edges_.size());
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const int a = (*nmap)[static_cast<std::size_t>(edges_[k].nodes[0])];
            const int b = (*nmap)[static_cast<std::size_t>(edges_[k].nodes[1])];
            map[k] = edge_lookup_.at(key(a, b));
        }
        return map;
    }

private:
    static std::uint64_t key(int a, int b)
    {
        if (a > b) {
            std::swap(a, b);
        }
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }

    void build()
    {
        const double inv = 1.0 / n_;
        const Point2 ea{tri_.A.x - tri_.O.x, tri_.A.y - tri_.O.y};
        const Point2 eb{tri_.B.x - tri_.O.x, tri_.B.y - tri_.O.y};
        nodes_.reserve(static_cast<std::size_t>((n_ + 1) * (n_ + 2) / 2));
        boundary_node_.reserve(nodes_.capacity());
        for (int j = 0; j <= n_; ++j) {
            for (int i = 0; i + j <= n_; ++i) {
                const double s = i * inv;
                const double t = j * inv;
                nodes_.push_back({tri_.O.x + s * ea.x + t * eb.x, tri_.O.y + s * ea.y + t * eb.y});
                boundary_node_.push_back(i == 0 || j == 0 || i + j == n_);
            }
        }

        elements_.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j) {
            for (int i = 0; i + j < n_; ++i) {
                elements_.push_back({node_index(i, j), node_index(i + 1, j), node_index(i, j + 1)});
                if (i + j + 1 < n_) {
                    elements_.push_back({node_index(i + 1, j), node_index(i + 1, j + 1), node_index(i, j + 1)});
                }
            }
        }

        std::vector<int> share;
        edge_lookup_.reserve(elements_.size() * 2);
        element_edges_.resize(elements_.size());
        for (std::size_t e = 0; e < elements_.size(); ++e) {
            const auto& el = elements_[e];
            for (int k = 0; k < 3; ++k) {
                const int a = el[static_cast<std::size_t>((k + 1) % 3)];
                const int b = el[static_cast<std::size_t>((k + 2) % 3)];
                const auto [it, inserted] = edge_lookup_.try_emplace(key(a, b), static_cast<int>(edges_.size()));
                if (inserted) {
                    const Point2& pa = nodes_[static_cast<std::size_t>(a)];
                    const Point2& pb = nodes_[static_cast<std::size_t>(b)];
                    edges_.push_back({{std::min(a, b), std::max(a, b)}, {0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)}, false});
                    share.push_back(0);
                }
                ++share[static_cast<std::size_t>(it->second)];
                element_edges_[e][static_cast<std::size_t>(k)] = it->second;
            }
        }
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            edges_[k].boundary = share[k] == 1;
        }
    }

    Triangle tri_;
    int n_;
    std::vector<Point2> nodes_;
    std::vector<bool> boundary_node_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> element_edges_;
    std::unordered_map<std::uint64_t, int> edge_lookup_;
};

inline Mesh uniform_mesh(const Triangle& tri, int n) { return Mesh(tri, n); }

struct DofCounts {
    long cg_interior = 0;
    long cr_interior = 0;
    long total_edges = 0;
};

inline DofCounts dof_counts(const Mesh& mesh)
{
    DofCounts c;
    for (bool b : mesh.boundary_nodes()) {
        c.cg_interior += b ? 0 : 1;
    }
    for (const Edge& e : mesh.edges()) {
        c.cr_interior += e.boundary ? 0 : 1;
    }
    c.total_edges = static_cast<long>(mesh.edges().size());
    return c;
}

} // namespace eigshape
