#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace asmg {

using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Triangle surface mesh: vertex positions in mm plus a face list of
// vertex-index triples.
struct SurfaceMesh {
    MatX3 vertices;                          // N x 3
    std::vector<std::array<int, 3>> faces;   // triangle vertex indices

    int vertex_count() const { return static_cast<int>(vertices.rows()); }
    int face_count() const { return static_cast<int>(faces.size()); }
};

inline void validate_mesh(const SurfaceMesh& mesh) {
    const int n = mesh.vertex_count();
    if (n < 3)
        throw std::invalid_argument("mesh must have at least 3 vertices, got " +
                                    std::to_string(n));
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& tri = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            if (tri[c] < 0 || tri[c] >= n)
                throw std::invalid_argument("face " + std::to_string(f) +
                                            " references vertex " + std::to_string(tri[c]) +
                                            " outside [0," + std::to_string(n) + ")");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw std::invalid_argument("degenerate face " + std::to_string(f) +
                                        " (repeated vertex index)");
    }
    if (!mesh.vertices.allFinite())
        throw std::invalid_argument("mesh has non-finite vertex coordinates");
}

// Undirected edge -> number of incident faces. Used for closedness and
// shared-edge queries.
inline std::vector<std::pair<std::pair<int, int>, int>> edge_face_counts(const SurfaceMesh& mesh) {
    std::vector<std::pair<std::pair<int, int>, int>> out;
    std::vector<std::pair<int, int>> edges;
    edges.reserve(mesh.faces.size() * 3);
    for (const auto& tri : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            int a = tri[c], b = tri[(c + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.emplace_back(a, b);
        }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        out.push_back({edges[i], static_cast<int>(j - i)});
        i = j;
    }
    return out;
}

inline bool is_closed(const SurfaceMesh& mesh) {
    for (const auto& [edge, count] : edge_face_counts(mesh))
        if (count != 2) return false;
    return true;
}

inline Vec3 centroid(const SurfaceMesh& mesh) {
    return mesh.vertices.colwise().mean().transpose();
}

}  // namespace asmg
