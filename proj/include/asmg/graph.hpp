#pragma once

#include "asmg/mesh.hpp"

namespace asmg {

enum class FeatureMode { Spatial, Hybrid };  // d_x = 3 or 6

inline const char* to_string(FeatureMode m) {
    return m == FeatureMode::Spatial ? "spatial" : "hybrid";
}

inline FeatureMode feature_mode_from_string(const std::string& s) {
    if (s == "spatial" || s == "sgcn") return FeatureMode::Spatial;
    if (s == "hybrid" || s == "hgcn") return FeatureMode::Hybrid;
    throw std::invalid_argument("unknown feature mode: " + s);
}

// Graph view of a shape: symmetric binary adjacency plus per-node features
// (positions, optionally concatenated with unit vertex normals).
struct ShapeGraph {
    Mat adjacency;  // N x N, {0,1}, zero diagonal
    Mat features;   // N x d_x, d_x in {3, 6}
    std::vector<std::vector<int>> neighbors;

    int size() const { return static_cast<int>(adjacency.rows()); }
    int feature_dim() const { return static_cast<int>(features.cols()); }
    MatX3 positions() const { return features.leftCols<3>(); }
};

struct VertexNormals {
    MatX3 normals;  // unit rows
};

inline VertexNormals vertex_normals(const SurfaceMesh& mesh) {
    validate_mesh(mesh);
    const int n = mesh.vertex_count();
    MatX3 acc = MatX3::Zero(n, 3);
    for (const auto& tri : mesh.faces) {
        Vec3 a = mesh.vertices.row(tri[0]);
        Vec3 b = mesh.vertices.row(tri[1]);
        Vec3 c = mesh.vertices.row(tri[2]);
        // cross product has magnitude 2*area, so summing it is the
        // area-weighted face-normal accumulation
        Vec3 an = (b - a).cross(c - a);
        for (int v : tri) acc.row(v) += an.transpose();
    }
    VertexNormals out;
    out.normals.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        double len = acc.row(i).norm();
        if (len < 1e-14)
            throw std::runtime_error("vertex " + std::to_string(i) +
                                     " has zero-area incident face set");
        out.normals.row(i) = acc.row(i) / len;
    }
    return out;
}

inline ShapeGraph build_graph(const SurfaceMesh& mesh, FeatureMode mode) {
    validate_mesh(mesh);
    const int n = mesh.vertex_count();
    ShapeGraph g;
    g.adjacency = Mat::Zero(n, n);
    for (const auto& tri : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            int a = tri[c], b = tri[(c + 1) % 3];
            g.adjacency(a, b) = 1.0;
            g.adjacency(b, a) = 1.0;
        }
    }
    g.neighbors.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (g.adjacency(i, j) > 0.0) g.neighbors[i].push_back(j);
        if (g.neighbors[i].empty())
            throw std::invalid_argument("isolated vertex " + std::to_string(i) +
                                        ": every graph node needs a neighbor");
    }
    if (mode == FeatureMode::Spatial) {
        g.features = mesh.vertices;
    } else {
        g.features.resize(n, 6);
        g.features.leftCols<3>() = mesh.vertices;
        g.features.rightCols<3>() = vertex_normals(mesh).normals;
    }
    return g;
}

// Graph with externally supplied positions and precomputed neighbor lists
// (used for the atlas, whose adjacency is fixed).
inline ShapeGraph make_graph(const Mat& adjacency, const Mat& features) {
    ShapeGraph g;
    g.adjacency = adjacency;
    g.features = features;
    const int n = g.size();
    g.neighbors.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (g.adjacency(i, j) > 0.0) g.neighbors[i].push_back(j);
        if (g.neighbors[i].empty())
            throw std::invalid_argument("isolated vertex " + std::to_string(i));
    }
    return g;
}

}  // namespace asmg
