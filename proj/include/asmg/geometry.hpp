#pragma once

#include "asmg/graph.hpp"
#include "asmg/mesh.hpp"

namespace asmg {

// Squared bidirectional nearest-neighbor distance between two vertex sets (mm^2).
inline double chamfer_distance(const Eigen::Ref<const MatX3>& a,
                               const Eigen::Ref<const MatX3>& b) {
    if (a.rows() == 0 || b.rows() == 0)
        throw std::invalid_argument("chamfer_distance: empty point set");
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        total += (b.rowwise() - a.row(i)).rowwise().squaredNorm().minCoeff();
    for (Eigen::Index j = 0; j < b.rows(); ++j)
        total += (a.rowwise() - b.row(j)).rowwise().squaredNorm().minCoeff();
    return total;
}

// Symmetric Hausdorff distance (mm).
inline double hausdorff_distance(const Eigen::Ref<const MatX3>& a,
                                 const Eigen::Ref<const MatX3>& b) {
    if (a.rows() == 0 || b.rows() == 0)
        throw std::invalid_argument("hausdorff_distance: empty point set");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        worst = std::max(worst, (b.rowwise() - a.row(i)).rowwise().squaredNorm().minCoeff());
    for (Eigen::Index j = 0; j < b.rows(); ++j)
        worst = std::max(worst, (a.rowwise() - b.row(j)).rowwise().squaredNorm().minCoeff());
    return std::sqrt(worst);
}

// Mean over vertices of || x_j - mean of neighbor positions ||^2.
inline double laplacian_loss(const ShapeGraph& g) {
    const int n = g.size();
    MatX3 pos = g.positions();
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        if (g.neighbors[j].empty())
            throw std::invalid_argument("laplacian_loss: isolated vertex " + std::to_string(j));
        Vec3 mean = Vec3::Zero();
        for (int q : g.neighbors[j]) mean += pos.row(q).transpose();
        mean /= static_cast<double>(g.neighbors[j].size());
        total += (pos.row(j).transpose() - mean).squaredNorm();
    }
    return total / n;
}

// Mean of (1 - cos theta) over face pairs sharing an edge.
inline double normal_consistency(const SurfaceMesh& mesh) {
    validate_mesh(mesh);
    if (mesh.face_count() < 2)
        throw std::invalid_argument("normal_consistency needs at least 2 faces");
    auto face_normal = [&](int f) -> Vec3 {
        const auto& tri = mesh.faces[f];
        Vec3 a = mesh.vertices.row(tri[0]);
        Vec3 b = mesh.vertices.row(tri[1]);
        Vec3 c = mesh.vertices.row(tri[2]);
        return (b - a).cross(c - a).normalized();
    };
    // edge -> incident faces
    std::vector<std::tuple<int, int, int>> edge_faces;  // (lo, hi, face)
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& tri = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            int a = tri[c], b = tri[(c + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_faces.emplace_back(a, b, f);
        }
    }
    std::sort(edge_faces.begin(), edge_faces.end());
    double total = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i + 1 < edge_faces.size(); ++i) {
        auto [a0, b0, f0] = edge_faces[i];
        auto [a1, b1, f1] = edge_faces[i + 1];
        if (a0 == a1 && b0 == b1) {
            total += 1.0 - face_normal(f0).dot(face_normal(f1));
            ++pairs;
        }
    }
    if (pairs == 0)
        throw std::invalid_argument("normal_consistency: mesh has no shared edges");
    return total / pairs;
}

// |sum of signed tetrahedron volumes with the origin| (mm^3).
inline double mesh_volume(const SurfaceMesh& mesh) {
    validate_mesh(mesh);
    if (!is_closed(mesh))
        throw std::invalid_argument("mesh_volume requires a closed mesh (boundary edge found)");
    // translation invariance: work relative to the centroid
    Vec3 c0 = centroid(mesh);
    double vol = 0.0;
    for (const auto& tri : mesh.faces) {
        Vec3 a = mesh.vertices.row(tri[0]).transpose() - c0;
        Vec3 b = mesh.vertices.row(tri[1]).transpose() - c0;
        Vec3 c = mesh.vertices.row(tri[2]).transpose() - c0;
        vol += a.dot(b.cross(c)) / 6.0;
    }
    return std::abs(vol);
}

// Signed variant, exposed for orientation tests.
inline double mesh_volume_signed(const SurfaceMesh& mesh) {
    Vec3 c0 = centroid(mesh);
    double vol = 0.0;
    for (const auto& tri : mesh.faces) {
        Vec3 a = mesh.vertices.row(tri[0]).transpose() - c0;
        Vec3 b = mesh.vertices.row(tri[1]).transpose() - c0;
        Vec3 c = mesh.vertices.row(tri[2]).transpose() - c0;
        vol += a.dot(b.cross(c)) / 6.0;
    }
    return vol;
}

}  // namespace asmg
