#pragma once

#include <map>
#include <random>

#include "asmg/geometry.hpp"
#include "asmg/mesh.hpp"

namespace asmg {

// Unit icosphere by repeated 1->4 subdivision of an icosahedron.
inline SurfaceMesh icosphere(int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
        {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
        {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
        {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 m = (verts[a] + verts[b]).normalized();
            verts.push_back(m);
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
            next.push_back({f[0], a, c});
            next.push_back({f[1], b, a});
            next.push_back({f[2], c, b});
            next.push_back({a, b, c});
        }
        faces = std::move(next);
    }
    SurfaceMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i];
    mesh.faces = std::move(faces);
    return mesh;
}

namespace detail {

// Edge collapse with link-condition check; keeps the mesh closed and
// manifold. Collapses the shortest valid edge into its midpoint.
inline bool collapse_one_edge(SurfaceMesh& mesh) {
    const int n = mesh.vertex_count();
    std::vector<std::vector<int>> nbr(n);
    auto add_nbr = [&](int a, int b) {
        if (std::find(nbr[a].begin(), nbr[a].end(), b) == nbr[a].end()) nbr[a].push_back(b);
    };
    for (const auto& tri : mesh.faces)
        for (int c = 0; c < 3; ++c) {
            add_nbr(tri[c], tri[(c + 1) % 3]);
            add_nbr(tri[(c + 1) % 3], tri[c]);
        }
    // candidate edges sorted by length
    std::vector<std::tuple<double, int, int>> edges;
    for (int a = 0; a < n; ++a)
        for (int b : nbr[a])
            if (a < b)
                edges.emplace_back((mesh.vertices.row(a) - mesh.vertices.row(b)).norm(), a, b);
    std::sort(edges.begin(), edges.end());
    for (auto& [len, a, b] : edges) {
        // link condition: shared neighbors of a and b must be exactly the
        // two opposite vertices of the edge's incident triangles
        std::vector<int> shared;
        for (int x : nbr[a])
            if (std::find(nbr[b].begin(), nbr[b].end(), x) != nbr[b].end()) shared.push_back(x);
        if (shared.size() != 2) continue;
        // collapse b into a, at the midpoint
        Vec3 mid = 0.5 * (mesh.vertices.row(a) + mesh.vertices.row(b)).transpose();
        std::vector<std::array<int, 3>> next_faces;
        next_faces.reserve(mesh.faces.size());
        bool degenerate = false;
        for (auto tri : mesh.faces) {
            for (int& v : tri)
                if (v == b) v = a;
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;  // drop
            next_faces.push_back(tri);
        }
        // reject collapses that produce duplicate faces
        {
            auto canon = [](std::array<int, 3> t) {
                std::sort(t.begin(), t.end());
                return t;
            };
            std::vector<std::array<int, 3>> keys;
            keys.reserve(next_faces.size());
            for (auto& t : next_faces) keys.push_back(canon(t));
            std::sort(keys.begin(), keys.end());
            if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) degenerate = true;
        }
        if (degenerate) continue;
        // compact vertex b out of the mesh
        MatX3 verts(n - 1, 3);
        std::vector<int> remap(n);
        int w = 0;
        for (int v = 0; v < n; ++v) {
            if (v == b) {
                remap[v] = -1;
                continue;
            }
            if (v == a)
                verts.row(w) = mid.transpose();
            else
                verts.row(w) = mesh.vertices.row(v);
            remap[v] = w++;
        }
        for (auto& tri : next_faces)
            for (int& v : tri) v = remap[v];
        mesh.vertices = std::move(verts);
        mesh.faces = std::move(next_faces);
        return true;
    }
    return false;
}

}  // namespace detail

// Reduce to target_vertices by repeated edge collapse; the result stays
// closed.
inline SurfaceMesh decimate_to(SurfaceMesh mesh, int target_vertices) {
    if (target_vertices < 4)
        throw std::invalid_argument("decimate_to: closed triangle mesh needs >= 4 vertices");
    while (mesh.vertex_count() > target_vertices) {
        if (!detail::collapse_one_edge(mesh)) break;  // no valid collapse left
    }
    validate_mesh(mesh);
    return mesh;
}

// Centroid to the origin; optionally scale to unit RMS radius.
inline SurfaceMesh procrustes_center(SurfaceMesh mesh, bool unit_rms = false) {
    Vec3 c = centroid(mesh);
    mesh.vertices.rowwise() -= c.transpose();
    if (unit_rms) {
        double rms = std::sqrt(mesh.vertices.rowwise().squaredNorm().mean());
        if (rms > 0) mesh.vertices /= rms;
    }
    return mesh;
}

enum class Family { Ellipsoid, BumpySphere, Bimodal };

inline Family family_from_string(const std::string& s) {
    if (s == "ellipsoid") return Family::Ellipsoid;
    if (s == "bumpy-sphere") return Family::BumpySphere;
    if (s == "bimodal") return Family::Bimodal;
    throw std::invalid_argument("unknown shape family: " + s);
}

struct PopulationSpec {
    Family family = Family::BumpySphere;
    int count = 10;
    int n_lo = 80, n_hi = 200;
    double amplitude = 0.2;
    std::uint64_t seed = 0;
};

// Smooth radial deformation field used by the bumpy-sphere family.
struct RadialField {
    std::vector<Vec3> dirs;
    std::vector<double> coeffs;

    double eval(const Vec3& u) const {
        double r = 0.0;
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            double d = u.dot(dirs[i]);
            r += coeffs[i] * (i % 2 == 0 ? d * d : d * d * d);
        }
        return r;
    }
};

struct ShapeTruth {
    int label = 0;          // cluster label (bimodal family)
    Vec3 axes{1, 1, 1};     // ellipsoid axes
    RadialField field;      // bumpy-sphere deformation
};

struct CohortShape {
    std::string id;
    SurfaceMesh mesh;
    ShapeTruth truth;
};

struct Cohort {
    std::vector<CohortShape> shapes;
    PopulationSpec spec;
};

inline Cohort generate_population(const PopulationSpec& spec) {
    if (spec.n_lo < 12 || spec.n_hi < spec.n_lo)
        throw std::invalid_argument("generate_population: invalid vertex-count range");
    if (spec.amplitude < 0) throw std::invalid_argument("generate_population: negative amplitude");
    Cohort cohort;
    cohort.spec = spec;
    // base resolution comfortably above n_hi
    int subdiv = 1;
    while (10 * (1 << (2 * subdiv)) + 2 < spec.n_hi) ++subdiv;
    SurfaceMesh base = icosphere(subdiv);
    std::mt19937_64 seeder(spec.seed);
    for (int k = 0; k < spec.count; ++k) {
        std::mt19937_64 rng(seeder());  // per-shape derived sub-seed
        std::uniform_int_distribution<int> count_dist(spec.n_lo, spec.n_hi);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        CohortShape shape;
        shape.id = "shape_" + std::to_string(k);
        SurfaceMesh mesh = base;
        switch (spec.family) {
            case Family::Ellipsoid: {
                for (int a = 0; a < 3; ++a)
                    shape.truth.axes[a] = 1.0 + spec.amplitude * unit(rng);
                mesh.vertices.col(0) *= shape.truth.axes[0];
                mesh.vertices.col(1) *= shape.truth.axes[1];
                mesh.vertices.col(2) *= shape.truth.axes[2];
                break;
            }
            case Family::BumpySphere: {
                RadialField field;
                for (int i = 0; i < 4; ++i) {
                    Vec3 d(gauss(rng), gauss(rng), gauss(rng));
                    field.dirs.push_back(d.normalized());
                    field.coeffs.push_back(unit(rng));
                }
                shape.truth.field = field;
                for (Eigen::Index v = 0; v < mesh.vertices.rows(); ++v) {
                    Vec3 u = mesh.vertices.row(v).transpose();
                    mesh.vertices.row(v) *= 1.0 + spec.amplitude * field.eval(u);
                }
                break;
            }
            case Family::Bimodal: {
                shape.truth.label = k % 2;  // balanced by construction
                double aspect = shape.truth.label == 0 ? 1.6 : 0.6;
                shape.truth.axes = Vec3(1.0, 1.0, aspect);
                mesh.vertices.col(2) *= aspect;
                // mild per-shape jitter so cluster members differ
                RadialField field;
                for (int i = 0; i < 2; ++i) {
                    Vec3 d(gauss(rng), gauss(rng), gauss(rng));
                    field.dirs.push_back(d.normalized());
                    field.coeffs.push_back(unit(rng));
                }
                shape.truth.field = field;
                for (Eigen::Index v = 0; v < mesh.vertices.rows(); ++v) {
                    Vec3 u = mesh.vertices.row(v).transpose().normalized();
                    mesh.vertices.row(v) *= 1.0 + spec.amplitude * field.eval(u);
                }
                break;
            }
        }
        int target = count_dist(rng);
        mesh = decimate_to(std::move(mesh), target);
        mesh = procrustes_center(std::move(mesh));
        shape.mesh = std::move(mesh);
        cohort.shapes.push_back(std::move(shape));
    }
    return cohort;
}

}  // namespace asmg
