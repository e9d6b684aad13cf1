#pragma once

#include <random>

#include "asmg/mesh.hpp"

namespace asmg::test {

inline SurfaceMesh single_triangle() {
    SurfaceMesh m;
    m.vertices.resize(3, 3);
    m.vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    m.faces = {{0, 1, 2}};
    return m;
}

// two triangles spanning the unit square in the z=0 plane
inline SurfaceMesh flat_square() {
    SurfaceMesh m;
    m.vertices.resize(4, 3);
    m.vertices << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
    m.faces = {{0, 1, 2}, {0, 2, 3}};
    return m;
}

inline SurfaceMesh regular_tetrahedron() {
    SurfaceMesh m;
    m.vertices.resize(4, 3);
    m.vertices << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
    // outward-oriented
    m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    return m;
}

// axis-aligned unit cube, 12 triangles, outward orientation
inline SurfaceMesh unit_cube() {
    SurfaceMesh m;
    m.vertices.resize(8, 3);
    m.vertices << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1;
    m.faces = {{0, 2, 1}, {0, 3, 2},   // bottom (z=0), normal -z
               {4, 5, 6}, {4, 6, 7},   // top
               {0, 1, 5}, {0, 5, 4},   // y=0
               {2, 3, 7}, {2, 7, 6},   // y=1
               {1, 2, 6}, {1, 6, 5},   // x=1
               {3, 0, 4}, {3, 4, 7}};  // x=0
    return m;
}

inline MatX3 random_points(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    MatX3 pts(n, 3);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts(i) = dist(rng);
    return pts;
}

}  // namespace asmg::test
