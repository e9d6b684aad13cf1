#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>

#include "asmg/mesh.hpp"

namespace asmg {

// OBJ (v/f records, 1-based), OFF, and ascii PLY readers/writers.

inline SurfaceMesh read_obj(std::istream& in) {
    SurfaceMesh mesh;
    std::vector<Vec3> verts;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p[0] >> p[1] >> p[2]))
                throw std::runtime_error("malformed OBJ vertex line: " + line);
            verts.push_back(p);
        } else if (tag == "f") {
            std::array<int, 3> tri;
            std::string tok;
            for (int c = 0; c < 3; ++c) {
                if (!(ls >> tok))
                    throw std::runtime_error("malformed OBJ face line: " + line);
                // accept v, v/vt, v/vt/vn, v//vn
                tri[c] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
            }
            mesh.faces.push_back(tri);
        }
    }
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i];
    validate_mesh(mesh);
    return mesh;
}

inline void write_obj(std::ostream& out, const SurfaceMesh& mesh) {
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i)
        out << "v " << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' '
            << mesh.vertices(i, 2) << '\n';
    for (const auto& tri : mesh.faces)
        out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
}

inline SurfaceMesh read_off(std::istream& in) {
    std::string magic;
    in >> magic;
    if (magic != "OFF") throw std::runtime_error("not an OFF file (header '" + magic + "')");
    int nv = 0, nf = 0, ne = 0;
    if (!(in >> nv >> nf >> ne)) throw std::runtime_error("malformed OFF counts");
    SurfaceMesh mesh;
    mesh.vertices.resize(nv, 3);
    for (int i = 0; i < nv; ++i)
        if (!(in >> mesh.vertices(i, 0) >> mesh.vertices(i, 1) >> mesh.vertices(i, 2)))
            throw std::runtime_error("malformed OFF vertex record");
    for (int f = 0; f < nf; ++f) {
        int k;
        if (!(in >> k) || k != 3) throw std::runtime_error("OFF reader supports triangles only");
        std::array<int, 3> tri;
        if (!(in >> tri[0] >> tri[1] >> tri[2])) throw std::runtime_error("malformed OFF face");
        mesh.faces.push_back(tri);
    }
    validate_mesh(mesh);
    return mesh;
}

inline void write_off(std::ostream& out, const SurfaceMesh& mesh) {
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << " 0\n";
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i)
        out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2)
            << '\n';
    for (const auto& tri : mesh.faces)
        out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
}

inline SurfaceMesh read_ply(std::istream& in) {
    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) throw std::runtime_error("not a PLY file");
    int nv = -1, nf = -1;
    bool ascii = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = (fmt == "ascii");
        } else if (tag == "element") {
            std::string what;
            int count;
            ls >> what >> count;
            if (what == "vertex") nv = count;
            if (what == "face") nf = count;
        } else if (tag == "end_header") {
            break;
        }
    }
    if (!ascii) throw std::runtime_error("PLY reader supports ascii format only");
    if (nv < 0 || nf < 0) throw std::runtime_error("PLY header missing element counts");
    SurfaceMesh mesh;
    mesh.vertices.resize(nv, 3);
    for (int i = 0; i < nv; ++i)
        if (!(in >> mesh.vertices(i, 0) >> mesh.vertices(i, 1) >> mesh.vertices(i, 2)))
            throw std::runtime_error("malformed PLY vertex record");
    for (int f = 0; f < nf; ++f) {
        int k;
        if (!(in >> k) || k != 3) throw std::runtime_error("PLY reader supports triangles only");
        std::array<int, 3> tri;
        if (!(in >> tri[0] >> tri[1] >> tri[2])) throw std::runtime_error("malformed PLY face");
        mesh.faces.push_back(tri);
    }
    validate_mesh(mesh);
    return mesh;
}

inline void write_ply(std::ostream& out, const SurfaceMesh& mesh) {
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertex_count() << '\n';
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.face_count() << '\n';
    out << "property list uchar int vertex_indices\nend_header\n";
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i)
        out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2)
            << '\n';
    for (const auto& tri : mesh.faces)
        out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
}

// Dispatch on extension: .obj, .off, .ply
inline SurfaceMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "obj") return read_obj(in);
    if (ext == "off") return read_off(in);
    if (ext == "ply") return read_ply(in);
    throw std::runtime_error("unsupported mesh extension: " + path);
}

inline void save_mesh(const std::string& path, const SurfaceMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mesh file: " + path);
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "obj") return write_obj(out, mesh);
    if (ext == "off") return write_off(out, mesh);
    if (ext == "ply") return write_ply(out, mesh);
    throw std::runtime_error("unsupported mesh extension: " + path);
}

}  // namespace asmg
