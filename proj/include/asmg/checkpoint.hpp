#pragma once

#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "asmg/autodiff.hpp"

namespace asmg {

// Single-file parameter archive: magic, manifest length, JSON manifest
// (tensor names/shapes/offsets plus free-form metadata), then contiguous
// little-endian float64 payload.
namespace checkpoint {

inline constexpr char kMagic[8] = {'A', 'S', 'M', 'G', 'C', 'K', 'P', 'T'};

inline void save(const std::string& path, const std::map<std::string, ad::Mat>& tensors,
                 const nlohmann::json& metadata) {
    nlohmann::json manifest;
    manifest["metadata"] = metadata;
    manifest["tensors"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, mat] : tensors) {
        manifest["tensors"].push_back({{"name", name},
                                       {"rows", mat.rows()},
                                       {"cols", mat.cols()},
                                       {"offset", offset},
                                       {"dtype", "float64-le"}});
        offset += static_cast<std::uint64_t>(mat.size()) * sizeof(double);
    }
    std::string mstr = manifest.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, 8);
    std::uint64_t mlen = mstr.size();
    out.write(reinterpret_cast<const char*>(&mlen), 8);
    out.write(mstr.data(), static_cast<std::streamsize>(mstr.size()));
    for (const auto& [name, mat] : tensors) {
        // row-major serialization, independent of Eigen's storage order
        for (Eigen::Index r = 0; r < mat.rows(); ++r)
            for (Eigen::Index c = 0; c < mat.cols(); ++c) {
                double v = mat(r, c);
                out.write(reinterpret_cast<const char*>(&v), sizeof(double));
            }
    }
}

struct Archive {
    std::map<std::string, ad::Mat> tensors;
    nlohmann::json metadata;
};

inline Archive load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::uint64_t mlen = 0;
    in.read(reinterpret_cast<char*>(&mlen), 8);
    std::string mstr(mlen, '\0');
    in.read(mstr.data(), static_cast<std::streamsize>(mlen));
    nlohmann::json manifest = nlohmann::json::parse(mstr);
    Archive arc;
    arc.metadata = manifest["metadata"];
    for (const auto& entry : manifest["tensors"]) {
        Eigen::Index rows = entry["rows"], cols = entry["cols"];
        ad::Mat mat(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) {
                double v;
                in.read(reinterpret_cast<char*>(&v), sizeof(double));
                mat(r, c) = v;
            }
        if (!in) throw std::runtime_error("truncated checkpoint payload: " + path);
        arc.tensors[entry["name"]] = std::move(mat);
    }
    return arc;
}

}  // namespace checkpoint
}  // namespace asmg
