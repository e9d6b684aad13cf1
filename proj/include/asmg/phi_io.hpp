#pragma once

#include <fstream>

#include <json.hpp>
#include <zlib.h>

#include "asmg/attention.hpp"

namespace asmg {

// Correspondence-map file: one JSON header line (n_mu, n_k, lambda,
// compressed byte count), then zlib-compressed row-major float32 data.
inline void save_phi(const std::string& path, const CorrespondenceMap& map) {
    const Eigen::Index rows = map.phi.rows(), cols = map.phi.cols();
    std::vector<float> raw(static_cast<std::size_t>(rows * cols));
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            raw[static_cast<std::size_t>(r * cols + c)] = static_cast<float>(map.phi(r, c));
    uLongf bound = compressBound(static_cast<uLong>(raw.size() * sizeof(float)));
    std::vector<Bytef> compressed(bound);
    if (compress(compressed.data(), &bound, reinterpret_cast<const Bytef*>(raw.data()),
                 static_cast<uLong>(raw.size() * sizeof(float))) != Z_OK)
        throw std::runtime_error("phi compression failed");
    nlohmann::json header = {{"n_mu", rows},
                             {"n_k", cols},
                             {"lambda", map.lambda},
                             {"dtype", "float32-le"},
                             {"compressed_bytes", bound}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write phi file: " + path);
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(compressed.data()), static_cast<std::streamsize>(bound));
}

inline CorrespondenceMap load_phi(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open phi file: " + path);
    std::string header_line;
    std::getline(in, header_line);
    nlohmann::json header = nlohmann::json::parse(header_line);
    Eigen::Index rows = header["n_mu"], cols = header["n_k"];
    std::size_t nbytes = header["compressed_bytes"];
    std::vector<Bytef> compressed(nbytes);
    in.read(reinterpret_cast<char*>(compressed.data()), static_cast<std::streamsize>(nbytes));
    if (!in) throw std::runtime_error("truncated phi file: " + path);
    std::vector<float> raw(static_cast<std::size_t>(rows * cols));
    uLongf rawlen = static_cast<uLongf>(raw.size() * sizeof(float));
    if (uncompress(reinterpret_cast<Bytef*>(raw.data()), &rawlen, compressed.data(),
                   static_cast<uLong>(nbytes)) != Z_OK ||
        rawlen != raw.size() * sizeof(float))
        throw std::runtime_error("phi decompression failed: " + path);
    CorrespondenceMap map;
    map.lambda = header["lambda"];
    map.phi.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            map.phi(r, c) = raw[static_cast<std::size_t>(r * cols + c)];
    return map;
}

}  // namespace asmg
