#pragma once

#include <cstring>
#include <fstream>

#include "bdrn/model.hpp"

// Weights file: magic "BDRN", u32 LE version, u32 array count; per array
// u32 name length, UTF-8 name, u32 rank, u32 dims[rank], float32 LE
// row-major payload. Parameters first, then batch-norm running stats.

namespace bdrn::io {

inline constexpr uint32_t kWeightsVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("weights file truncated while reading " + what);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace detail

template <typename S>
void save_weights(Model<S>& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write("BDRN", 4);
    detail::write_u32(os, kWeightsVersion);
    uint32_t count = 0;
    model.for_each_array([&](const std::string&, Tensor<S>&) { ++count; });
    detail::write_u32(os, count);
    model.for_each_array([&](const std::string& name, Tensor<S>& t) {
        detail::write_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_u32(os, static_cast<uint32_t>(t.rank()));
        for (int64_t d : t.shape) detail::write_u32(os, static_cast<uint32_t>(d));
        if constexpr (std::is_same_v<S, float>) {
            os.write(reinterpret_cast<const char*>(t.data()),
                     static_cast<std::streamsize>(t.numel() * sizeof(float)));
        } else {
            std::vector<float> f(t.values.begin(), t.values.end());
            os.write(reinterpret_cast<const char*>(f.data()),
                     static_cast<std::streamsize>(f.size() * sizeof(float)));
        }
    });
    if (!os) throw std::runtime_error("write failed: " + path);
}

template <typename S>
Model<S> load_weights(const NetworkConfig& config, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open weights file: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "BDRN", 4) != 0)
        throw std::runtime_error("bad magic in weights file: " + path);
    const uint32_t version = detail::read_u32(is, "version");
    if (version != kWeightsVersion)
        throw std::runtime_error("unsupported weights version " + std::to_string(version) +
                                 " (expected " + std::to_string(kWeightsVersion) + ")");
    const uint32_t count = detail::read_u32(is, "array count");

    Model<S> model = build_network<S>(config, 0);
    std::vector<std::pair<std::string, Tensor<S>*>> expected;
    model.for_each_array([&](const std::string& name, Tensor<S>& t) {
        expected.emplace_back(name, &t);
    });
    if (count != expected.size())
        throw std::runtime_error("weights file has " + std::to_string(count) +
                                 " arrays, config expects " + std::to_string(expected.size()));

    for (auto& [name, tensor] : expected) {
        const uint32_t nlen = detail::read_u32(is, "name length of " + name);
        std::string fname(nlen, '\0');
        if (!is.read(fname.data(), nlen))
            throw std::runtime_error("weights file truncated while reading name of " + name);
        if (fname != name)
            throw std::runtime_error("weights array order mismatch: expected " + name +
                                     ", found " + fname);
        const uint32_t rank = detail::read_u32(is, name + " rank");
        std::vector<int64_t> dims(rank);
        for (uint32_t r = 0; r < rank; ++r)
            dims[r] = detail::read_u32(is, name + " dims");
        if (dims != tensor->shape) {
            std::string found = "[";
            for (size_t r = 0; r < dims.size(); ++r)
                found += (r ? "," : "") + std::to_string(dims[r]);
            throw std::runtime_error("shape mismatch for " + name + ": expected " +
                                     tensor->shape_str() + ", found " + found + "]");
        }
        std::vector<float> payload(static_cast<size_t>(tensor->numel()));
        if (!is.read(reinterpret_cast<char*>(payload.data()),
                     static_cast<std::streamsize>(payload.size() * sizeof(float))))
            throw std::runtime_error("weights file truncated in payload of " + name);
        for (size_t i = 0; i < payload.size(); ++i)
            tensor->values[i] = static_cast<S>(payload[i]);
    }
    return model;
}

}  // namespace bdrn::io
