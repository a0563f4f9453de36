#include "insight/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

namespace insight {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'S', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) fail(ErrorKind::format, "checkpoint truncated");
    return v;
}

} // namespace

void save_named_tensors(const std::string& path,
                        const std::vector<std::pair<std::string, Tensor>>& tensors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open checkpoint for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod<uint32_t>(out, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        write_pod<uint32_t>(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod<uint32_t>(out, static_cast<uint32_t>(t.rows()));
        write_pod<uint32_t>(out, static_cast<uint32_t>(t.cols()));
        out.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!out) fail(ErrorKind::io, "checkpoint write failed: " + path);
}

std::vector<std::pair<std::string, Tensor>> load_named_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        fail(ErrorKind::format, "not a checkpoint file: " + path);
    }
    uint32_t count = read_pod<uint32_t>(in);
    std::vector<std::pair<std::string, Tensor>> result;
    result.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t name_len = read_pod<uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        uint32_t rows = read_pod<uint32_t>(in);
        uint32_t cols = read_pod<uint32_t>(in);
        std::vector<double> data(static_cast<size_t>(rows) * cols);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!in) fail(ErrorKind::format, "checkpoint truncated: " + path);
        result.emplace_back(std::move(name),
                            Tensor::from_data(static_cast<int>(rows), static_cast<int>(cols),
                                              std::move(data)));
    }
    return result;
}

void restore_named_tensors(const std::string& path,
                           const std::vector<std::pair<std::string, Tensor>>& dest) {
    auto loaded = load_named_tensors(path);
    std::map<std::string, Tensor> by_name;
    for (auto& [name, t] : loaded) by_name.emplace(name, t);
    for (const auto& [name, t] : dest) {
        auto it = by_name.find(name);
        if (it == by_name.end()) fail(ErrorKind::format, "checkpoint missing tensor: " + name);
        const Tensor& src = it->second;
        if (src.rows() != t.rows() || src.cols() != t.cols()) {
            fail(ErrorKind::dimension, "checkpoint shape mismatch for " + name);
        }
        auto dst = const_cast<Tensor&>(t).mutable_data();
        std::copy(src.data().begin(), src.data().end(), dst.begin());
    }
}

} // namespace insight
