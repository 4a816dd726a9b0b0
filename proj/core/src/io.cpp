#include "autolabel/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace autolabel {

namespace {

constexpr char kMagic[8] = {'A', 'L', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw FormatError("truncated checkpoint file: " + path);
    }
    return value;
}

}  // namespace

const CheckpointBlock& Checkpoint::block(const std::string& name) const {
    for (const auto& b : blocks) {
        if (b.name == name) {
            return b;
        }
    }
    throw FormatError("checkpoint is missing block '" + name + "'");
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write checkpoint file: " + path);
    }
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, static_cast<std::uint64_t>(checkpoint.meta_json.size()));
    out.write(checkpoint.meta_json.data(), static_cast<std::streamsize>(checkpoint.meta_json.size()));
    write_pod(out, static_cast<std::uint32_t>(checkpoint.blocks.size()));
    for (const auto& block : checkpoint.blocks) {
        write_pod(out, static_cast<std::uint32_t>(block.name.size()));
        out.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
        write_pod(out, static_cast<std::uint32_t>(block.dims.size()));
        for (const auto dim : block.dims) {
            write_pod(out, dim);
        }
        write_pod(out, static_cast<std::uint64_t>(block.values.size()));
        out.write(reinterpret_cast<const char*>(block.values.data()),
                  static_cast<std::streamsize>(block.values.size() * sizeof(double)));
    }
    if (!out) {
        throw InputError("failed while writing checkpoint file: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open checkpoint file: " + path);
    }
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("not a checkpoint file (bad magic): " + path);
    }
    Checkpoint checkpoint;
    const auto meta_size = read_pod<std::uint64_t>(in, path);
    checkpoint.meta_json.resize(meta_size);
    in.read(checkpoint.meta_json.data(), static_cast<std::streamsize>(meta_size));
    const auto block_count = read_pod<std::uint32_t>(in, path);
    checkpoint.blocks.resize(block_count);
    for (auto& block : checkpoint.blocks) {
        const auto name_size = read_pod<std::uint32_t>(in, path);
        block.name.resize(name_size);
        in.read(block.name.data(), static_cast<std::streamsize>(name_size));
        const auto dim_count = read_pod<std::uint32_t>(in, path);
        block.dims.resize(dim_count);
        for (auto& dim : block.dims) {
            dim = read_pod<std::int64_t>(in, path);
        }
        const auto value_count = read_pod<std::uint64_t>(in, path);
        block.values.resize(value_count);
        in.read(reinterpret_cast<char*>(block.values.data()),
                static_cast<std::streamsize>(value_count * sizeof(double)));
        if (!in) {
            throw FormatError("truncated checkpoint file: " + path);
        }
    }
    return checkpoint;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write file: " + path);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw InputError("failed while writing file: " + path);
    }
}

std::string format_g9(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

double round6(double value) {
    if (!std::isfinite(value)) {
        return value;
    }
    return std::round(value * 1e6) / 1e6;
}

}  // namespace autolabel
