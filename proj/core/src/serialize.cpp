#include "ssn4/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace ssn4 {

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'S', 'N', '4', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw DataError("truncated checkpoint: " + path);
    return v;
}

}  // namespace

const Tensor* TensorArchive::find(const std::string& name) const {
    for (const NamedTensor& e : entries)
        if (e.name == name) return &e.tensor;
    return nullptr;
}

void save_tensor_archive(const std::string& path, const TensorArchive& archive) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(archive.header.size()));
    out.write(archive.header.data(), static_cast<std::streamsize>(archive.header.size()));
    write_u32(out, static_cast<std::uint32_t>(archive.entries.size()));
    for (const NamedTensor& e : archive.entries) {
        write_u32(out, static_cast<std::uint32_t>(e.name.size()));
        out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        write_u32(out, static_cast<std::uint32_t>(e.tensor.rank()));
        for (int d : e.tensor.shape()) write_u32(out, static_cast<std::uint32_t>(d));
        out.write(reinterpret_cast<const char*>(e.tensor.data()),
                  static_cast<std::streamsize>(e.tensor.size() * sizeof(double)));
    }
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

TensorArchive load_tensor_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a checkpoint file: " + path);
    std::uint32_t version = read_u32(in, path);
    if (version != kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version) +
                        ": " + path);

    TensorArchive archive;
    std::uint32_t header_len = read_u32(in, path);
    archive.header.resize(header_len);
    in.read(archive.header.data(), header_len);
    if (!in) throw DataError("truncated checkpoint: " + path);

    std::uint32_t count = read_u32(in, path);
    archive.entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor e;
        std::uint32_t name_len = read_u32(in, path);
        e.name.resize(name_len);
        in.read(e.name.data(), name_len);
        std::uint32_t rank = read_u32(in, path);
        if (rank == 0 || rank > 8) throw DataError("bad tensor rank in checkpoint: " + path);
        std::vector<int> shape(rank);
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            shape[d] = static_cast<int>(read_u32(in, path));
            if (shape[d] <= 0) throw DataError("bad tensor shape in checkpoint: " + path);
            numel *= static_cast<std::size_t>(shape[d]);
        }
        std::vector<double> values(numel);
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(numel * sizeof(double)));
        if (!in) throw DataError("truncated checkpoint: " + path);
        e.tensor = Tensor(std::move(shape), std::move(values));
        archive.entries.push_back(std::move(e));
    }
    return archive;
}

}  // namespace ssn4
