#include "tubal/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "T3R1 reader/writer assumes a little-endian host");

namespace tubal {

namespace {
constexpr char kMagic[4] = {'T', '3', 'R', '1'};
constexpr std::uint64_t kMaxElems = 1ull << 33;  // 64 GiB of doubles; sanity cap
}  // namespace

void write_tensor(const std::string& path, const Tensor3& t) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(kMagic, 4);
    const std::uint32_t dims[3] = {static_cast<std::uint32_t>(t.n1()),
                                   static_cast<std::uint32_t>(t.n2()),
                                   static_cast<std::uint32_t>(t.n3())};
    f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!f) throw IoError("short write: " + path);
}

Tensor3 read_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    char magic[4];
    f.read(magic, 4);
    if (f.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
        throw BadMagic("not a T3R1 file: " + path);
    }
    std::uint32_t dims[3];
    f.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (f.gcount() != sizeof(dims)) throw TruncatedFile("header cut short: " + path);
    const std::uint64_t count =
        static_cast<std::uint64_t>(dims[0]) * dims[1] * dims[2];
    if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0 || count > kMaxElems) {
        throw ShapeOverflow("unreasonable dims in header of " + path);
    }
    std::vector<double> data(count);
    f.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::uint64_t>(f.gcount()) != count * sizeof(double)) {
        throw TruncatedFile("payload cut short: " + path);
    }
    return Tensor3::from_data(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                              static_cast<int>(dims[2]), std::move(data));
}

}  // namespace tubal
