#include "sglab/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sglab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace {
constexpr char kMagic[5] = {'S', 'G', 'N', 'N', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const std::vector<nn::ParamRef>& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 5);
    write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        write_u32(os, static_cast<std::uint32_t>(p.tag.size()));
        os.write(p.tag.data(), static_cast<std::streamsize>(p.tag.size()));
        write_u32(os, static_cast<std::uint32_t>(p.value->shape.size()));
        for (int d : p.value->shape) write_u32(os, static_cast<std::uint32_t>(d));
        os.write(reinterpret_cast<const char*>(p.value->ptr()),
                 static_cast<std::streamsize>(p.value->numel() * sizeof(float)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

void load_checkpoint(const std::string& path, std::vector<nn::ParamRef>& params) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, kMagic, 5) != 0)
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
    const std::uint32_t count = read_u32(is);
    if (count != params.size())
        throw std::runtime_error("checkpoint: '" + path + "' has " + std::to_string(count) +
                                 " records, expected " + std::to_string(params.size()));
    for (auto& p : params) {
        const std::uint32_t taglen = read_u32(is);
        std::string tag(taglen, '\0');
        is.read(tag.data(), taglen);
        if (!is) throw std::runtime_error("checkpoint: truncated file");
        if (tag != p.tag)
            throw std::runtime_error("checkpoint: record tag '" + tag + "' does not match '" +
                                     p.tag + "'");
        const std::uint32_t ndim = read_u32(is);
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(read_u32(is));
        if (shape != p.value->shape)
            throw std::runtime_error("checkpoint: shape mismatch for '" + tag + "': file has " +
                                     Tensor::shape_str(shape) + ", expected " +
                                     p.value->shape_str());
        is.read(reinterpret_cast<char*>(p.value->ptr()),
                static_cast<std::streamsize>(p.value->numel() * sizeof(float)));
        if (!is) throw std::runtime_error("checkpoint: truncated payload for '" + tag + "'");
    }
}

}  // namespace sglab
