#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sglab/world.hpp"

namespace sglab {

static_assert(std::endian::native == std::endian::little,
              "dataset io assumes a little-endian host");

namespace {
constexpr char kMagic[5] = {'S', 'G', 'D', 'S', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}
void write_f32(std::ostream& os, float v) { os.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw std::runtime_error("dataset: truncated file");
    return v;
}
float read_f32(std::istream& is) {
    float v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw std::runtime_error("dataset: truncated file");
    return v;
}
}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("dataset: cannot open '" + path + "' for writing");
    os.write(kMagic, 5);
    write_u32(os, static_cast<std::uint32_t>(ds.trajs.size()));
    write_u32(os, kImageSize);
    write_u32(os, kImageSize);
    write_u32(os, 3);
    for (const auto& t : ds.trajs) {
        write_u32(os, static_cast<std::uint32_t>(t.instr.token()));
        write_u32(os, static_cast<std::uint32_t>(t.frames.size()));
        const std::uint8_t ok = t.success ? 1 : 0;
        os.write(reinterpret_cast<const char*>(&ok), 1);
        for (const auto& f : t.frames)
            os.write(reinterpret_cast<const char*>(f.px.data()),
                     static_cast<std::streamsize>(f.px.size()));
        for (const auto& a : t.actions) {
            write_f32(os, a.dx);
            write_f32(os, a.dy);
            write_f32(os, static_cast<float>(static_cast<int>(a.grip)));
        }
    }
    if (!os) throw std::runtime_error("dataset: write failed for '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("dataset: cannot open '" + path + "'");
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, kMagic, 5) != 0)
        throw std::runtime_error("dataset: bad magic in '" + path + "'");
    const std::uint32_t n = read_u32(is);
    const std::uint32_t H = read_u32(is);
    const std::uint32_t W = read_u32(is);
    const std::uint32_t C = read_u32(is);
    if (H != kImageSize || W != kImageSize || C != 3)
        throw std::runtime_error("dataset: unexpected image shape in '" + path + "'");

    Dataset ds;
    ds.trajs.resize(n);
    for (auto& t : ds.trajs) {
        t.instr = Instruction::from_token(static_cast<int>(read_u32(is)));
        const std::uint32_t nf = read_u32(is);
        std::uint8_t ok = 0;
        is.read(reinterpret_cast<char*>(&ok), 1);
        if (!is) throw std::runtime_error("dataset: truncated file");
        t.success = ok != 0;
        t.frames.resize(nf);
        for (auto& f : t.frames) {
            f = Image8(static_cast<int>(H), static_cast<int>(W));
            is.read(reinterpret_cast<char*>(f.px.data()),
                    static_cast<std::streamsize>(f.px.size()));
            if (!is) throw std::runtime_error("dataset: truncated frame payload");
        }
        t.actions.resize(nf > 0 ? nf - 1 : 0);
        for (auto& a : t.actions) {
            a.dx = read_f32(is);
            a.dy = read_f32(is);
            a.grip = static_cast<Grip>(static_cast<int>(read_f32(is)));
        }
    }
    return ds;
}

}  // namespace sglab
