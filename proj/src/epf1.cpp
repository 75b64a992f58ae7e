#include "epw/epf1.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "epw/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "EPF1 serialization assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

namespace epw {

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    if (!in) throw io_error("EPF1: short read in " + path);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void write_epf1(const std::string& path, const FrameSequence& seq) {
    seq.validate();
    const auto& g = seq.frames.front();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("EPF1: cannot open for writing: " + path);
    out.write("EPF1", 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.frames.size()));
    put<double>(out, seq.dt_frame);
    put<double>(out, g.x0);
    put<double>(out, g.y0);
    put<double>(out, g.hx);
    put<double>(out, g.hy);
    for (const auto& frame : seq.frames)
        for (double v : frame.values) put<float>(out, static_cast<float>(v));
    if (!out) throw io_error("EPF1: write failed: " + path);
}

FrameSequence read_epf1(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("EPF1: cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "EPF1", 4) != 0) throw io_error("EPF1: bad magic in " + path);

    const auto nx = get<std::uint32_t>(in, path);
    const auto ny = get<std::uint32_t>(in, path);
    const auto nframes = get<std::uint32_t>(in, path);
    const double dt_frame = get<double>(in, path);
    const double x0 = get<double>(in, path);
    const double y0 = get<double>(in, path);
    const double hx = get<double>(in, path);
    const double hy = get<double>(in, path);
    if (nx < 2 || ny < 2 || nframes == 0) throw io_error("EPF1: bad header in " + path);

    FrameSequence seq;
    seq.dt_frame = dt_frame;
    seq.frames.reserve(nframes);
    for (std::uint32_t k = 0; k < nframes; ++k) {
        ScalarField2D f(nx, ny, x0, y0, hx, hy);
        for (auto& v : f.values) v = static_cast<double>(get<float>(in, path));
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

}  // namespace epw
