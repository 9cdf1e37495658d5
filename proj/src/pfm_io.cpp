#include "moseg/pfm_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace moseg {

namespace {

// PFM headers are whitespace-separated tokens; comments are not part of the
// format. Reads one token, skipping leading whitespace.
std::string next_token(std::istream& in) {
    std::string tok;
    in >> tok;
    return tok;
}

void byte_swap_floats(std::vector<float>& v) {
    for (float& f : v) {
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        bits = __builtin_bswap32(bits);
        std::memcpy(&f, &bits, 4);
    }
}

}  // namespace

Grid<float> read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open PFM file " + path.string());

    const std::string magic = next_token(in);
    if (magic != "Pf") throw MalformedFile("bad PFM magic in " + path.string());

    int w = 0, h = 0;
    double scale = 0.0;
    if (!(in >> w >> h >> scale) || w < 1 || h < 1 || scale == 0.0)
        throw MalformedFile("bad PFM header in " + path.string());
    in.get();  // single whitespace byte after the scale line

    Grid<float> grid(w, h);
    std::vector<float> row(static_cast<size_t>(w));
    const std::streamsize row_bytes = static_cast<std::streamsize>(w) * 4;
    // Rows are stored bottom-up.
    for (int r = h - 1; r >= 0; --r) {
        in.read(reinterpret_cast<char*>(row.data()), row_bytes);
        if (in.gcount() != row_bytes)
            throw MalformedFile("truncated PFM payload in " + path.string());
        if (scale > 0.0) byte_swap_floats(row);
        std::memcpy(&grid.at(r, 0), row.data(), static_cast<size_t>(row_bytes));
    }
    return grid;
}

void write_pfm(const std::filesystem::path& path, const Grid<float>& grid) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot write PFM file " + path.string());

    out << "Pf\n" << grid.width << " " << grid.height << "\n-1.0\n";
    const std::streamsize row_bytes = static_cast<std::streamsize>(grid.width) * 4;
    for (int r = grid.height - 1; r >= 0; --r)
        out.write(reinterpret_cast<const char*>(&grid.at(r, 0)), row_bytes);
    if (!out) throw IoFailure("short write to " + path.string());
}

}  // namespace moseg
