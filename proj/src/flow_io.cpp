#include "moseg/flow_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace moseg {

namespace {
constexpr float kFloMagic = 202021.25f;
constexpr int kMaxDim = 1 << 20;
}  // namespace

FlowField read_flow(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open flow file " + path.string());

    float magic = 0.0f;
    int32_t w = 0, h = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (!in || magic != kFloMagic)
        throw MalformedFile("bad .flo magic in " + path.string());
    if (w < 1 || h < 1 || w > kMaxDim || h > kMaxDim)
        throw MalformedFile("bad .flo dimensions in " + path.string());

    FlowField flow(w, h);
    const std::streamsize payload = static_cast<std::streamsize>(flow.data.size() * sizeof(float));
    in.read(reinterpret_cast<char*>(flow.data.data()), payload);
    if (in.gcount() != payload)
        throw MalformedFile("truncated .flo payload in " + path.string());

    for (float f : flow.data) {
        if (!std::isfinite(f))
            throw NonFiniteValue("non-finite flow value in " + path.string());
    }
    return flow;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot write flow file " + path.string());

    const float magic = kFloMagic;
    const int32_t w = flow.width, h = flow.height;
    out.write(reinterpret_cast<const char*>(&magic), 4);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(flow.data.data()),
              static_cast<std::streamsize>(flow.data.size() * sizeof(float)));
    if (!out) throw IoFailure("short write to " + path.string());
}

}  // namespace moseg
