#include "field_io.hpp"

#include <cstdio>
#include <fstream>

namespace homlab {

namespace {

void append(std::vector<double>& dst, const std::vector<double>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

}  // namespace

void write_field_file(const std::string& path, const FieldFile& f) {
    const std::size_t expect = f.times.size() * f.components * static_cast<std::size_t>(f.n) * f.n;
    require(f.values.size() == expect, "field payload does not match its header");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    const double header[3] = {static_cast<double>(f.n), static_cast<double>(f.components),
                              static_cast<double>(f.times.size())};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    out.write(reinterpret_cast<const char*>(f.times.data()), static_cast<std::streamsize>(f.times.size() * 8));
    out.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

FieldFile read_field_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    double header[3];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in || header[0] < 1 || header[1] < 1 || header[2] < 0) fail(ErrorKind::Io, "bad field header: " + path);
    FieldFile f;
    f.n = static_cast<int>(header[0]);
    f.components = static_cast<int>(header[1]);
    f.times.resize(static_cast<std::size_t>(header[2]));
    in.read(reinterpret_cast<char*>(f.times.data()), static_cast<std::streamsize>(f.times.size() * 8));
    f.values.resize(f.times.size() * f.components * static_cast<std::size_t>(f.n) * f.n);
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * 8));
    if (!in) fail(ErrorKind::Io, "truncated field file: " + path);
    return f;
}

FieldFile to_file(const ScalarField& f) { return {f.grid.n(), 1, {0.0}, f.v}; }

FieldFile to_file(const VectorField& f) {
    FieldFile out{f.grid.n(), 2, {0.0}, {}};
    for (const auto& c : f.c) append(out.values, c);
    return out;
}

FieldFile to_file(const MatrixField& f) {
    FieldFile out{f.grid.n(), 4, {0.0}, {}};
    for (const auto& c : f.c) append(out.values, c);
    return out;
}

FieldFile to_file(const ScalarHistory& h) {
    require(!h.empty(), "empty history");
    FieldFile out{h.frames[0].grid.n(), 1, h.times, {}};
    for (const auto& fr : h.frames) append(out.values, fr.v);
    return out;
}

FieldFile to_file(const VectorHistory& h) {
    require(!h.empty(), "empty history");
    FieldFile out{h.frames[0].grid.n(), 2, h.times, {}};
    for (const auto& fr : h.frames)
        for (const auto& c : fr.c) append(out.values, c);
    return out;
}

ScalarField scalar_from_file(const FieldFile& f, std::size_t frame) {
    require(f.components == 1 && frame < f.times.size(), "not a scalar frame");
    ScalarField s(make_grid(f.n));
    const std::size_t m = s.v.size();
    std::copy(f.values.begin() + frame * m, f.values.begin() + (frame + 1) * m, s.v.begin());
    return s;
}

VectorField vector_from_file(const FieldFile& f, std::size_t frame) {
    require(f.components == 2 && frame < f.times.size(), "not a vector frame");
    VectorField s(make_grid(f.n));
    const std::size_t m = s.grid.size();
    for (int k = 0; k < 2; ++k) {
        auto first = f.values.begin() + (frame * 2 + k) * m;
        std::copy(first, first + m, s.c[k].begin());
    }
    return s;
}

void write_field_csv(const std::string& path, const FieldFile& f, std::size_t frame) {
    require(f.n <= 256, "CSV output is limited to n <= 256");
    require(frame < f.times.size(), "frame out of range");
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    const std::size_t m = static_cast<std::size_t>(f.n) * f.n;
    std::fprintf(fp, "i,j,x1,x2");
    for (int c = 0; c < f.components; ++c) std::fprintf(fp, ",c%d", c);
    std::fprintf(fp, "\n");
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j) {
            std::fprintf(fp, "%d,%d,%.17g,%.17g", i, j, static_cast<double>(i) / f.n, static_cast<double>(j) / f.n);
            for (int c = 0; c < f.components; ++c)
                std::fprintf(fp, ",%.17g", f.values[(frame * f.components + c) * m + static_cast<std::size_t>(i) * f.n + j]);
            std::fprintf(fp, "\n");
        }
    std::fclose(fp);
}

}  // namespace homlab
