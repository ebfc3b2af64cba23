#pragma once

#include <string>
#include <vector>

#include "field.hpp"

namespace homlab {

/// Decoded contents of a binary field file: n, components per node, time
/// stamps, and frames x components x n x n values in row-major order.
struct FieldFile {
    int n = 0;
    int components = 0;
    std::vector<double> times;
    std::vector<double> values;
};

// Binary layout, all little-endian IEEE doubles:
//   n, components, frame count, times[frame count], payload.
void write_field_file(const std::string& path, const FieldFile& f);
FieldFile read_field_file(const std::string& path);

FieldFile to_file(const ScalarField& f);
FieldFile to_file(const VectorField& f);
FieldFile to_file(const MatrixField& f);
FieldFile to_file(const ScalarHistory& h);
FieldFile to_file(const VectorHistory& h);

ScalarField scalar_from_file(const FieldFile& f, std::size_t frame = 0);
VectorField vector_from_file(const FieldFile& f, std::size_t frame = 0);

/// One row per node: i,j,x1,x2,c0[,c1...]. Refuses grids above 256.
void write_field_csv(const std::string& path, const FieldFile& f, std::size_t frame = 0);

}  // namespace homlab
