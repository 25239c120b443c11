#pragma once

#include <string>

#include "mpmg/sparse.hpp"

namespace mpmg {

/// Matrix Market "coordinate real general|symmetric". Symmetric files are
/// expanded to both triangles.
CsrMatrix read_matrix_market(const std::string& path);
/// Writes "coordinate real general" with 1-based indices, full precision.
void write_matrix_market(const std::string& path, const CsrMatrix& a);

/// Whitespace-separated values.
Vector read_vector(const std::string& path);
/// One value per line, full precision.
void write_vector(const std::string& path, const Vector& v);

}  // namespace mpmg
