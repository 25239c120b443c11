#include "mpmg/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mpmg/error.hpp"

namespace mpmg {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

CsrMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file");
  std::istringstream banner(lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
    throw Error(path + ": expected a Matrix Market coordinate matrix");
  }
  if (field != "real" && field != "integer") throw Error(path + ": unsupported field " + field);
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") {
    throw Error(path + ": unsupported symmetry " + symmetry);
  }
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  std::istringstream header(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(header >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
    throw Error(path + ": bad size line");
  }
  std::vector<Triplet> entries;
  entries.reserve(symmetric ? 2 * nnz : nnz);
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 0;
    if (!(in >> i >> j >> v)) throw Error(path + ": truncated entry list");
    if (i < 1 || i > rows || j < 1 || j > cols) throw Error(path + ": index out of range");
    entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
    if (symmetric && i != j) entries.push_back({static_cast<int>(j - 1), static_cast<int>(i - 1), v});
  }
  return CsrMatrix::from_triplets(static_cast<int>(rows), static_cast<int>(cols),
                                  std::move(entries));
}

void write_matrix_market(const std::string& path, const CsrMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out.precision(17);
  for (int i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out << i + 1 << ' ' << cols[k] + 1 << ' ' << vals[k] << '\n';
    }
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

Vector read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  Vector v;
  double x = 0;
  while (in >> x) v.push_back(x);
  if (!in.eof()) throw Error(path + ": non-numeric token");
  return v;
}

void write_vector(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out.precision(17);
  for (double x : v) out << x << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace mpmg
