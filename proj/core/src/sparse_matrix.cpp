#include "slin/sparse_matrix.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "slin/errors.hpp"

namespace slin {

SparseDesignMatrix::SparseDesignMatrix(Storage storage) : storage_(std::move(storage)) {
  storage_.makeCompressed();
}

SparseDesignMatrix SparseDesignMatrix::from_dense(const Eigen::MatrixXd& dense) {
  Storage s = dense.sparseView(0.0, 0.0);
  return SparseDesignMatrix(std::move(s));
}

SparseDesignMatrix SparseDesignMatrix::from_triplets(
    Eigen::Index rows, Eigen::Index cols, const std::vector<Eigen::Triplet<double>>& triplets) {
  Storage s(rows, cols);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return SparseDesignMatrix(std::move(s));
}

Vector SparseDesignMatrix::multiply(const Vector& x) const {
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(cols()),
                    "SparseDesignMatrix::multiply");
  return storage_ * x;
}

Vector SparseDesignMatrix::multiply_transpose(const Vector& y) const {
  require_same_size(static_cast<std::size_t>(y.size()), static_cast<std::size_t>(rows()),
                    "SparseDesignMatrix::multiply_transpose");
  return storage_.transpose() * y;
}

Vector SparseDesignMatrix::column_sq_norms() const {
  Vector out = Vector::Zero(cols());
  for (Eigen::Index j = 0; j < storage_.outerSize(); ++j) {
    for (Storage::InnerIterator it(storage_, j); it; ++it) out[j] += it.value() * it.value();
  }
  return out;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

SparseDesignMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("MatrixMarket: empty input");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
    throw std::runtime_error("MatrixMarket: expected '%%MatrixMarket matrix coordinate' banner");
  }
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double") {
    throw std::runtime_error("MatrixMarket: unsupported field '" + field + "'");
  }
  if (symmetry != "general") {
    throw std::runtime_error("MatrixMarket: unsupported symmetry '" + symmetry + "'");
  }

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  long long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      throw std::runtime_error("MatrixMarket: malformed size line");
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long long e = 0; e < nnz; ++e) {
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw std::runtime_error("MatrixMarket: truncated entry list");
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw std::runtime_error("MatrixMarket: entry index out of range");
    }
    triplets.emplace_back(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1), v);
  }
  return SparseDesignMatrix::from_triplets(rows, cols, triplets);
}

SparseDesignMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("MatrixMarket: cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseDesignMatrix& matrix) {
  const auto& s = matrix.storage();
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << s.rows() << ' ' << s.cols() << ' ' << s.nonZeros() << '\n';
  char buf[64];
  for (Eigen::Index j = 0; j < s.outerSize(); ++j) {
    for (SparseDesignMatrix::Storage::InnerIterator it(s, j); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << (it.row() + 1) << ' ' << (j + 1) << ' ' << buf << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseDesignMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("MatrixMarket: cannot write " + path.string());
  write_matrix_market(out, matrix);
}

}  // namespace slin
