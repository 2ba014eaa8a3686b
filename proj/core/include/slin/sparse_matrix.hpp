#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "slin/metric.hpp"

namespace slin {

/// m x n design matrix in compressed sparse column storage.
class SparseDesignMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::ColMajor>;

  SparseDesignMatrix() = default;
  explicit SparseDesignMatrix(Storage storage);

  static SparseDesignMatrix from_dense(const Eigen::MatrixXd& dense);
  static SparseDesignMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                                          const std::vector<Eigen::Triplet<double>>& triplets);

  Eigen::Index rows() const { return storage_.rows(); }
  Eigen::Index cols() const { return storage_.cols(); }
  Eigen::Index nonzeros() const { return storage_.nonZeros(); }
  const Storage& storage() const { return storage_; }

  /// A x
  Vector multiply(const Vector& x) const;
  /// A^T y
  Vector multiply_transpose(const Vector& y) const;

  /// diag(A^T A), i.e. squared column norms.
  Vector column_sq_norms() const;

  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(storage_); }

 private:
  Storage storage_;
};

/// Reads a MatrixMarket "matrix coordinate real general" stream (1-based).
SparseDesignMatrix read_matrix_market(std::istream& in);
SparseDesignMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes column-major coordinate entries with 17 significant digits so
/// that a read-back reproduces every value bit-exactly.
void write_matrix_market(std::ostream& out, const SparseDesignMatrix& matrix);
void write_matrix_market(const std::filesystem::path& path, const SparseDesignMatrix& matrix);

}  // namespace slin
