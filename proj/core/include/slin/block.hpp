#pragma once

#include <memory>
#include <string>
#include <vector>

#include "slin/metric.hpp"

namespace slin {

/// Output of a block proximal solve. `converged` is false when an inner
/// iterative solver hit its iteration cap; `point` is still its best iterate.
struct ProxResult {
  Vector point;
  bool converged = true;
  int inner_iterations = 0;
};

/// One convex component f_i of F = sum_i f_i.
///
/// prox_solve returns argmin_x f_i(x) + <s, x> + 1/2 ||x - center||_D^2.
/// It is non-const because implementations may keep warm-start state; a
/// block instance must not be shared between concurrently running solves.
class BlockOracle {
 public:
  virtual ~BlockOracle() = default;

  virtual std::string name() const = 0;
  virtual double value(const Vector& x) const = 0;
  /// Some element of the subdifferential at x.
  virtual Vector subgradient(const Vector& x) const = 0;
  virtual ProxResult prox_solve(const Vector& s, const Vector& center,
                                const DiagonalMetric& metric) = 0;
};

/// F(x) = sum of owned blocks over a fixed ambient dimension.
class Objective {
 public:
  explicit Objective(Eigen::Index dimension) : dimension_(dimension) {}

  void add(std::unique_ptr<BlockOracle> block);

  Eigen::Index dimension() const { return dimension_; }
  std::size_t size() const { return blocks_.size(); }
  BlockOracle& block(std::size_t i) { return *blocks_.at(i); }
  const BlockOracle& block(std::size_t i) const { return *blocks_.at(i); }

  double value(const Vector& x) const;
  /// f_i(x) for every block, in block order.
  std::vector<double> block_values(const Vector& x) const;

 private:
  Eigen::Index dimension_;
  std::vector<std::unique_ptr<BlockOracle>> blocks_;
};

}  // namespace slin
