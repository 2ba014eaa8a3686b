#include "slin/block.hpp"

#include "slin/errors.hpp"

namespace slin {

void Objective::add(std::unique_ptr<BlockOracle> block) {
  if (!block) throw ConfigError("Objective::add: null block");
  blocks_.push_back(std::move(block));
}

double Objective::value(const Vector& x) const {
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dimension_),
                    "Objective::value");
  double total = 0.0;
  for (const auto& b : blocks_) total += b->value(x);
  return total;
}

std::vector<double> Objective::block_values(const Vector& x) const {
  require_same_size(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dimension_),
                    "Objective::block_values");
  std::vector<double> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b->value(x));
  return out;
}

}  // namespace slin
