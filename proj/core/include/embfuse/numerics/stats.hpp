#pragma once

#include <span>
#include <vector>

namespace embfuse::numerics {

// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

// Sample Pearson correlation. Throws Error("degenerate-variance") when
// either input is constant, Error("shape") when sizes differ or are < 2.
double pearson(std::span<const double> a, std::span<const double> b);

// Pearson correlation of the average-rank vectors. Throws
// Error("degenerate-ranks") when either ranking is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace embfuse::numerics
