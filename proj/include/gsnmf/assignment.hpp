#pragma once

#include <vector>

#include "gsnmf/matrix.hpp"

namespace gsnmf {

// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
// O(n^3)). Returns assignment[i] = column matched to row i.
std::vector<Index> solve_assignment(const DenseMatrix& cost);

}  // namespace gsnmf
