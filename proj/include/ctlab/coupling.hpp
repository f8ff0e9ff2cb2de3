#pragma once

#include "ctlab/tensor.hpp"

#include <string>
#include <vector>

// Minibatch optimal-transport assignment between noise and data batches,
// solved exactly (Jonker-Volgenant shortest augmenting paths, O(n^3)).

namespace ctlab {

struct Assignment {
    std::vector<std::size_t> permutation;  // noise index -> data index; a bijection
    double cost = 0.0;                     // total squared-Euclidean transport cost
};

enum class CouplingMode { Independent, OT };

const char* coupling_mode_name(CouplingMode mode);
CouplingMode coupling_mode_from_name(const std::string& name);

// M[i][j] = ||noise_i - data_j||^2 over (n x d) batches.
Tensor cost_matrix(const Tensor& data, const Tensor& noise);

// Minimum-cost perfect matching on a square cost matrix.
Assignment solve_assignment(const Tensor& m);

// OT mode reorders the noise rows so row k pairs with data row k at minimum
// total cost; independent mode returns the pairing unchanged.
Tensor couple_batch(const Tensor& data, const Tensor& noise, CouplingMode mode);

}  // namespace ctlab
