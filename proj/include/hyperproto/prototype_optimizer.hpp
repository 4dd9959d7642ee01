#ifndef HYPERPROTO_PROTOTYPE_OPTIMIZER_HPP
#define HYPERPROTO_PROTOTYPE_OPTIMIZER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "hyperproto/matrix.hpp"
#include "hyperproto/prototype_set.hpp"

namespace hyperproto {

struct OptimizerConfig {
    std::size_t iterations = 1000;
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SeparationLoss {
    double loss = 0.0;
    Matrix gradient;                    // M x a
    std::vector<std::size_t> partners;  // row i's nearest other row
};

// M Gaussian draws, each normalized. Deterministic in seed.
PrototypeSet init_prototypes(std::size_t count, std::size_t dim, std::uint64_t seed);

// Mean over rows of the largest inner product with any other row, plus its subgradient.
// Rows are expected to be unit vectors, in which case the inner product is the cosine.
// The partner of row i is the lowest index j attaining the maximum.
SeparationLoss separation_loss(const Matrix& prototypes);
SeparationLoss separation_loss(const PrototypeSet& prototypes);

struct OptimizerTrace {
    double initial_max_cosine = 0.0;
    double best_max_cosine = 0.0;
    std::size_t best_iteration = 0;  // 0 means the initial set was never improved on
    std::size_t iterations = 0;
};

// Unit-speed descent direction for separation_loss: each max term's subgradient is reduced to
// its component tangent to the sphere and rescaled to length 1/M. This is the gradient of the
// same nearest-neighbour objective measured in angles rather than cosines, so nearly coincident
// prototypes still repel at full strength.
Matrix separation_direction(const Matrix& prototypes, const SeparationLoss& loss);

// Momentum descent along separation_direction with a cosine-annealed step size; every step
// renormalizes the rows. Returns the iterate with the lowest max pairwise cosine seen,
// the initial set included.
// Called after every step with the 1-based iteration and the renormalized iterate.
using StepObserver = std::function<void(std::size_t, const Matrix&)>;

PrototypeSet optimize_prototypes(std::size_t count, std::size_t dim, const OptimizerConfig& config,
                                 OptimizerTrace* trace = nullptr, const StepObserver& observer = {});

}  // namespace hyperproto

#endif  // HYPERPROTO_PROTOTYPE_OPTIMIZER_HPP
