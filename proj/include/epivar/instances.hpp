#pragma once

#include "epivar/decomposable.hpp"

namespace epivar::instances {

// phi = ||.||_1 on R^2 (Q = [-1,1]^2, F = id, xbar = 0)
DecomposablePair l1_pair();

// phi = ||.||_2 on R^2 (Q = unit ball, F = id, xbar = 0)
DecomposablePair euclid_pair();

// phi(x) = x1^2 - x2^2 + |x1| via Q = {1} x [-1,1], F = (x1^2 - x2^2, x1)
DecomposablePair saddle_demo_pair();

// support function of {x2 >= (2/3)|x1|^{3/2}} with F = id; the set lacks the
// uniform tangent-path property at 0
DecomposablePair counterexample_pair();

// phi = ||x||_1 + ||x||^2 via Q = [-1,1]^2 x {1}, F = (x, ||x||^2)
DecomposablePair l1_quad_pair();

}  // namespace epivar::instances
