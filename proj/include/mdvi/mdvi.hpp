#pragma once

// Umbrella header: tabular MDPs, KL/entropy-regularized value iteration
// schemes, Garnet generation, performance-bound certification and the
// experiment harness.

#include "mdvi/bounds.hpp"
#include "mdvi/garnet.hpp"
#include "mdvi/harness.hpp"
#include "mdvi/io.hpp"
#include "mdvi/mdp.hpp"
#include "mdvi/regularization.hpp"
#include "mdvi/rng.hpp"
#include "mdvi/schemes.hpp"
#include "mdvi/types.hpp"
