#pragma once

#include "subnet/dataset.hpp"
#include "subnet/linear_ss.hpp"

namespace subnet {

struct N4sidOptions {
  Eigen::Index horizon = 0;     // block rows; 0 selects 4 * n_x
  double rank_rel_tol = 1e-10;  // singular values below tol*s_max are zero
};

// Subspace identification of a linear state-space model from one record.
//
// Block-Hankel matrices of past/future inputs and outputs are compressed by
// an LQ factorization; the oblique projection of the future outputs onto the
// past data along the future inputs yields (via SVD) the extended
// observability matrix. C is its top block, A solves the shift equation,
// and B comes from a least-squares fit of the output equation with the
// feed-through fixed at zero (the model class has none). The initial state
// from that regression is discarded.
//
// Expects roughly zero-mean (normalized) data. Requires
// N >= 10 * horizon * max(n_u, n_y) and horizon > n_x. Raises Order when
// n_x exceeds the numeric rank of the projection, Identifiability when the
// projection carries no usable directions.
LinearSS n4sid_estimate(const Dataset& ds, Eigen::Index n_x,
                        const N4sidOptions& opts = {});

}  // namespace subnet
