#pragma once

#include <span>

#include "caevpr/param.hpp"

namespace caevpr {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One bias-corrected Adam update of every parameter, then zeroes the
// gradients. Throws NumericError (naming the parameter) before touching any
// state if a gradient is not finite.
void adam_step(std::span<Param* const> params, const AdamOptions& opts);

}  // namespace caevpr
