#pragma once

#include <cstdint>
#include <string>

#include "caevpr/tensor.hpp"

namespace caevpr {

// A trainable tensor with its gradient accumulator and Adam moments.
struct Param {
    Param() = default;
    Param(std::string name, Shape4 shape, float fill = 0.0f);

    std::string name;
    Tensor4 value;
    Tensor4 grad;
    Tensor4 m;
    Tensor4 v;
    std::uint64_t step_count = 0;

    void zero_grad() { grad.fill(0.0f); }
    // Adds `delta` elementwise into grad.
    void accumulate(const Tensor4& delta);
};

}  // namespace caevpr
