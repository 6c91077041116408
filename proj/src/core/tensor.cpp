#include "caevpr/tensor.hpp"

#include <algorithm>

#include "caevpr/error.hpp"
#include "caevpr/param.hpp"

namespace caevpr {

std::string Shape4::str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
}

namespace {

void check_positive(const Shape4& s) {
    if (s.n <= 0 || s.c <= 0 || s.h <= 0 || s.w <= 0)
        throw DimensionError("tensor dims must be strictly positive, got " + s.str());
}

}  // namespace

Tensor4::Tensor4(Shape4 shape, float fill) : shape_(shape) {
    check_positive(shape);
    data_.assign(shape.size(), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    check_positive(shape);
    if (data_.size() != shape.size())
        throw DimensionError("tensor " + shape.str() + " needs " + std::to_string(shape.size()) +
                             " values, got " + std::to_string(data_.size()));
}

void Tensor4::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

void require_same_shape(const Shape4& expected, const Shape4& actual, const char* what) {
    if (!(expected == actual))
        throw DimensionError(std::string(what) + ": expected " + expected.str() + ", got " +
                             actual.str());
}

Param::Param(std::string name_, Shape4 shape, float fill)
    : name(std::move(name_)), value(shape, fill), grad(shape), m(shape), v(shape) {}

void Param::accumulate(const Tensor4& delta) {
    require_same_shape(grad.shape(), delta.shape(), name.c_str());
    auto g = grad.data();
    auto d = delta.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += d[i];
}

}  // namespace caevpr
