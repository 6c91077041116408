#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace caevpr {

struct Shape4 {
    int n = 1;
    int c = 1;
    int h = 1;
    int w = 1;

    std::size_t size() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }
    std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }

    std::string str() const;
    friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense (n, c, h, w) array of 32-bit floats, row-major, every dimension > 0.
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(Shape4 shape, float fill = 0.0f);
    Tensor4(Shape4 shape, std::vector<float> data);

    const Shape4& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }
    const std::vector<float>& values() const { return data_; }

    float* sample(int n) { return data_.data() + n * shape_.sample_size(); }
    const float* sample(int n) const { return data_.data() + n * shape_.sample_size(); }

    float* plane(int n, int c) { return data_.data() + index(n, c, 0, 0); }
    const float* plane(int n, int c) const { return data_.data() + index(n, c, 0, 0); }

    float& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
    float at(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    void fill(float v);

private:
    std::size_t index(int n, int c, int h, int w) const {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }

    Shape4 shape_{0, 0, 0, 0};
    std::vector<float> data_;
};

// Throws DimensionError naming `what` when the shapes differ.
void require_same_shape(const Shape4& expected, const Shape4& actual, const char* what);

}  // namespace caevpr
