#include <cmath>
#include <string>

#include "caevpr/error.hpp"
#include "caevpr/ops.hpp"

namespace caevpr {

namespace {

void check_alpha(const Tensor4& alpha, int channels) {
    if (!(alpha.shape() == Shape4{channels, 1, 1, 1}))
        throw DimensionError("prelu alpha must be " + Shape4{channels, 1, 1, 1}.str() + ", got " +
                             alpha.shape().str());
}

}  // namespace

Tensor4 prelu_forward(const Tensor4& input, const Tensor4& alpha) {
    const Shape4& s = input.shape();
    check_alpha(alpha, s.c);
    Tensor4 out(s);
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            const float a = alpha[c];
            const float* x = input.plane(n, c);
            float* y = out.plane(n, c);
            for (std::size_t i = 0; i < s.plane_size(); ++i) y[i] = x[i] > 0.0f ? x[i] : a * x[i];
        }
    }
    return out;
}

// x == 0 takes the alpha branch.
PReluGrads prelu_backward(const Tensor4& input, const Tensor4& alpha, const Tensor4& grad_out) {
    const Shape4& s = input.shape();
    check_alpha(alpha, s.c);
    require_same_shape(s, grad_out.shape(), "prelu_backward grad_out");
    PReluGrads g{Tensor4(s), Tensor4({s.c, 1, 1, 1})};
    for (int c = 0; c < s.c; ++c) {
        const float a = alpha[c];
        double ga = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const float* x = input.plane(n, c);
            const float* go = grad_out.plane(n, c);
            float* gi = g.grad_input.plane(n, c);
            for (std::size_t i = 0; i < s.plane_size(); ++i) {
                if (x[i] > 0.0f) {
                    gi[i] = go[i];
                } else {
                    gi[i] = a * go[i];
                    ga += static_cast<double>(go[i]) * x[i];
                }
            }
        }
        g.grad_alpha[c] = static_cast<float>(ga);
    }
    return g;
}

MseResult mse_loss(const Tensor4& prediction, const Tensor4& target) {
    require_same_shape(target.shape(), prediction.shape(), "mse_loss prediction");
    const double denom = static_cast<double>(prediction.size());
    auto p = prediction.data();
    auto t = target.data();
    MseResult r{0.0, Tensor4(prediction.shape())};
    auto g = r.grad.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p[i]) - t[i];
        sum += d * d;
        g[i] = static_cast<float>(2.0 * d / denom);
    }
    r.loss = sum / denom;
    return r;
}

std::vector<float> l2_normalize(std::span<const float> v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw NumericError("l2_normalize: degenerate descriptor (norm " + std::to_string(norm) + ")");
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
    return out;
}

}  // namespace caevpr
