#include <string>
#include <vector>

#include "caevpr/error.hpp"
#include "caevpr/ops.hpp"
#include "caevpr/parallel.hpp"

namespace caevpr {

namespace {

void check_stride(Stride s) {
    if (s.h < 1 || s.w < 1)
        throw DimensionError("stride must be >= 1, got (" + std::to_string(s.h) + "," +
                             std::to_string(s.w) + ")");
}

void check_bias(const Tensor4& bias, int channels, const char* op) {
    if (!(bias.shape() == Shape4{channels, 1, 1, 1}))
        throw DimensionError(std::string(op) + ": bias must be " +
                             Shape4{channels, 1, 1, 1}.str() + ", got " + bias.shape().str());
}

// Shared checks for the convolution: returns the output shape.
Shape4 conv_output_shape(const Shape4& in, const Shape4& k, Stride s) {
    check_stride(s);
    if (k.c != in.c)
        throw DimensionError("conv2d: kernel expects " + std::to_string(k.c) +
                             " input channels, input has " + std::to_string(in.c));
    if (k.h > in.h)
        throw DimensionError("conv2d: kernel height " + std::to_string(k.h) +
                             " exceeds input height " + std::to_string(in.h));
    if (k.w > in.w)
        throw DimensionError("conv2d: kernel width " + std::to_string(k.w) +
                             " exceeds input width " + std::to_string(in.w));
    return {in.n, k.n, conv_out_extent(in.h, k.h, s.h), conv_out_extent(in.w, k.w, s.w)};
}

Shape4 deconv_output_shape(const Shape4& in, const Shape4& k, Stride s) {
    check_stride(s);
    if (k.n != in.c)
        throw DimensionError("deconv2d: kernel expects " + std::to_string(k.n) +
                             " input channels, input has " + std::to_string(in.c));
    return {in.n, k.c, deconv_out_extent(in.h, k.h, s.h), deconv_out_extent(in.w, k.w, s.w)};
}

Tensor4 channel_sums(const Tensor4& t) {
    const Shape4& s = t.shape();
    Tensor4 out({s.c, 1, 1, 1});
    for (int c = 0; c < s.c; ++c) {
        double acc = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const float* p = t.plane(n, c);
            for (std::size_t i = 0; i < s.plane_size(); ++i) acc += p[i];
        }
        out[c] = static_cast<float>(acc);
    }
    return out;
}

}  // namespace

Tensor4 conv2d_forward(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
                       Stride stride) {
    const Shape4& in = input.shape();
    const Shape4& k = weights.shape();
    const Shape4 os = conv_output_shape(in, k, stride);
    check_bias(bias, k.n, "conv2d");

    Tensor4 out(os);
    parallel_for(static_cast<std::size_t>(os.n) * os.c, [&](std::size_t job) {
        const int n = static_cast<int>(job / os.c);
        const int co = static_cast<int>(job % os.c);
        std::vector<double> acc(os.plane_size(), static_cast<double>(bias[co]));
        for (int ci = 0; ci < in.c; ++ci) {
            const float* x = input.plane(n, ci);
            for (int ky = 0; ky < k.h; ++ky) {
                for (int kx = 0; kx < k.w; ++kx) {
                    const double wv = weights.at(co, ci, ky, kx);
                    for (int oy = 0; oy < os.h; ++oy) {
                        const float* row = x + (oy * stride.h + ky) * in.w + kx;
                        double* arow = acc.data() + static_cast<std::size_t>(oy) * os.w;
                        for (int ox = 0; ox < os.w; ++ox) arow[ox] += wv * row[ox * stride.w];
                    }
                }
            }
        }
        float* dst = out.plane(n, co);
        for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i]);
    });
    return out;
}

ConvGrads conv2d_backward(const Tensor4& input, const Tensor4& weights, Stride stride,
                          const Tensor4& grad_out, bool input_grad) {
    const Shape4& in = input.shape();
    const Shape4& k = weights.shape();
    const Shape4 os = conv_output_shape(in, k, stride);
    require_same_shape(os, grad_out.shape(), "conv2d_backward grad_out");

    ConvGrads g{Tensor4(), Tensor4(k), channel_sums(grad_out)};

    parallel_for(static_cast<std::size_t>(k.n), [&](std::size_t job) {
        const int co = static_cast<int>(job);
        for (int ci = 0; ci < k.c; ++ci) {
            for (int ky = 0; ky < k.h; ++ky) {
                for (int kx = 0; kx < k.w; ++kx) {
                    double acc = 0.0;
                    for (int n = 0; n < in.n; ++n) {
                        const float* x = input.plane(n, ci);
                        const float* go = grad_out.plane(n, co);
                        for (int oy = 0; oy < os.h; ++oy) {
                            const float* row = x + (oy * stride.h + ky) * in.w + kx;
                            const float* grow = go + oy * os.w;
                            for (int ox = 0; ox < os.w; ++ox)
                                acc += static_cast<double>(grow[ox]) * row[ox * stride.w];
                        }
                    }
                    g.grad_weights.at(co, ci, ky, kx) = static_cast<float>(acc);
                }
            }
        }
    });

    if (!input_grad) return g;
    g.grad_input = Tensor4(in);
    parallel_for(static_cast<std::size_t>(in.n) * in.c, [&](std::size_t job) {
        const int n = static_cast<int>(job / in.c);
        const int ci = static_cast<int>(job % in.c);
        std::vector<double> acc(in.plane_size(), 0.0);
        for (int co = 0; co < k.n; ++co) {
            const float* go = grad_out.plane(n, co);
            for (int ky = 0; ky < k.h; ++ky) {
                for (int kx = 0; kx < k.w; ++kx) {
                    const double wv = weights.at(co, ci, ky, kx);
                    for (int oy = 0; oy < os.h; ++oy) {
                        double* arow = acc.data() + (oy * stride.h + ky) * in.w + kx;
                        const float* grow = go + oy * os.w;
                        for (int ox = 0; ox < os.w; ++ox) arow[ox * stride.w] += wv * grow[ox];
                    }
                }
            }
        }
        float* dst = g.grad_input.plane(n, ci);
        for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i]);
    });
    return g;
}

Tensor4 deconv2d_forward(const Tensor4& input, const Tensor4& weights, const Tensor4& bias,
                         Stride stride) {
    const Shape4& in = input.shape();
    const Shape4& k = weights.shape();
    const Shape4 os = deconv_output_shape(in, k, stride);
    check_bias(bias, k.c, "deconv2d");

    Tensor4 out(os);
    parallel_for(static_cast<std::size_t>(os.n) * os.c, [&](std::size_t job) {
        const int n = static_cast<int>(job / os.c);
        const int co = static_cast<int>(job % os.c);
        std::vector<double> acc(os.plane_size(), static_cast<double>(bias[co]));
        for (int ci = 0; ci < in.c; ++ci) {
            const float* x = input.plane(n, ci);
            for (int ky = 0; ky < k.h; ++ky) {
                for (int kx = 0; kx < k.w; ++kx) {
                    const double wv = weights.at(ci, co, ky, kx);
                    for (int iy = 0; iy < in.h; ++iy) {
                        double* arow = acc.data() + (iy * stride.h + ky) * os.w + kx;
                        const float* row = x + iy * in.w;
                        for (int ix = 0; ix < in.w; ++ix) arow[ix * stride.w] += wv * row[ix];
                    }
                }
            }
        }
        float* dst = out.plane(n, co);
        for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i]);
    });
    return out;
}

ConvGrads deconv2d_backward(const Tensor4& input, const Tensor4& weights, Stride stride,
                            const Tensor4& grad_out) {
    const Shape4& in = input.shape();
    const Shape4& k = weights.shape();
    const Shape4 os = deconv_output_shape(in, k, stride);
    require_same_shape(os, grad_out.shape(), "deconv2d_backward grad_out");

    // The input gradient of a transposed convolution is the forward
    // convolution of grad_out with the same kernel.
    ConvGrads g{conv2d_forward(grad_out, weights, Tensor4({k.n, 1, 1, 1}), stride), Tensor4(k),
                channel_sums(grad_out)};

    parallel_for(static_cast<std::size_t>(k.n), [&](std::size_t job) {
        const int ci = static_cast<int>(job);
        for (int co = 0; co < k.c; ++co) {
            for (int ky = 0; ky < k.h; ++ky) {
                for (int kx = 0; kx < k.w; ++kx) {
                    double acc = 0.0;
                    for (int n = 0; n < in.n; ++n) {
                        const float* x = input.plane(n, ci);
                        const float* go = grad_out.plane(n, co);
                        for (int iy = 0; iy < in.h; ++iy) {
                            const float* grow = go + (iy * stride.h + ky) * os.w + kx;
                            const float* row = x + iy * in.w;
                            for (int ix = 0; ix < in.w; ++ix)
                                acc += static_cast<double>(row[ix]) * grow[ix * stride.w];
                        }
                    }
                    g.grad_weights.at(ci, co, ky, kx) = static_cast<float>(acc);
                }
            }
        }
    });
    return g;
}

}  // namespace caevpr
