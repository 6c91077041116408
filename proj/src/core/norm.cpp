#include <cmath>
#include <string>

#include "caevpr/error.hpp"
#include "caevpr/ops.hpp"

namespace caevpr {

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // population
};

Moments channel_moments(const Tensor4& t, int c) {
    const Shape4& s = t.shape();
    const std::size_t plane = s.plane_size();
    const double count = static_cast<double>(s.n) * plane;
    double sum = 0.0;
    for (int n = 0; n < s.n; ++n) {
        const float* p = t.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) sum += p[i];
    }
    Moments m;
    m.mean = sum / count;
    double sq = 0.0;
    for (int n = 0; n < s.n; ++n) {
        const float* p = t.plane(n, c);
        for (std::size_t i = 0; i < plane; ++i) {
            const double d = p[i] - m.mean;
            sq += d * d;
        }
    }
    m.var = sq / count;
    return m;
}

Moments span_moments(const float* p, std::size_t count) {
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) sum += p[i];
    Moments m;
    m.mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = p[i] - m.mean;
        sq += d * d;
    }
    m.var = sq / static_cast<double>(count);
    return m;
}

void check_channel_param(const Tensor4& p, int channels, const char* what) {
    if (!(p.shape() == Shape4{channels, 1, 1, 1}))
        throw DimensionError(std::string(what) + " must be " + Shape4{channels, 1, 1, 1}.str() +
                             ", got " + p.shape().str());
}

}  // namespace

RunningStats RunningStats::identity(int channels) {
    return {std::vector<float>(static_cast<std::size_t>(channels), 0.0f),
            std::vector<float>(static_cast<std::size_t>(channels), 1.0f)};
}

Tensor4 batchnorm_forward(const Tensor4& input, const Tensor4& gamma, const Tensor4& beta,
                          RunningStats& running, const BatchNormOptions& opts) {
    const Shape4& s = input.shape();
    check_channel_param(gamma, s.c, "batchnorm gamma");
    check_channel_param(beta, s.c, "batchnorm beta");
    if (running.mean.size() != static_cast<std::size_t>(s.c) ||
        running.var.size() != static_cast<std::size_t>(s.c))
        throw DimensionError("batchnorm running stats do not match " + std::to_string(s.c) +
                             " channels");
    const std::size_t count = static_cast<std::size_t>(s.n) * s.plane_size();
    if (opts.training && count < 2)
        throw DimensionError("batchnorm: degenerate variance, training mode needs at least 2 "
                             "values per channel, got " +
                             std::to_string(count));

    Tensor4 out(s);
    for (int c = 0; c < s.c; ++c) {
        double mean = 0.0;
        double var = 0.0;
        if (opts.training) {
            const Moments m = channel_moments(input, c);
            mean = m.mean;
            var = m.var;
            const double unbiased = m.var * static_cast<double>(count) / (count - 1);
            running.mean[c] = static_cast<float>((1.0 - opts.momentum) * running.mean[c] +
                                                 opts.momentum * m.mean);
            running.var[c] = static_cast<float>((1.0 - opts.momentum) * running.var[c] +
                                                opts.momentum * unbiased);
        } else {
            mean = running.mean[c];
            var = running.var[c];
        }
        const double inv_std = 1.0 / std::sqrt(var + opts.epsilon);
        const double g = gamma[c];
        const double b = beta[c];
        for (int n = 0; n < s.n; ++n) {
            const float* x = input.plane(n, c);
            float* y = out.plane(n, c);
            for (std::size_t i = 0; i < s.plane_size(); ++i)
                y[i] = static_cast<float>(g * (x[i] - mean) * inv_std + b);
        }
    }
    return out;
}

BatchNormGrads batchnorm_backward(const Tensor4& input, const Tensor4& gamma,
                                  const Tensor4& grad_out, float epsilon) {
    const Shape4& s = input.shape();
    check_channel_param(gamma, s.c, "batchnorm gamma");
    require_same_shape(s, grad_out.shape(), "batchnorm_backward grad_out");
    const std::size_t plane = s.plane_size();
    const double count = static_cast<double>(s.n) * plane;
    if (count < 2) throw DimensionError("batchnorm_backward: degenerate variance");

    BatchNormGrads g{Tensor4(s), Tensor4({s.c, 1, 1, 1}), Tensor4({s.c, 1, 1, 1})};
    for (int c = 0; c < s.c; ++c) {
        const Moments m = channel_moments(input, c);
        const double inv_std = 1.0 / std::sqrt(m.var + epsilon);
        double sum_go = 0.0;
        double sum_go_xhat = 0.0;
        for (int n = 0; n < s.n; ++n) {
            const float* x = input.plane(n, c);
            const float* go = grad_out.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                sum_go += go[i];
                sum_go_xhat += go[i] * (x[i] - m.mean) * inv_std;
            }
        }
        g.grad_beta[c] = static_cast<float>(sum_go);
        g.grad_gamma[c] = static_cast<float>(sum_go_xhat);
        const double gm = gamma[c];
        for (int n = 0; n < s.n; ++n) {
            const float* x = input.plane(n, c);
            const float* go = grad_out.plane(n, c);
            float* gi = g.grad_input.plane(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                const double xhat = (x[i] - m.mean) * inv_std;
                gi[i] = static_cast<float>(gm * inv_std / count *
                                           (count * go[i] - sum_go - xhat * sum_go_xhat));
            }
        }
    }
    return g;
}

void LayerNormConfig::validate() const {
    if (!(epsilon > 0.0f)) throw ConfigError("layernorm epsilon must be > 0");
    if (mode == LayerNormMode::frozen_stats) {
        if (!frozen_mean || !frozen_var)
            throw ConfigError("layernorm frozen_stats mode requires stored mean and variance");
        if (!(*frozen_var >= 0.0f)) throw ConfigError("layernorm frozen variance must be >= 0");
    }
}

Tensor4 layernorm(const Tensor4& input, const LayerNormConfig& cfg) {
    cfg.validate();
    const Shape4& s = input.shape();
    const std::size_t count = s.sample_size();
    Tensor4 out(s);
    if (cfg.mode == LayerNormMode::frozen_stats) {
        const double mean = *cfg.frozen_mean;
        const double inv_std = 1.0 / std::sqrt(static_cast<double>(*cfg.frozen_var) + cfg.epsilon);
        auto x = input.data();
        auto y = out.data();
        for (std::size_t i = 0; i < x.size(); ++i)
            y[i] = static_cast<float>((x[i] - mean) * inv_std);
        return out;
    }
    if (count < 2)
        throw DimensionError("layernorm: per-sample mode needs at least 2 elements per sample");
    for (int n = 0; n < s.n; ++n) {
        const float* x = input.sample(n);
        float* y = out.sample(n);
        const Moments m = span_moments(x, count);
        const double inv_std = 1.0 / std::sqrt(m.var + cfg.epsilon);
        for (std::size_t i = 0; i < count; ++i)
            y[i] = static_cast<float>((x[i] - m.mean) * inv_std);
    }
    return out;
}

Tensor4 layernorm_backward(const Tensor4& input, const LayerNormConfig& cfg,
                           const Tensor4& grad_out) {
    cfg.validate();
    const Shape4& s = input.shape();
    require_same_shape(s, grad_out.shape(), "layernorm_backward grad_out");
    Tensor4 gi(s);
    if (cfg.mode == LayerNormMode::frozen_stats) {
        const double inv_std = 1.0 / std::sqrt(static_cast<double>(*cfg.frozen_var) + cfg.epsilon);
        auto go = grad_out.data();
        auto d = gi.data();
        for (std::size_t i = 0; i < go.size(); ++i) d[i] = static_cast<float>(go[i] * inv_std);
        return gi;
    }
    const std::size_t count = s.sample_size();
    if (count < 2)
        throw DimensionError("layernorm: per-sample mode needs at least 2 elements per sample");
    const double cnt = static_cast<double>(count);
    for (int n = 0; n < s.n; ++n) {
        const float* x = input.sample(n);
        const float* go = grad_out.sample(n);
        float* d = gi.sample(n);
        const Moments m = span_moments(x, count);
        const double inv_std = 1.0 / std::sqrt(m.var + cfg.epsilon);
        double sum_go = 0.0;
        double sum_go_xhat = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            sum_go += go[i];
            sum_go_xhat += go[i] * (x[i] - m.mean) * inv_std;
        }
        for (std::size_t i = 0; i < count; ++i) {
            const double xhat = (x[i] - m.mean) * inv_std;
            d[i] = static_cast<float>(inv_std / cnt * (cnt * go[i] - sum_go - xhat * sum_go_xhat));
        }
    }
    return gi;
}

}  // namespace caevpr
