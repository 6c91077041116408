#include "caevpr/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "caevpr/error.hpp"

namespace caevpr {

namespace {

void init_uniform(Param& p, double fan_in, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (float& v : p.value.data()) v = static_cast<float>(dist(rng));
}

Block make_block(const std::string& prefix, bool transposed, bool has_norm, int c_in, int c_out,
                 const BlockGeometry& geo, std::mt19937_64& rng) {
    Block b;
    b.transposed = transposed;
    b.has_norm = has_norm;
    b.stride = geo.stride;
    const Shape4 wshape = transposed ? Shape4{c_in, c_out, geo.kh, geo.kw}
                                     : Shape4{c_out, c_in, geo.kh, geo.kw};
    b.weight = Param(prefix + ".weight", wshape);
    b.bias = Param(prefix + ".bias", {c_out, 1, 1, 1});
    // Transposed convolutions see on average c_in*kh*kw/(sh*sw) terms per output.
    const double fan_in =
        transposed ? static_cast<double>(c_in) * geo.kh * geo.kw / (geo.stride.h * geo.stride.w)
                   : static_cast<double>(c_in) * geo.kh * geo.kw;
    init_uniform(b.weight, fan_in, rng);
    if (has_norm) {
        b.gamma = Param(prefix + ".bn.gamma", {c_out, 1, 1, 1}, 1.0f);
        b.beta = Param(prefix + ".bn.beta", {c_out, 1, 1, 1}, 0.0f);
        b.running = RunningStats::identity(c_out);
        b.alpha = Param(prefix + ".prelu.alpha", {c_out, 1, 1, 1}, 0.25f);
    }
    return b;
}

// Training mode when `train_stats` is set: batch statistics are used and
// folded into it.
Tensor4 block_forward(const Block& b, const Tensor4& x, RunningStats* train_stats,
                      BlockTrace* trace) {
    Tensor4 z = b.transposed ? deconv2d_forward(x, b.weight.value, b.bias.value, b.stride)
                             : conv2d_forward(x, b.weight.value, b.bias.value, b.stride);
    if (!b.has_norm) {
        if (trace) *trace = {x, z, Tensor4()};
        return z;
    }
    Tensor4 y;
    if (train_stats) {
        y = batchnorm_forward(z, b.gamma.value, b.beta.value, *train_stats, {0.1f, 1e-5f, true});
    } else {
        RunningStats frozen = b.running;
        y = batchnorm_forward(z, b.gamma.value, b.beta.value, frozen, {0.1f, 1e-5f, false});
    }
    Tensor4 a = prelu_forward(y, b.alpha.value);
    if (trace) *trace = {x, std::move(z), std::move(y)};
    return a;
}

Tensor4 block_backward(Block& b, const BlockTrace& t, const Tensor4& grad_out, bool input_grad) {
    Tensor4 g = grad_out;
    if (b.has_norm) {
        PReluGrads pg = prelu_backward(t.norm_out, b.alpha.value, g);
        b.alpha.accumulate(pg.grad_alpha);
        BatchNormGrads bg = batchnorm_backward(t.conv_out, b.gamma.value, pg.grad_input);
        b.gamma.accumulate(bg.grad_gamma);
        b.beta.accumulate(bg.grad_beta);
        g = std::move(bg.grad_input);
    }
    ConvGrads cg = b.transposed ? deconv2d_backward(t.input, b.weight.value, b.stride, g)
                                : conv2d_backward(t.input, b.weight.value, b.stride, g, input_grad);
    b.weight.accumulate(cg.grad_weights);
    b.bias.accumulate(cg.grad_bias);
    return std::move(cg.grad_input);
}

RunningStats* stats_for(Block& b, Mode mode) { return mode == Mode::train ? &b.running : nullptr; }

template <typename ParamPtr, typename Model>
std::vector<ParamPtr> collect_params(Model& m) {
    std::vector<ParamPtr> out;
    for (auto* blocks : {&m.encoder, &m.decoder}) {
        for (auto& b : *blocks) {
            out.push_back(&b.weight);
            out.push_back(&b.bias);
            if (b.has_norm) {
                out.push_back(&b.gamma);
                out.push_back(&b.beta);
                out.push_back(&b.alpha);
            }
        }
    }
    return out;
}

}  // namespace

std::vector<Param*> CaeModel::params() { return collect_params<Param*>(*this); }
std::vector<const Param*> CaeModel::params() const { return collect_params<const Param*>(*this); }

CaeModel build_model(const ArchSpec& spec, std::uint64_t seed) {
    spec.validate();
    CaeModel m;
    m.spec = spec;
    m.seed = seed;
    std::mt19937_64 rng(seed);
    const std::array<int, 4> ch{spec.input.c, spec.d1, spec.d2, spec.d3};
    for (std::size_t i = 0; i < 3; ++i)
        m.encoder.push_back(make_block("enc" + std::to_string(i), false, true, ch[i], ch[i + 1],
                                       spec.blocks[i], rng));
    // Decoder mirrors the encoder: d3 -> d2 -> d1 -> c'.
    for (std::size_t j = 0; j < 3; ++j) {
        const std::size_t i = 2 - j;
        m.decoder.push_back(make_block("dec" + std::to_string(j), true, j != 2, ch[i + 1], ch[i],
                                       spec.blocks[i], rng));
    }
    return m;
}

void check_input(const CaeModel& model, const Tensor4& features) {
    const Shape4& s = features.shape();
    const FeatureDims got{s.c, s.h, s.w};
    if (!(got == model.spec.input))
        throw DimensionError("feature map dims: expected " + model.spec.input.str() + ", got " +
                             got.str());
}

Tensor4 encoder_forward(CaeModel& model, const Tensor4& normalized, Mode mode) {
    Tensor4 x = normalized;
    for (Block& b : model.encoder) x = block_forward(b, x, stats_for(b, mode), nullptr);
    return x;
}

Tensor4 encoder_forward(const CaeModel& model, const Tensor4& normalized) {
    Tensor4 x = normalized;
    for (const Block& b : model.encoder) x = block_forward(b, x, nullptr, nullptr);
    return x;
}

std::vector<std::vector<float>> encode(const CaeModel& model, const Tensor4& features) {
    check_input(model, features);
    const Tensor4 code = encoder_forward(model, layernorm(features, model.layernorm));
    std::vector<std::vector<float>> out;
    out.reserve(static_cast<std::size_t>(code.shape().n));
    const std::size_t dim = code.shape().sample_size();
    for (int n = 0; n < code.shape().n; ++n)
        out.push_back(l2_normalize(std::span<const float>(code.sample(n), dim)));
    return out;
}

Reconstruction reconstruct(CaeModel& model, const Tensor4& features, Mode mode) {
    check_input(model, features);
    const Tensor4 target = layernorm(features, model.layernorm);
    Tensor4 x = target;
    for (Block& b : model.encoder) x = block_forward(b, x, stats_for(b, mode), nullptr);
    for (Block& b : model.decoder) x = block_forward(b, x, stats_for(b, mode), nullptr);
    const MseResult mse = mse_loss(x, target);
    return {std::move(x), mse.loss};
}

ForwardTrace forward_traced(CaeModel& model, const Tensor4& features) {
    check_input(model, features);
    ForwardTrace t;
    t.target = layernorm(features, model.layernorm);
    t.blocks.resize(model.encoder.size() + model.decoder.size());
    Tensor4 x = t.target;
    std::size_t k = 0;
    for (Block& b : model.encoder) x = block_forward(b, x, &b.running, &t.blocks[k++]);
    t.code = x;
    for (Block& b : model.decoder) x = block_forward(b, x, &b.running, &t.blocks[k++]);
    t.output = std::move(x);
    return t;
}

double backward(CaeModel& model, const ForwardTrace& trace) {
    const MseResult mse = mse_loss(trace.output, trace.target);
    Tensor4 g = mse.grad;
    std::size_t k = trace.blocks.size();
    for (auto it = model.decoder.rbegin(); it != model.decoder.rend(); ++it)
        g = block_backward(*it, trace.blocks[--k], g, true);
    for (std::size_t i = model.encoder.size(); i-- > 0;)
        g = block_backward(model.encoder[i], trace.blocks[--k], g, i != 0);
    return mse.loss;
}

}  // namespace caevpr
