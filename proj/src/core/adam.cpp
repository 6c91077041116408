#include "caevpr/adam.hpp"

#include <cmath>

#include "caevpr/error.hpp"

namespace caevpr {

void adam_step(std::span<Param* const> params, const AdamOptions& opts) {
    for (const Param* p : params) {
        for (float g : p->grad.data()) {
            if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + p->name);
        }
    }
    for (Param* p : params) {
        const std::uint64_t t = ++p->step_count;
        const double bc1 = 1.0 - std::pow(opts.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(opts.beta2, static_cast<double>(t));
        auto theta = p->value.data();
        auto g = p->grad.data();
        auto m = p->m.data();
        auto v = p->v.data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double gi = g[i];
            const double mi = opts.beta1 * m[i] + (1.0 - opts.beta1) * gi;
            const double vi = opts.beta2 * v[i] + (1.0 - opts.beta2) * gi * gi;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            const double m_hat = mi / bc1;
            const double v_hat = vi / bc2;
            theta[i] = static_cast<float>(theta[i] - opts.lr * m_hat / (std::sqrt(v_hat) + opts.eps));
        }
        p->zero_grad();
    }
}

}  // namespace caevpr
