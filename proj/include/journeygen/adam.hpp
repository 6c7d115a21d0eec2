#pragma once

#include <cmath>

#include "journeygen/errors.hpp"
#include "journeygen/transformer.hpp"

namespace jgen {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename S>
struct AdamState {
    long step = 0;
    TransformerParams<S> m, v;

    static AdamState shaped(const TransformerConfig& cfg) {
        AdamState st;
        st.m = TransformerParams<S>::shaped(cfg);
        st.v = TransformerParams<S>::shaped(cfg);
        return st;
    }
};

// Standard Adam with bias correction. Throws TrainingDivergenceError on a
// non-finite gradient so callers can abort with the last good checkpoint.
template <typename S>
void adam_step(TransformerParams<S>& params, TransformerParams<S>& grads, AdamState<S>& st,
               const AdamConfig& cfg) {
    if (!grads.all_finite())
        throw TrainingDivergenceError("adam: non-finite gradient at step " +
                                      std::to_string(st.step + 1));
    ++st.step;
    const S b1 = static_cast<S>(cfg.beta1), b2 = static_cast<S>(cfg.beta2);
    const S corr1 = static_cast<S>(1.0 - std::pow(cfg.beta1, static_cast<double>(st.step)));
    const S corr2 = static_cast<S>(1.0 - std::pow(cfg.beta2, static_cast<double>(st.step)));
    const S lr = static_cast<S>(cfg.lr), eps = static_cast<S>(cfg.eps);

    auto ps = params.tensor_list();
    auto gs = grads.tensor_list();
    auto ms = st.m.tensor_list();
    auto vs = st.v.tensor_list();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        auto& p = *ps[i];
        const auto& g = *gs[i];
        auto& m = *ms[i];
        auto& v = *vs[i];
        m = b1 * m + (static_cast<S>(1) - b1) * g;
        v.array() = b2 * v.array() + (static_cast<S>(1) - b2) * g.array().square();
        p.array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
    }
}

}  // namespace jgen
