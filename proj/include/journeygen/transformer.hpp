#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "journeygen/errors.hpp"
#include "journeygen/rng.hpp"

namespace jgen {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TransformerConfig {
    int n_layer = 12;
    int n_head = 12;
    int d_model = 768;
    int d_ff = 0;  // 0 = 4 * d_model
    int ctx_len = 1024;
    int vocab_size = 0;
    std::uint64_t seed = 0;

    int ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }
    int head_dim() const { return d_model / n_head; }

    void validate() const {
        if (n_layer < 1 || n_head < 1 || d_model < 1 || vocab_size < 1)
            throw ConfigError("transformer config: dimensions must be positive");
        if (d_model % n_head != 0)
            throw ConfigError("transformer config: d_model must be divisible by n_head");
        if (ctx_len < 8) throw ConfigError("transformer config: ctx_len must be >= 8");
    }

    bool operator==(const TransformerConfig& o) const {
        return n_layer == o.n_layer && n_head == o.n_head && d_model == o.d_model &&
               ff_dim() == o.ff_dim() && ctx_len == o.ctx_len && vocab_size == o.vocab_size;
    }

    // wte + wpe + per-layer (2 norms, 4 projections, mlp) + final norm;
    // unembedding is tied to wte and adds nothing
    std::size_t param_count() const {
        const std::size_t d = d_model, ff = ff_dim();
        const std::size_t per_layer = 2 * (2 * d) + 4 * (d * d + d) + (d * ff + ff) + (ff * d + d);
        return static_cast<std::size_t>(vocab_size) * d + static_cast<std::size_t>(ctx_len) * d +
               static_cast<std::size_t>(n_layer) * per_layer + 2 * d;
    }
};

template <typename S>
struct TransformerParams {
    TransformerConfig cfg;
    MatX<S> wte;  // vocab x d
    MatX<S> wpe;  // ctx x d
    struct Layer {
        MatX<S> ln1_g, ln1_b;      // 1 x d
        MatX<S> wq, wk, wv, wo;    // d x d
        MatX<S> bq, bk, bv, bo;    // 1 x d
        MatX<S> ln2_g, ln2_b;      // 1 x d
        MatX<S> w_fc;              // d x ff
        MatX<S> b_fc;              // 1 x ff
        MatX<S> w_proj;            // ff x d
        MatX<S> b_proj;            // 1 x d
    };
    std::vector<Layer> layers;
    MatX<S> lnf_g, lnf_b;  // 1 x d

    // Fixed traversal order; checkpoints, Adam state and the gradient check
    // all rely on it.
    template <typename F>
    void for_each(F&& f) {
        f("wte", wte);
        f("wpe", wpe);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const std::string p = "h" + std::to_string(l) + ".";
            Layer& L = layers[l];
            f(p + "ln1.g", L.ln1_g);
            f(p + "ln1.b", L.ln1_b);
            f(p + "attn.wq", L.wq);
            f(p + "attn.bq", L.bq);
            f(p + "attn.wk", L.wk);
            f(p + "attn.bk", L.bk);
            f(p + "attn.wv", L.wv);
            f(p + "attn.bv", L.bv);
            f(p + "attn.wo", L.wo);
            f(p + "attn.bo", L.bo);
            f(p + "ln2.g", L.ln2_g);
            f(p + "ln2.b", L.ln2_b);
            f(p + "mlp.w_fc", L.w_fc);
            f(p + "mlp.b_fc", L.b_fc);
            f(p + "mlp.w_proj", L.w_proj);
            f(p + "mlp.b_proj", L.b_proj);
        }
        f("lnf.g", lnf_g);
        f("lnf.b", lnf_b);
    }

    template <typename F>
    void for_each(F&& f) const {
        const_cast<TransformerParams*>(this)->for_each(
            [&](const std::string& n, MatX<S>& m) { f(n, const_cast<const MatX<S>&>(m)); });
    }

    std::vector<MatX<S>*> tensor_list() {
        std::vector<MatX<S>*> out;
        for_each([&](const std::string&, MatX<S>& m) { out.push_back(&m); });
        return out;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for_each([&](const std::string&, const MatX<S>& m) { n += m.size(); });
        return n;
    }

    bool all_finite() const {
        bool ok = true;
        for_each([&](const std::string&, const MatX<S>& m) { ok = ok && m.allFinite(); });
        return ok;
    }

    static TransformerParams shaped(const TransformerConfig& cfg) {
        cfg.validate();
        TransformerParams p;
        p.cfg = cfg;
        const int d = cfg.d_model, ff = cfg.ff_dim();
        p.wte = MatX<S>::Zero(cfg.vocab_size, d);
        p.wpe = MatX<S>::Zero(cfg.ctx_len, d);
        p.layers.resize(cfg.n_layer);
        for (auto& L : p.layers) {
            L.ln1_g = MatX<S>::Zero(1, d);
            L.ln1_b = MatX<S>::Zero(1, d);
            L.wq = MatX<S>::Zero(d, d);
            L.wk = MatX<S>::Zero(d, d);
            L.wv = MatX<S>::Zero(d, d);
            L.wo = MatX<S>::Zero(d, d);
            L.bq = MatX<S>::Zero(1, d);
            L.bk = MatX<S>::Zero(1, d);
            L.bv = MatX<S>::Zero(1, d);
            L.bo = MatX<S>::Zero(1, d);
            L.ln2_g = MatX<S>::Zero(1, d);
            L.ln2_b = MatX<S>::Zero(1, d);
            L.w_fc = MatX<S>::Zero(d, ff);
            L.b_fc = MatX<S>::Zero(1, ff);
            L.w_proj = MatX<S>::Zero(ff, d);
            L.b_proj = MatX<S>::Zero(1, d);
        }
        p.lnf_g = MatX<S>::Zero(1, d);
        p.lnf_b = MatX<S>::Zero(1, d);
        return p;
    }

    // GPT-2 style initialization: N(0, 0.02) weights, zero biases, unit norm
    // gains; residual output projections scaled by 1/sqrt(2 * n_layer).
    static TransformerParams init(const TransformerConfig& cfg) {
        TransformerParams p = shaped(cfg);
        Rng rng(cfg.seed);
        const double base_std = 0.02;
        const double resid_std = base_std / std::sqrt(2.0 * cfg.n_layer);
        const auto fill = [&](MatX<S>& m, double std) {
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    m(i, j) = static_cast<S>(rng.normal(0.0, std));
        };
        fill(p.wte, base_std);
        fill(p.wpe, base_std);
        for (auto& L : p.layers) {
            L.ln1_g.setOnes();
            L.ln2_g.setOnes();
            fill(L.wq, base_std);
            fill(L.wk, base_std);
            fill(L.wv, base_std);
            fill(L.wo, resid_std);
            fill(L.w_fc, base_std);
            fill(L.w_proj, resid_std);
        }
        p.lnf_g.setOnes();
        return p;
    }
};

namespace detail {

constexpr double kLnEps = 1e-5;
constexpr double kGeluC0 = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluC1 = 0.044715;

template <typename S>
inline S gelu(S x) {
    const S u = static_cast<S>(kGeluC0) * (x + static_cast<S>(kGeluC1) * x * x * x);
    return static_cast<S>(0.5) * x * (static_cast<S>(1) + std::tanh(u));
}

template <typename S>
inline S gelu_grad(S x) {
    const S u = static_cast<S>(kGeluC0) * (x + static_cast<S>(kGeluC1) * x * x * x);
    const S t = std::tanh(u);
    const S du = static_cast<S>(kGeluC0) * (static_cast<S>(1) + static_cast<S>(3 * kGeluC1) * x * x);
    return static_cast<S>(0.5) * (static_cast<S>(1) + t) +
           static_cast<S>(0.5) * x * (static_cast<S>(1) - t * t) * du;
}

// y = (x - mean) * rstd * g + b rowwise; stores xhat and rstd for backward
template <typename S>
void layernorm_forward(const MatX<S>& x, const MatX<S>& g, const MatX<S>& b, MatX<S>& xhat,
                       MatX<S>& rstd, MatX<S>& y) {
    const Eigen::Index n = x.rows(), d = x.cols();
    xhat.resize(n, d);
    rstd.resize(n, 1);
    y.resize(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const S mu = x.row(r).mean();
        const S var = (x.row(r).array() - mu).square().sum() / static_cast<S>(d);
        const S rs = static_cast<S>(1) / std::sqrt(var + static_cast<S>(kLnEps));
        rstd(r, 0) = rs;
        xhat.row(r) = ((x.row(r).array() - mu) * rs).matrix();
        y.row(r) = xhat.row(r).cwiseProduct(g.row(0)) + b.row(0);
    }
}

template <typename S>
void layernorm_backward(const MatX<S>& dy, const MatX<S>& xhat, const MatX<S>& rstd,
                        const MatX<S>& g, MatX<S>& dx, MatX<S>& dg, MatX<S>& db) {
    const Eigen::Index n = dy.rows(), d = dy.cols();
    dx.resize(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Matrix<S, 1, Eigen::Dynamic> dxhat = dy.row(r).cwiseProduct(g.row(0));
        const S m1 = dxhat.mean();
        const S m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
        dx.row(r) = ((dxhat.array() - m1 - xhat.row(r).array() * m2) * rstd(r, 0)).matrix();
        dg.row(0) += dy.row(r).cwiseProduct(xhat.row(r));
        db.row(0) += dy.row(r);
    }
}

}  // namespace detail

// Stored activations for one forward pass; memory scales with B * L.
template <typename S>
struct ForwardCache {
    int B = 0, L = 0;
    std::vector<int> tokens;
    MatX<S> x0;
    struct LayerCache {
        MatX<S> xhat1, rstd1;
        MatX<S> q, k, v;
        std::vector<MatX<S>> probs;  // B * n_head attention matrices, L x L
        MatX<S> att;                 // heads concatenated, pre-output-projection
        MatX<S> xhat2, rstd2;
        MatX<S> h_pre;  // mlp pre-activation
    };
    std::vector<LayerCache> layer;
    MatX<S> xhatf, rstdf;
    MatX<S> nf;  // final layernorm output (unembedding input)
};

// Causal decoder-only forward pass over a batch of B sequences of length L
// (tokens row-major, B*L entries). Returns logits as a (B*L) x vocab matrix.
// Pass a cache to enable backward().
template <typename S>
MatX<S> transformer_forward(const TransformerParams<S>& p, const std::vector<int>& tokens, int B,
                            int L, std::type_identity_t<ForwardCache<S>*> cache) {
    const TransformerConfig& cfg = p.cfg;
    if (B < 1 || L < 1) throw ConfigError("forward: empty batch");
    if (L > cfg.ctx_len)
        throw ConfigError("forward: sequence length " + std::to_string(L) + " exceeds ctx_len " +
                          std::to_string(cfg.ctx_len));
    if (tokens.size() != static_cast<std::size_t>(B) * L)
        throw ConfigError("forward: token count does not match B*L");
    for (int t : tokens)
        if (t < 0 || t >= cfg.vocab_size)
            throw ConfigError("forward: token id " + std::to_string(t) + " outside vocab");

    const int d = cfg.d_model, H = cfg.n_head, dh = cfg.head_dim();
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    const int rows = B * L;

    MatX<S> x(rows, d);
    for (int r = 0; r < rows; ++r)
        x.row(r) = p.wte.row(tokens[r]) + p.wpe.row(r % L);

    if (cache) {
        cache->B = B;
        cache->L = L;
        cache->tokens = tokens;
        cache->x0 = x;
        if (cache->layer.size() != static_cast<std::size_t>(cfg.n_layer))
            cache->layer.assign(cfg.n_layer, {});
    }

    ForwardCache<S> scratch;  // buffer reuse when no external cache is wanted
    if (!cache) scratch.layer.resize(1);
    MatX<S> n1, n2, att, o, h_act, m;
    for (int l = 0; l < cfg.n_layer; ++l) {
        const auto& W = p.layers[l];
        auto& lc = cache ? cache->layer[l] : scratch.layer[0];
        detail::layernorm_forward(x, W.ln1_g, W.ln1_b, lc.xhat1, lc.rstd1, n1);

        MatX<S>& q = lc.q;
        MatX<S>& k = lc.k;
        MatX<S>& v = lc.v;
        q.noalias() = n1 * W.wq;
        q.rowwise() += W.bq.row(0);
        k.noalias() = n1 * W.wk;
        k.rowwise() += W.bk.row(0);
        v.noalias() = n1 * W.wv;
        v.rowwise() += W.bv.row(0);

        att.resize(rows, d);
        lc.probs.resize(static_cast<std::size_t>(B) * H);
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < B; ++b)
            for (int h = 0; h < H; ++h) {
                const auto Q = q.block(b * L, h * dh, L, dh);
                const auto K = k.block(b * L, h * dh, L, dh);
                const auto V = v.block(b * L, h * dh, L, dh);
                MatX<S> sc(L, L);
                sc.noalias() = Q * K.transpose() * scale;
                MatX<S>& P = lc.probs[static_cast<std::size_t>(b) * H + h];
                P.setZero(L, L);
                for (int i = 0; i < L; ++i) {
                    auto row = sc.row(i).head(i + 1);
                    const S mx = row.maxCoeff();
                    P.row(i).head(i + 1) = (row.array() - mx).exp().matrix();
                    P.row(i).head(i + 1) /= P.row(i).head(i + 1).sum();
                }
                att.block(b * L, h * dh, L, dh).noalias() = P * V;
            }
        if (cache) lc.att = att;

        o.noalias() = att * W.wo;
        o.rowwise() += W.bo.row(0);
        MatX<S> x_mid = x + o;

        detail::layernorm_forward(x_mid, W.ln2_g, W.ln2_b, lc.xhat2, lc.rstd2, n2);

        MatX<S>& h_pre = lc.h_pre;
        h_pre.noalias() = n2 * W.w_fc;
        h_pre.rowwise() += W.b_fc.row(0);
        h_act = h_pre.unaryExpr([](S t) { return detail::gelu(t); });
        m.noalias() = h_act * W.w_proj;
        m.rowwise() += W.b_proj.row(0);

        x = x_mid + m;
    }

    MatX<S> nf, xhatf_local, rstdf_local;
    if (cache) {
        detail::layernorm_forward(x, p.lnf_g, p.lnf_b, cache->xhatf, cache->rstdf, nf);
        cache->nf = nf;
    } else {
        detail::layernorm_forward(x, p.lnf_g, p.lnf_b, xhatf_local, rstdf_local, nf);
    }
    MatX<S> logits;
    logits.noalias() = nf * p.wte.transpose();
    return logits;
}

// Mean next-token cross-entropy (natural log) over rows whose target is >= 0.
// When dlogits is non-null it receives d(loss)/d(logits).
template <typename S>
S cross_entropy(const MatX<S>& logits, const std::vector<int>& targets, MatX<S>* dlogits) {
    if (targets.size() != static_cast<std::size_t>(logits.rows()))
        throw ConfigError("loss: target count does not match logit rows");
    long n_contrib = 0;
    for (int t : targets)
        if (t >= 0) ++n_contrib;
    if (n_contrib == 0) throw ConfigError("loss: no unmasked targets");

    if (dlogits) dlogits->setZero(logits.rows(), logits.cols());
    double total = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        if (targets[r] < 0) continue;
        const auto row = logits.row(r);
        const S mx = row.maxCoeff();
        const auto shifted = (row.array() - mx);
        const S lse = std::log(shifted.exp().sum());
        total += static_cast<double>(lse - shifted(targets[r]));
        if (dlogits) {
            dlogits->row(r) = ((shifted - lse).exp() / static_cast<S>(n_contrib)).matrix();
            (*dlogits)(r, targets[r]) -= static_cast<S>(1) / static_cast<S>(n_contrib);
        }
    }
    return static_cast<S>(total / static_cast<double>(n_contrib));
}

// Exact reverse-mode gradients for every parameter. grads must be shaped like
// p (use TransformerParams::shaped); it is overwritten.
template <typename S>
void transformer_backward(const TransformerParams<S>& p, const ForwardCache<S>& cache,
                          const MatX<S>& dlogits, TransformerParams<S>& grads) {
    const TransformerConfig& cfg = p.cfg;
    const int B = cache.B, L = cache.L, d = cfg.d_model, H = cfg.n_head, dh = cfg.head_dim();
    const int rows = B * L;
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));

    grads.for_each([](const std::string&, MatX<S>& g) { g.setZero(); });

    // unembedding (tied): logits = nf * wte^T
    grads.wte.noalias() += dlogits.transpose() * cache.nf;
    MatX<S> dnf;
    dnf.noalias() = dlogits * p.wte;

    MatX<S> dx;
    detail::layernorm_backward(dnf, cache.xhatf, cache.rstdf, p.lnf_g, dx, grads.lnf_g,
                               grads.lnf_b);

    MatX<S> n1, n2, h_act, dh_act, dh_pre, dn2, dx_mid, datt, dq, dk, dv, dn1, dln;
    for (int l = cfg.n_layer - 1; l >= 0; --l) {
        const auto& W = p.layers[l];
        auto& G = grads.layers[l];
        const auto& lc = cache.layer[l];

        // mlp branch: dx flows into x_out = x_mid + m
        n2 = lc.xhat2;
        n2.array().rowwise() *= W.ln2_g.row(0).array();
        n2.rowwise() += W.ln2_b.row(0);
        h_act = lc.h_pre.unaryExpr([](S t) { return detail::gelu(t); });

        G.b_proj.row(0) += dx.colwise().sum();
        G.w_proj.noalias() += h_act.transpose() * dx;
        dh_act.noalias() = dx * W.w_proj.transpose();
        dh_pre = dh_act.cwiseProduct(lc.h_pre.unaryExpr([](S t) { return detail::gelu_grad(t); }));
        G.b_fc.row(0) += dh_pre.colwise().sum();
        G.w_fc.noalias() += n2.transpose() * dh_pre;
        dn2.noalias() = dh_pre * W.w_fc.transpose();

        detail::layernorm_backward(dn2, lc.xhat2, lc.rstd2, W.ln2_g, dx_mid, G.ln2_g, G.ln2_b);
        dx_mid += dx;  // residual

        // attention branch: x_mid = x_in + att * wo + bo
        G.bo.row(0) += dx_mid.colwise().sum();
        G.wo.noalias() += lc.att.transpose() * dx_mid;
        datt.noalias() = dx_mid * W.wo.transpose();

        dq.setZero(rows, d);
        dk.setZero(rows, d);
        dv.setZero(rows, d);
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < B; ++b)
            for (int h = 0; h < H; ++h) {
                const MatX<S>& P = lc.probs[static_cast<std::size_t>(b) * H + h];
                const auto dA = datt.block(b * L, h * dh, L, dh);
                const auto K = lc.k.block(b * L, h * dh, L, dh);
                const auto Q = lc.q.block(b * L, h * dh, L, dh);
                const auto V = lc.v.block(b * L, h * dh, L, dh);
                MatX<S> dP(L, L), dS(L, L);
                dP.noalias() = dA * V.transpose();
                dv.block(b * L, h * dh, L, dh).noalias() = P.transpose() * dA;
                dS.setZero();
                for (int i = 0; i < L; ++i) {
                    const auto Pi = P.row(i).head(i + 1);
                    const auto dPi = dP.row(i).head(i + 1);
                    const S dot = Pi.cwiseProduct(dPi).sum();
                    dS.row(i).head(i + 1) = (Pi.array() * (dPi.array() - dot)).matrix();
                }
                dq.block(b * L, h * dh, L, dh).noalias() = dS * K * scale;
                dk.block(b * L, h * dh, L, dh).noalias() = dS.transpose() * Q * scale;
            }

        n1 = lc.xhat1;
        n1.array().rowwise() *= W.ln1_g.row(0).array();
        n1.rowwise() += W.ln1_b.row(0);
        G.bq.row(0) += dq.colwise().sum();
        G.wq.noalias() += n1.transpose() * dq;
        G.bk.row(0) += dk.colwise().sum();
        G.wk.noalias() += n1.transpose() * dk;
        G.bv.row(0) += dv.colwise().sum();
        G.wv.noalias() += n1.transpose() * dv;
        dn1.noalias() = dq * W.wq.transpose();
        dn1.noalias() += dk * W.wk.transpose();
        dn1.noalias() += dv * W.wv.transpose();

        detail::layernorm_backward(dn1, lc.xhat1, lc.rstd1, W.ln1_g, dln, G.ln1_g, G.ln1_b);
        dx = dx_mid + dln;
    }

    for (int r = 0; r < rows; ++r) {
        grads.wte.row(cache.tokens[r]) += dx.row(r);
        grads.wpe.row(r % L) += dx.row(r);
    }
}

// Incremental single-token decoding with per-layer key/value caches.
// Produces logits identical (up to float associativity) to a full forward
// over the grown sequence.
template <typename S>
struct DecodeState {
    int len = 0;
    std::vector<MatX<S>> k_cache, v_cache;

    explicit DecodeState(const TransformerConfig& cfg) {
        k_cache.assign(cfg.n_layer, MatX<S>::Zero(cfg.ctx_len, cfg.d_model));
        v_cache.assign(cfg.n_layer, MatX<S>::Zero(cfg.ctx_len, cfg.d_model));
    }
};

template <typename S>
Eigen::Matrix<S, 1, Eigen::Dynamic> decode_step(const TransformerParams<S>& p,
                                                DecodeState<S>& st, int token) {
    const TransformerConfig& cfg = p.cfg;
    if (st.len >= cfg.ctx_len) throw ConfigError("decode: context window exhausted");
    if (token < 0 || token >= cfg.vocab_size)
        throw ConfigError("decode: token id outside vocab");
    const int d = cfg.d_model, H = cfg.n_head, dh = cfg.head_dim();
    const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    const int pos = st.len;

    MatX<S> x = p.wte.row(token) + p.wpe.row(pos);
    MatX<S> xhat, rstd, n1, n2, att(1, d);
    for (int l = 0; l < cfg.n_layer; ++l) {
        const auto& W = p.layers[l];
        detail::layernorm_forward(x, W.ln1_g, W.ln1_b, xhat, rstd, n1);
        MatX<S> q = n1 * W.wq + W.bq;
        st.k_cache[l].row(pos) = n1 * W.wk + W.bk;
        st.v_cache[l].row(pos) = n1 * W.wv + W.bv;
        for (int h = 0; h < H; ++h) {
            const auto K = st.k_cache[l].block(0, h * dh, pos + 1, dh);
            const auto V = st.v_cache[l].block(0, h * dh, pos + 1, dh);
            Eigen::Matrix<S, 1, Eigen::Dynamic> sc = q.row(0).segment(h * dh, dh) * K.transpose();
            sc *= scale;
            const S mx = sc.maxCoeff();
            Eigen::Matrix<S, 1, Eigen::Dynamic> w = (sc.array() - mx).exp().matrix();
            w /= w.sum();
            att.row(0).segment(h * dh, dh) = w * V;
        }
        MatX<S> x_mid = x + att * W.wo + W.bo;
        detail::layernorm_forward(x_mid, W.ln2_g, W.ln2_b, xhat, rstd, n2);
        MatX<S> h_pre = n2 * W.w_fc + W.b_fc;
        MatX<S> h_act = h_pre.unaryExpr([](S t) { return detail::gelu(t); });
        x = x_mid + h_act * W.w_proj + W.b_proj;
    }
    MatX<S> nf;
    detail::layernorm_forward(x, p.lnf_g, p.lnf_b, xhat, rstd, nf);
    ++st.len;
    return nf.row(0) * p.wte.transpose();
}

}  // namespace jgen
