#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <journeygen/adam.hpp>
#include <journeygen/rng.hpp>
#include <journeygen/transformer.hpp>
#include <vector>

using namespace jgen;

namespace {

TransformerConfig tiny_config() {
    TransformerConfig c;
    c.n_layer = 2;
    c.n_head = 2;
    c.d_model = 16;
    c.d_ff = 64;
    c.ctx_len = 16;
    c.vocab_size = 40;
    c.seed = 123;
    return c;
}

std::vector<int> random_tokens(int n, int vocab, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> toks(n);
    for (int& t : toks) t = static_cast<int>(rng.uniform_index(vocab));
    return toks;
}

std::vector<int> shifted_targets(const std::vector<int>& toks) {
    std::vector<int> tg(toks.size(), -1);
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) tg[i] = toks[i + 1];
    return tg;
}

}  // namespace

TEST_CASE("logit shape and length guard") {
    const auto params = TransformerParams<double>::init(tiny_config());
    const auto toks = random_tokens(7, 40, 1);
    const MatX<double> logits = transformer_forward(params, toks, 1, 7, nullptr);
    CHECK(logits.rows() == 7);
    CHECK(logits.cols() == 40);
    CHECK_THROWS(static_cast<void>(
        transformer_forward(params, random_tokens(17, 40, 2), 1, 17, nullptr)));
    CHECK_THROWS(static_cast<void>(transformer_forward(params, {41}, 1, 1, nullptr)));
}

TEST_CASE("causality: perturbing token j leaves logits before j bit-identical") {
    const auto params = TransformerParams<double>::init(tiny_config());
    std::vector<int> toks = random_tokens(12, 40, 3);
    const MatX<double> base = transformer_forward(params, toks, 1, 12, nullptr);
    toks[5] = (toks[5] + 7) % 40;
    const MatX<double> changed = transformer_forward(params, toks, 1, 12, nullptr);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 40; ++c) CHECK(base(r, c) == changed(r, c));
    // and the perturbed position itself must differ somewhere
    CHECK((base.row(5) - changed.row(5)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("attention rows are probability distributions") {
    const auto params = TransformerParams<double>::init(tiny_config());
    const auto toks = random_tokens(12, 40, 4);
    ForwardCache<double> cache;
    transformer_forward(params, toks, 1, 12, &cache);
    for (const auto& lc : cache.layer)
        for (const MatX<double>& P : lc.probs)
            for (int i = 0; i < P.rows(); ++i) {
                CHECK(P.row(i).head(i + 1).sum() == doctest::Approx(1.0).epsilon(1e-12));
                for (int j = i + 1; j < P.cols(); ++j) CHECK(P(i, j) == 0.0);
            }
}

// ---------------------------------------------------------------------------
// straight-line scalar oracle for a 1-layer block, no shared code with the
// implementation

namespace {

struct ScalarModel {
    int d, dh, H, V, L, ff;
    std::vector<std::vector<double>> wte, wpe, wq, wk, wv, wo, wfc, wproj;
    std::vector<double> bq, bk, bv, bo, bfc, bproj;
    std::vector<double> g1, b1, g2, b2, gf, bf;
};

std::vector<double> layernorm_scalar(const std::vector<double>& x, const std::vector<double>& g,
                                     const std::vector<double>& b) {
    const int d = static_cast<int>(x.size());
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= d;
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= d;
    const double rstd = 1.0 / std::sqrt(var + 1e-5);
    std::vector<double> y(d);
    for (int k = 0; k < d; ++k) y[k] = (x[k] - mu) * rstd * g[k] + b[k];
    return y;
}

double gelu_scalar(double x) {
    return 0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
}

std::vector<std::vector<double>> forward_scalar(const ScalarModel& m,
                                                const std::vector<int>& toks) {
    const int L = static_cast<int>(toks.size());
    std::vector<std::vector<double>> x(L, std::vector<double>(m.d));
    for (int i = 0; i < L; ++i)
        for (int k = 0; k < m.d; ++k) x[i][k] = m.wte[toks[i]][k] + m.wpe[i][k];

    std::vector<std::vector<double>> n1(L), q(L), kk(L), v(L);
    for (int i = 0; i < L; ++i) {
        n1[i] = layernorm_scalar(x[i], m.g1, m.b1);
        q[i].assign(m.d, 0.0);
        kk[i].assign(m.d, 0.0);
        v[i].assign(m.d, 0.0);
        for (int c = 0; c < m.d; ++c) {
            double sq = m.bq[c], sk = m.bk[c], sv = m.bv[c];
            for (int r = 0; r < m.d; ++r) {
                sq += n1[i][r] * m.wq[r][c];
                sk += n1[i][r] * m.wk[r][c];
                sv += n1[i][r] * m.wv[r][c];
            }
            q[i][c] = sq;
            kk[i][c] = sk;
            v[i][c] = sv;
        }
    }
    std::vector<std::vector<double>> att(L, std::vector<double>(m.d, 0.0));
    const double scale = 1.0 / std::sqrt(static_cast<double>(m.dh));
    for (int h = 0; h < m.H; ++h) {
        for (int i = 0; i < L; ++i) {
            std::vector<double> sc(i + 1);
            for (int j = 0; j <= i; ++j) {
                double s = 0.0;
                for (int c = 0; c < m.dh; ++c) s += q[i][h * m.dh + c] * kk[j][h * m.dh + c];
                sc[j] = s * scale;
            }
            double mx = sc[0];
            for (double s : sc) mx = std::max(mx, s);
            double Z = 0.0;
            for (double& s : sc) {
                s = std::exp(s - mx);
                Z += s;
            }
            for (int j = 0; j <= i; ++j)
                for (int c = 0; c < m.dh; ++c)
                    att[i][h * m.dh + c] += (sc[j] / Z) * v[j][h * m.dh + c];
        }
    }
    std::vector<std::vector<double>> x_mid(L, std::vector<double>(m.d));
    for (int i = 0; i < L; ++i)
        for (int c = 0; c < m.d; ++c) {
            double s = m.bo[c];
            for (int r = 0; r < m.d; ++r) s += att[i][r] * m.wo[r][c];
            x_mid[i][c] = x[i][c] + s;
        }
    std::vector<std::vector<double>> x_out(L, std::vector<double>(m.d));
    for (int i = 0; i < L; ++i) {
        const std::vector<double> n2 = layernorm_scalar(x_mid[i], m.g2, m.b2);
        std::vector<double> hexp(m.ff);
        for (int c = 0; c < m.ff; ++c) {
            double s = m.bfc[c];
            for (int r = 0; r < m.d; ++r) s += n2[r] * m.wfc[r][c];
            hexp[c] = gelu_scalar(s);
        }
        for (int c = 0; c < m.d; ++c) {
            double s = m.bproj[c];
            for (int r = 0; r < m.ff; ++r) s += hexp[r] * m.wproj[r][c];
            x_out[i][c] = x_mid[i][c] + s;
        }
    }
    std::vector<std::vector<double>> logits(L, std::vector<double>(m.V));
    for (int i = 0; i < L; ++i) {
        const std::vector<double> nf = layernorm_scalar(x_out[i], m.gf, m.bf);
        for (int t = 0; t < m.V; ++t) {
            double s = 0.0;
            for (int c = 0; c < m.d; ++c) s += nf[c] * m.wte[t][c];
            logits[i][t] = s;
        }
    }
    return logits;
}

}  // namespace

TEST_CASE("one-layer forward matches the scalar oracle") {
    TransformerConfig c;
    c.n_layer = 1;
    c.n_head = 2;
    c.d_model = 4;
    c.d_ff = 8;
    c.ctx_len = 8;
    c.vocab_size = 9;
    c.seed = 5;
    auto params = TransformerParams<double>::init(c);
    // hand-set weights: a fixed quasi-random pattern shared with the oracle
    long counter = 0;
    params.for_each([&](const std::string&, MatX<double>& mat) {
        for (Eigen::Index r = 0; r < mat.rows(); ++r)
            for (Eigen::Index cix = 0; cix < mat.cols(); ++cix)
                mat(r, cix) = 0.25 * std::sin(0.7 * static_cast<double>(++counter));
    });

    ScalarModel m;
    m.d = 4;
    m.H = 2;
    m.dh = 2;
    m.V = 9;
    m.ff = 8;
    const auto to_vv = [](const MatX<double>& a) {
        std::vector<std::vector<double>> out(a.rows(), std::vector<double>(a.cols()));
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index cc = 0; cc < a.cols(); ++cc) out[r][cc] = a(r, cc);
        return out;
    };
    const auto to_v = [](const MatX<double>& a) {
        return std::vector<double>(a.data(), a.data() + a.size());
    };
    m.wte = to_vv(params.wte);
    m.wpe = to_vv(params.wpe);
    const auto& W = params.layers[0];
    m.wq = to_vv(W.wq);
    m.wk = to_vv(W.wk);
    m.wv = to_vv(W.wv);
    m.wo = to_vv(W.wo);
    m.wfc = to_vv(W.w_fc);
    m.wproj = to_vv(W.w_proj);
    m.bq = to_v(W.bq);
    m.bk = to_v(W.bk);
    m.bv = to_v(W.bv);
    m.bo = to_v(W.bo);
    m.bfc = to_v(W.b_fc);
    m.bproj = to_v(W.b_proj);
    m.g1 = to_v(W.ln1_g);
    m.b1 = to_v(W.ln1_b);
    m.g2 = to_v(W.ln2_g);
    m.b2 = to_v(W.ln2_b);
    m.gf = to_v(params.lnf_g);
    m.bf = to_v(params.lnf_b);

    const std::vector<int> toks{3, 1, 4, 1, 5};
    const MatX<double> got = transformer_forward(params, toks, 1, 5, nullptr);
    const auto want = forward_scalar(m, toks);
    for (int i = 0; i < 5; ++i)
        for (int t = 0; t < 9; ++t)
            CHECK(got(i, t) == doctest::Approx(want[i][t]).epsilon(1e-10));
}

TEST_CASE("cross-entropy basics and scalar cross-check") {
    SUBCASE("uniform logits give ln V") {
        MatX<double> logits = MatX<double>::Zero(3, 40);
        const double loss = cross_entropy<double>(logits, {1, 2, 3}, nullptr);
        CHECK(loss == doctest::Approx(std::log(40.0)).epsilon(1e-12));
    }
    SUBCASE("one-hot-correct logits with margin drive loss to zero") {
        MatX<double> logits = MatX<double>::Zero(2, 10);
        logits(0, 3) = 50.0;
        logits(1, 7) = 50.0;
        CHECK(cross_entropy<double>(logits, {3, 7}, nullptr) < 1e-12);
    }
    SUBCASE("random case vs direct summation") {
        Rng rng(8);
        MatX<double> logits(4, 12);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 12; ++c) logits(r, c) = rng.uniform(-3.0, 3.0);
        const std::vector<int> targets{5, -1, 0, 11};
        double want = 0.0;
        int n = 0;
        for (int r = 0; r < 4; ++r) {
            if (targets[r] < 0) continue;
            double Z = 0.0;
            for (int c = 0; c < 12; ++c) Z += std::exp(logits(r, c));
            want += -std::log(std::exp(logits(r, targets[r])) / Z);
            ++n;
        }
        want /= n;
        CHECK(cross_entropy<double>(logits, targets, nullptr) ==
              doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("gradient check: analytic vs central differences over every group") {
    const TransformerConfig cfg = tiny_config();
    auto params = TransformerParams<double>::init(cfg);
    const std::vector<int> toks = random_tokens(12, cfg.vocab_size, 77);
    const std::vector<int> targets = shifted_targets(toks);

    ForwardCache<double> cache;
    const MatX<double> logits = transformer_forward(params, toks, 1, 12, &cache);
    MatX<double> dlogits;
    cross_entropy<double>(logits, targets, &dlogits);
    auto grads = TransformerParams<double>::shaped(cfg);
    transformer_backward(params, cache, dlogits, grads);

    const auto loss_at = [&]() {
        const MatX<double> lg = transformer_forward(params, toks, 1, 12, nullptr);
        return static_cast<double>(cross_entropy<double>(lg, targets, nullptr));
    };

    auto p_tensors = params.tensor_list();
    auto g_tensors = grads.tensor_list();
    const double h = 1e-4;
    double max_rel = 0.0;
    long checked = 0;
    Rng rng(31337);
    for (std::size_t t = 0; t < p_tensors.size(); ++t) {
        MatX<double>& P = *p_tensors[t];
        const MatX<double>& G = *g_tensors[t];
        for (int pick = 0; pick < 6; ++pick) {
            const Eigen::Index r = static_cast<Eigen::Index>(rng.uniform_index(P.rows()));
            const Eigen::Index c = static_cast<Eigen::Index>(rng.uniform_index(P.cols()));
            const double orig = P(r, c);
            P(r, c) = orig + h;
            const double lp = loss_at();
            P(r, c) = orig - h;
            const double lm = loss_at();
            P(r, c) = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = G(r, c);
            // |a|+|f| floor keeps near-zero coordinates on an absolute scale
            const double rel = std::abs(an - fd) / std::max(std::abs(an) + std::abs(fd), 1e-3);
            max_rel = std::max(max_rel, rel);
            ++checked;
        }
    }
    CHECK(checked >= 200);
    CHECK(max_rel < 1e-5);

    bool finite = true;
    grads.for_each([&](const std::string&, const MatX<double>& g) { finite &= g.allFinite(); });
    CHECK(finite);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
    const TransformerConfig cfg = tiny_config();
    auto params = TransformerParams<double>::init(cfg);
    auto before = params;
    auto grads = TransformerParams<double>::shaped(cfg);
    auto st = AdamState<double>::shaped(cfg);
    adam_step(params, grads, st, AdamConfig{});
    bool same = true;
    auto a = params.tensor_list();
    auto b = before.tensor_list();
    for (std::size_t i = 0; i < a.size(); ++i) same = same && (*a[i] == *b[i]);
    CHECK(same);
    CHECK(st.step == 1);
}

TEST_CASE("adam: first step magnitude is about lr and 10 steps match a scalar oracle") {
    const TransformerConfig cfg = tiny_config();
    auto params = TransformerParams<double>::init(cfg);
    const double start = params.wte(0, 0);
    auto grads = TransformerParams<double>::shaped(cfg);
    auto st = AdamState<double>::shaped(cfg);
    const AdamConfig ac;

    // scalar reference for a constant unit gradient
    double m = 0.0, v = 0.0, x = start;
    for (int t = 1; t <= 10; ++t) {
        m = ac.beta1 * m + (1 - ac.beta1) * 1.0;
        v = ac.beta2 * v + (1 - ac.beta2) * 1.0;
        const double mhat = m / (1 - std::pow(ac.beta1, t));
        const double vhat = v / (1 - std::pow(ac.beta2, t));
        x -= ac.lr * mhat / (std::sqrt(vhat) + ac.eps);
    }

    double first_delta = 0.0;
    for (int t = 0; t < 10; ++t) {
        grads.wte(0, 0) = 1.0;
        adam_step(params, grads, st, ac);
        if (t == 0) first_delta = start - params.wte(0, 0);
    }
    CHECK(first_delta == doctest::Approx(ac.lr).epsilon(1e-6));
    CHECK(params.wte(0, 0) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("adam rejects non-finite gradients") {
    const TransformerConfig cfg = tiny_config();
    auto params = TransformerParams<double>::init(cfg);
    auto grads = TransformerParams<double>::shaped(cfg);
    grads.wte(0, 0) = std::numeric_limits<double>::quiet_NaN();
    auto st = AdamState<double>::shaped(cfg);
    CHECK_THROWS_AS(adam_step(params, grads, st, AdamConfig{}), TrainingDivergenceError);
}

TEST_CASE("initialization is deterministic and parameter count matches the formula") {
    const TransformerConfig cfg = tiny_config();
    auto a = TransformerParams<double>::init(cfg);
    auto b = TransformerParams<double>::init(cfg);
    CHECK(a.count() == cfg.param_count());
    auto ta = a.tensor_list();
    auto tb = b.tensor_list();
    bool same = true;
    for (std::size_t i = 0; i < ta.size(); ++i) same = same && (*ta[i] == *tb[i]);
    CHECK(same);
}

TEST_CASE("incremental decoding matches the full forward pass") {
    const TransformerConfig cfg = tiny_config();
    const auto params = TransformerParams<double>::init(cfg);
    const std::vector<int> toks = random_tokens(16, cfg.vocab_size, 15);
    const MatX<double> full = transformer_forward(params, toks, 1, 16, nullptr);
    DecodeState<double> st(cfg);
    for (int i = 0; i < 16; ++i) {
        const auto row = decode_step(params, st, toks[i]);
        for (int t = 0; t < cfg.vocab_size; ++t)
            CHECK(row(0, t) == doctest::Approx(full(i, t)).epsilon(1e-9));
    }
    // the window is full now
    CHECK_THROWS(static_cast<void>(decode_step(params, st, 0)));
}
