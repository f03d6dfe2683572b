#include "stkgqa/encoder.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "stkgqa/kernels.hpp"
#include "stkgqa/rng.hpp"

namespace stkgqa {

namespace {
constexpr double kLnEps = 1e-5;
}

EncoderLayout encoder_layout(const EncoderConfig& cfg) {
    EncoderLayout lay;
    size_t off = 0;
    auto take = [&](size_t n) {
        size_t at = off;
        off += n;
        return at;
    };
    const size_t d = cfg.dim, ff = cfg.ff();
    lay.token_embed = take(cfg.vocab * d);
    lay.slot_proj = take(d * 2 * d);
    lay.layers.resize(cfg.layers);
    for (auto& L : lay.layers) {
        L.ln1_g = take(d);
        L.ln1_b = take(d);
        L.wq = take(d * d);
        L.bq = take(d);
        L.wk = take(d * d);
        L.bk = take(d);
        L.wv = take(d * d);
        L.bv = take(d);
        L.wo = take(d * d);
        L.bo = take(d);
        L.ln2_g = take(d);
        L.ln2_b = take(d);
        L.w1 = take(d * ff);
        L.b1 = take(ff);
        L.w2 = take(ff * d);
        L.b2 = take(d);
    }
    lay.lnf_g = take(d);
    lay.lnf_b = take(d);
    lay.total = off;
    return lay;
}

EncoderParams::EncoderParams(const EncoderConfig& c)
    : cfg(c), layout(encoder_layout(c)), flat(layout.total, 0.0) {
    if (c.dim % c.heads != 0)
        throw std::invalid_argument("encoder dim must be divisible by heads");
}

void init_encoder(EncoderParams& p, uint64_t seed) {
    const size_t d = p.cfg.dim, ff = p.cfg.ff();
    Rng rng(Rng::derive(seed, 0xE2C0DE));
    auto fill = [&](size_t off, size_t n, double stddev) {
        for (size_t i = 0; i < n; ++i) p.flat[off + i] = rng.next_normal() * stddev;
    };
    auto ones = [&](size_t off, size_t n) {
        for (size_t i = 0; i < n; ++i) p.flat[off + i] = 1.0;
    };
    fill(p.layout.token_embed, p.cfg.vocab * d, 1.0 / std::sqrt(static_cast<double>(d)));
    fill(p.layout.slot_proj, d * 2 * d, 1.0 / std::sqrt(2.0 * static_cast<double>(d)));
    for (const auto& L : p.layout.layers) {
        ones(L.ln1_g, d);
        ones(L.ln2_g, d);
        const double wstd = 1.0 / std::sqrt(static_cast<double>(d));
        fill(L.wq, d * d, wstd);
        fill(L.wk, d * d, wstd);
        fill(L.wv, d * d, wstd);
        fill(L.wo, d * d, wstd);
        fill(L.w1, d * ff, wstd);
        fill(L.w2, ff * d, 1.0 / std::sqrt(static_cast<double>(ff)));
    }
    ones(p.layout.lnf_g, d);
}

namespace {

// Serial mat helpers; encoder matrices are tiny and the real parallelism sits
// at the question/entity level.
void mm(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    kernels::matmul_ref(a, b, c, m, k, n);
}

void add_bias_rows(double* x, const double* b, size_t rows, size_t cols) {
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) x[r * cols + c] += b[c];
}

struct LnCache {
    std::vector<double> xhat;  // rows x dim
    std::vector<double> rstd;  // rows
};

void layernorm_forward(const double* x, const double* g, const double* b, double* y, size_t rows,
                       size_t d, LnCache& cache) {
    cache.xhat.resize(rows * d);
    cache.rstd.resize(rows);
    for (size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * d;
        double mean = 0.0;
        for (size_t i = 0; i < d; ++i) mean += xr[i];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (size_t i = 0; i < d; ++i) {
            double c = xr[i] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        double rstd = 1.0 / std::sqrt(var + kLnEps);
        cache.rstd[r] = rstd;
        for (size_t i = 0; i < d; ++i) {
            double xh = (xr[i] - mean) * rstd;
            cache.xhat[r * d + i] = xh;
            y[r * d + i] = g[i] * xh + b[i];
        }
    }
}

void layernorm_backward(const double* dy, const double* g, const LnCache& cache, double* dx,
                        double* dg, double* db, size_t rows, size_t d) {
    for (size_t r = 0; r < rows; ++r) {
        const double* dyr = dy + r * d;
        const double* xh = cache.xhat.data() + r * d;
        double sum_dyg = 0.0, sum_dyg_xh = 0.0;
        for (size_t i = 0; i < d; ++i) {
            double v = dyr[i] * g[i];
            sum_dyg += v;
            sum_dyg_xh += v * xh[i];
            dg[i] += dyr[i] * xh[i];
            db[i] += dyr[i];
        }
        const double inv_d = 1.0 / static_cast<double>(d);
        for (size_t i = 0; i < d; ++i) {
            double v = dyr[i] * g[i];
            dx[r * d + i] += cache.rstd[r] * (v - sum_dyg * inv_d - xh[i] * sum_dyg_xh * inv_d);
        }
    }
}

struct LayerCache {
    std::vector<double> x_in;    // residual input
    std::vector<double> a;       // LN1 output
    std::vector<double> q, k, v; // projections
    std::vector<double> attn;    // heads x L x L probabilities
    std::vector<double> h;       // concatenated head outputs
    std::vector<double> x_mid;   // after attention residual
    std::vector<double> b;       // LN2 output
    std::vector<double> f1;      // pre-relu
    std::vector<double> f1r;     // post-relu
    LnCache ln1, ln2;
};

}  // namespace

struct EncoderCache {
    size_t len = 0;
    std::vector<uint32_t> tokens;
    std::vector<SlotInjection> slots;
    std::vector<double> x0;
    std::vector<LayerCache> layers;
    std::vector<double> x_final;  // pre-final-LN
    std::vector<double> y;        // post-final-LN
    LnCache lnf;
};

EncoderCache* encoder_cache_new() { return new EncoderCache(); }
void encoder_cache_free(EncoderCache* c) { delete c; }

std::vector<double> encoder_forward(const EncoderParams& p, const std::vector<uint32_t>& tokens,
                                    const std::vector<SlotInjection>& slots,
                                    EncoderCache* cache) {
    const size_t L = tokens.size();
    const size_t d = p.cfg.dim, H = p.cfg.heads, dh = d / H, ff = p.cfg.ff();
    if (L == 0) throw std::invalid_argument("cannot encode an empty token sequence");
    if (L > p.cfg.max_len) throw std::invalid_argument("sequence longer than max_len");

    EncoderScratch local;
    EncoderCache& c = cache ? *cache : *local.get();
    c.len = L;
    c.tokens = tokens;
    c.slots = slots;

    // Token embedding + sinusoidal position.
    c.x0.assign(L * d, 0.0);
    for (size_t i = 0; i < L; ++i) {
        if (tokens[i] >= p.cfg.vocab) throw std::invalid_argument("token id out of range");
        const double* emb = p.at(p.layout.token_embed + tokens[i] * d);
        double* row = c.x0.data() + i * d;
        std::memcpy(row, emb, d * sizeof(double));
        for (size_t j = 0; j < d; j += 2) {
            double angle = static_cast<double>(i) /
                           std::pow(10000.0, static_cast<double>(j) / static_cast<double>(d));
            row[j] += std::sin(angle);
            if (j + 1 < d) row[j + 1] += std::cos(angle);
        }
    }
    // Slot overwrite: projected KG vector replaces the token state entirely.
    for (const auto& s : slots) {
        if (s.pos >= L) throw std::invalid_argument("slot position out of range");
        if (s.packed.size() != 2 * d) throw std::invalid_argument("slot vector width mismatch");
        double* row = c.x0.data() + s.pos * d;
        kernels::matvec_ref(p.at(p.layout.slot_proj), d, 2 * d, s.packed.data(), row);
    }

    std::vector<double> x = c.x0;
    c.layers.assign(p.cfg.layers, LayerCache{});
    std::vector<double> qh(L * d), scores(L * L);

    for (size_t li = 0; li < p.cfg.layers; ++li) {
        const auto& W = p.layout.layers[li];
        LayerCache& lc = c.layers[li];
        lc.x_in = x;

        lc.a.assign(L * d, 0.0);
        layernorm_forward(x.data(), p.at(W.ln1_g), p.at(W.ln1_b), lc.a.data(), L, d, lc.ln1);

        lc.q.assign(L * d, 0.0);
        lc.k.assign(L * d, 0.0);
        lc.v.assign(L * d, 0.0);
        mm(lc.a.data(), p.at(W.wq), lc.q.data(), L, d, d);
        add_bias_rows(lc.q.data(), p.at(W.bq), L, d);
        mm(lc.a.data(), p.at(W.wk), lc.k.data(), L, d, d);
        add_bias_rows(lc.k.data(), p.at(W.bk), L, d);
        mm(lc.a.data(), p.at(W.wv), lc.v.data(), L, d, d);
        add_bias_rows(lc.v.data(), p.at(W.bv), L, d);

        lc.attn.assign(H * L * L, 0.0);
        lc.h.assign(L * d, 0.0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        for (size_t h = 0; h < H; ++h) {
            double* probs = lc.attn.data() + h * L * L;
            for (size_t i = 0; i < L; ++i) {
                const double* qi = lc.q.data() + i * d + h * dh;
                for (size_t j = 0; j < L; ++j) {
                    const double* kj = lc.k.data() + j * d + h * dh;
                    double s = 0.0;
                    for (size_t t = 0; t < dh; ++t) s += qi[t] * kj[t];
                    probs[i * L + j] = s * scale;
                }
                kernels::softmax_inplace(probs + i * L, L);
                double* out = lc.h.data() + i * d + h * dh;
                for (size_t j = 0; j < L; ++j) {
                    const double pij = probs[i * L + j];
                    const double* vj = lc.v.data() + j * d + h * dh;
                    for (size_t t = 0; t < dh; ++t) out[t] += pij * vj[t];
                }
            }
        }

        // Output projection + residual.
        qh.assign(L * d, 0.0);
        mm(lc.h.data(), p.at(W.wo), qh.data(), L, d, d);
        add_bias_rows(qh.data(), p.at(W.bo), L, d);
        lc.x_mid.resize(L * d);
        for (size_t i = 0; i < L * d; ++i) lc.x_mid[i] = x[i] + qh[i];

        lc.b.assign(L * d, 0.0);
        layernorm_forward(lc.x_mid.data(), p.at(W.ln2_g), p.at(W.ln2_b), lc.b.data(), L, d,
                          lc.ln2);
        lc.f1.assign(L * ff, 0.0);
        mm(lc.b.data(), p.at(W.w1), lc.f1.data(), L, d, ff);
        add_bias_rows(lc.f1.data(), p.at(W.b1), L, ff);
        lc.f1r = lc.f1;
        for (double& vv : lc.f1r) vv = vv > 0.0 ? vv : 0.0;

        qh.assign(L * d, 0.0);
        mm(lc.f1r.data(), p.at(W.w2), qh.data(), L, ff, d);
        add_bias_rows(qh.data(), p.at(W.b2), L, d);
        x.resize(L * d);
        for (size_t i = 0; i < L * d; ++i) x[i] = lc.x_mid[i] + qh[i];
    }

    c.x_final = x;
    c.y.assign(L * d, 0.0);
    layernorm_forward(x.data(), p.at(p.layout.lnf_g), p.at(p.layout.lnf_b), c.y.data(), L, d,
                      c.lnf);

    std::vector<double> question(d, 0.0);
    for (size_t i = 0; i < L; ++i)
        for (size_t j = 0; j < d; ++j) question[j] += c.y[i * d + j];
    const double inv = 1.0 / static_cast<double>(L);
    for (double& vv : question) vv *= inv;
    return question;
}

void encoder_backward(const EncoderParams& p, const EncoderCache& c,
                      const std::vector<double>& d_question, std::vector<double>& grad) {
    const size_t L = c.len;
    const size_t d = p.cfg.dim, H = p.cfg.heads, dh = d / H, ff = p.cfg.ff();
    if (grad.size() != p.flat.size()) throw std::invalid_argument("gradient buffer size mismatch");

    // Mean pool: every final state receives d_question / L.
    std::vector<double> dy(L * d);
    const double inv = 1.0 / static_cast<double>(L);
    for (size_t i = 0; i < L; ++i)
        for (size_t j = 0; j < d; ++j) dy[i * d + j] = d_question[j] * inv;

    std::vector<double> dx(L * d, 0.0);
    layernorm_backward(dy.data(), p.at(p.layout.lnf_g), c.lnf, dx.data(),
                       grad.data() + p.layout.lnf_g, grad.data() + p.layout.lnf_b, L, d);

    std::vector<double> d_mid(L * d), db(L * d), df1r(L * ff), df1(L * ff), scratch(L * d);
    std::vector<double> dh_buf(L * d), dq(L * d), dk(L * d), dv(L * d), da(L * d);

    for (size_t li = p.cfg.layers; li-- > 0;) {
        const auto& W = p.layout.layers[li];
        const LayerCache& lc = c.layers[li];

        // FFN residual: x_out = x_mid + relu(LN2(x_mid) W1 + b1) W2 + b2
        d_mid = dx;  // residual branch
        // dW2 += f1r^T dx ; df1r = dx W2^T
        scratch.assign(ff * d, 0.0);
        kernels::matmul_at_b_ref(lc.f1r.data(), dx.data(), scratch.data(), ff, L, d);
        for (size_t i = 0; i < ff * d; ++i) grad[W.w2 + i] += scratch[i];
        for (size_t i = 0; i < L; ++i)
            for (size_t j = 0; j < d; ++j) grad[W.b2 + j] += dx[i * d + j];
        df1r.assign(L * ff, 0.0);
        kernels::matmul_a_bt_ref(dx.data(), p.at(W.w2), df1r.data(), L, d, ff);
        df1.assign(L * ff, 0.0);
        for (size_t i = 0; i < L * ff; ++i) df1[i] = lc.f1[i] > 0.0 ? df1r[i] : 0.0;
        // dW1 += b^T df1 ; db_b = df1 W1^T
        scratch.assign(d * ff, 0.0);
        kernels::matmul_at_b_ref(lc.b.data(), df1.data(), scratch.data(), d, L, ff);
        for (size_t i = 0; i < d * ff; ++i) grad[W.w1 + i] += scratch[i];
        for (size_t i = 0; i < L; ++i)
            for (size_t j = 0; j < ff; ++j) grad[W.b1 + j] += df1[i * ff + j];
        db.assign(L * d, 0.0);
        kernels::matmul_a_bt_ref(df1.data(), p.at(W.w1), db.data(), L, ff, d);
        layernorm_backward(db.data(), p.at(W.ln2_g), lc.ln2, d_mid.data(),
                           grad.data() + W.ln2_g, grad.data() + W.ln2_b, L, d);

        // Attention residual: x_mid = x_in + (heads(LN1(x_in))) Wo + bo
        dx = d_mid;  // residual branch to x_in
        dh_buf.assign(L * d, 0.0);
        scratch.assign(d * d, 0.0);
        kernels::matmul_at_b_ref(lc.h.data(), d_mid.data(), scratch.data(), d, L, d);
        for (size_t i = 0; i < d * d; ++i) grad[W.wo + i] += scratch[i];
        for (size_t i = 0; i < L; ++i)
            for (size_t j = 0; j < d; ++j) grad[W.bo + j] += d_mid[i * d + j];
        kernels::matmul_a_bt_ref(d_mid.data(), p.at(W.wo), dh_buf.data(), L, d, d);

        dq.assign(L * d, 0.0);
        dk.assign(L * d, 0.0);
        dv.assign(L * d, 0.0);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        std::vector<double> dprob(L), ds(L);
        for (size_t h = 0; h < H; ++h) {
            const double* probs = lc.attn.data() + h * L * L;
            for (size_t i = 0; i < L; ++i) {
                const double* dhi = dh_buf.data() + i * d + h * dh;
                // dV and dP
                for (size_t j = 0; j < L; ++j) {
                    const double pij = probs[i * L + j];
                    double* dvj = dv.data() + j * d + h * dh;
                    const double* vj = lc.v.data() + j * d + h * dh;
                    double acc = 0.0;
                    for (size_t t = 0; t < dh; ++t) {
                        dvj[t] += pij * dhi[t];
                        acc += dhi[t] * vj[t];
                    }
                    dprob[j] = acc;
                }
                // softmax backward
                double dot = 0.0;
                for (size_t j = 0; j < L; ++j) dot += dprob[j] * probs[i * L + j];
                for (size_t j = 0; j < L; ++j)
                    ds[j] = probs[i * L + j] * (dprob[j] - dot) * scale;
                // dQ_i += ds_j K_j ; dK_j += ds_j Q_i
                double* dqi = dq.data() + i * d + h * dh;
                const double* qi = lc.q.data() + i * d + h * dh;
                for (size_t j = 0; j < L; ++j) {
                    const double* kj = lc.k.data() + j * d + h * dh;
                    double* dkj = dk.data() + j * d + h * dh;
                    for (size_t t = 0; t < dh; ++t) {
                        dqi[t] += ds[j] * kj[t];
                        dkj[t] += ds[j] * qi[t];
                    }
                }
            }
        }

        da.assign(L * d, 0.0);
        auto proj_backward = [&](const std::vector<double>& dout, size_t w_off, size_t b_off) {
            scratch.assign(d * d, 0.0);
            kernels::matmul_at_b_ref(lc.a.data(), dout.data(), scratch.data(), d, L, d);
            for (size_t i = 0; i < d * d; ++i) grad[w_off + i] += scratch[i];
            for (size_t i = 0; i < L; ++i)
                for (size_t j = 0; j < d; ++j) grad[b_off + j] += dout[i * d + j];
            std::vector<double> dtmp(L * d, 0.0);
            kernels::matmul_a_bt_ref(dout.data(), p.at(w_off), dtmp.data(), L, d, d);
            for (size_t i = 0; i < L * d; ++i) da[i] += dtmp[i];
        };
        proj_backward(dq, W.wq, W.bq);
        proj_backward(dk, W.wk, W.bk);
        proj_backward(dv, W.wv, W.bv);

        layernorm_backward(da.data(), p.at(W.ln1_g), lc.ln1, dx.data(), grad.data() + W.ln1_g,
                           grad.data() + W.ln1_b, L, d);
    }

    // Input layer: slot positions feed the projection, everything else the
    // token embedding. Positions are fixed.
    std::vector<bool> is_slot(L, false);
    for (const auto& s : c.slots) {
        is_slot[s.pos] = true;
        const double* drow = dx.data() + s.pos * d;
        double* gproj = grad.data() + p.layout.slot_proj;
        for (size_t r = 0; r < d; ++r)
            for (size_t cix = 0; cix < 2 * d; ++cix)
                gproj[r * 2 * d + cix] += drow[r] * s.packed[cix];
    }
    for (size_t i = 0; i < L; ++i) {
        if (is_slot[i]) continue;
        double* gtok = grad.data() + p.layout.token_embed + c.tokens[i] * d;
        const double* drow = dx.data() + i * d;
        for (size_t j = 0; j < d; ++j) gtok[j] += drow[j];
    }
}

}  // namespace stkgqa
