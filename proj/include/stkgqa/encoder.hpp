#pragma once

#include <cstdint>
#include <vector>

namespace stkgqa {

// Small trainable sequence encoder: learned token embeddings plus sinusoidal
// positions feeding a pre-norm transformer stack (default 2 layers, 4 heads).
// Token states at special-token positions are overwritten with projected
// knowledge-graph vectors before the attention stack; the question vector is
// the mean of the final-layer states.
struct EncoderConfig {
    size_t vocab = 0;
    size_t dim = 64;       // model width; equals the KG embedding dimension
    size_t layers = 2;
    size_t heads = 4;
    size_t ff_hidden = 0;  // 0 selects 4*dim
    size_t max_len = 128;

    size_t ff() const { return ff_hidden == 0 ? 4 * dim : ff_hidden; }
};

// Offsets into one flat parameter vector; keeping every weight in a single
// buffer makes the optimizer and the gradient check trivial.
struct EncoderLayout {
    struct Layer {
        size_t wq, bq, wk, bk, wv, bv, wo, bo;
        size_t ln1_g, ln1_b, ln2_g, ln2_b;
        size_t w1, b1, w2, b2;
    };
    size_t token_embed = 0;
    size_t slot_proj = 0;  // dim x 2*dim
    std::vector<Layer> layers;
    size_t lnf_g = 0, lnf_b = 0;
    size_t total = 0;
};

EncoderLayout encoder_layout(const EncoderConfig& cfg);

struct EncoderParams {
    EncoderConfig cfg;
    EncoderLayout layout;
    std::vector<double> flat;

    explicit EncoderParams(const EncoderConfig& c);
    EncoderParams() = default;

    double* at(size_t offset) { return flat.data() + offset; }
    const double* at(size_t offset) const { return flat.data() + offset; }
};

// Deterministic initialization (weights ~ N(0, 1/sqrt(fan_in)), LayerNorm
// gain 1, biases 0).
void init_encoder(EncoderParams& p, uint64_t seed);

// A KG vector injected at one token position, packed [re..., im...] of
// length 2*dim.
struct SlotInjection {
    size_t pos = 0;
    std::vector<double> packed;
};

// Opaque forward activations kept for the backward pass.
struct EncoderCache;

std::vector<double> encoder_forward(const EncoderParams& p, const std::vector<uint32_t>& tokens,
                                    const std::vector<SlotInjection>& slots,
                                    EncoderCache* cache = nullptr);

// Accumulates d(loss)/d(params) into grad (same length as p.flat) given
// d(loss)/d(question vector).
void encoder_backward(const EncoderParams& p, const EncoderCache& cache,
                      const std::vector<double>& d_question, std::vector<double>& grad);

EncoderCache* encoder_cache_new();
void encoder_cache_free(EncoderCache*);

// RAII wrapper for the cache.
class EncoderScratch {
public:
    EncoderScratch() : cache_(encoder_cache_new()) {}
    ~EncoderScratch() { encoder_cache_free(cache_); }
    EncoderScratch(const EncoderScratch&) = delete;
    EncoderScratch& operator=(const EncoderScratch&) = delete;
    EncoderCache* get() { return cache_; }

private:
    EncoderCache* cache_;
};

}  // namespace stkgqa
