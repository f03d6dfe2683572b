#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stkgqa/encoder.hpp"
#include "stkgqa/rng.hpp"

using namespace stkgqa;

namespace {

EncoderConfig small_config() {
    EncoderConfig cfg;
    cfg.vocab = 12;
    cfg.dim = 8;
    cfg.layers = 2;
    cfg.heads = 2;
    cfg.ff_hidden = 16;
    cfg.max_len = 16;
    return cfg;
}

std::vector<double> random_packed(Rng& rng, size_t dim) {
    std::vector<double> v(2 * dim);
    for (double& x : v) x = rng.next_normal();
    return v;
}

}  // namespace

TEST_CASE("forward is deterministic and slot injection is effectual") {
    EncoderParams p(small_config());
    init_encoder(p, 7);
    std::vector<uint32_t> tokens{1, 4, 2, 9, 3};
    Rng rng(3);
    std::vector<SlotInjection> slots{{1, random_packed(rng, p.cfg.dim)}};

    auto q1 = encoder_forward(p, tokens, slots);
    auto q2 = encoder_forward(p, tokens, slots);
    CHECK(q1 == q2);

    auto slots2 = slots;
    slots2[0].packed[0] += 0.5;
    auto q3 = encoder_forward(p, tokens, slots2);
    double max_diff = 0.0;
    for (size_t i = 0; i < q1.size(); ++i) max_diff = std::max(max_diff, std::abs(q1[i] - q3[i]));
    CHECK(max_diff > 1e-6);

    auto q4 = encoder_forward(p, tokens, {});
    max_diff = 0.0;
    for (size_t i = 0; i < q1.size(); ++i) max_diff = std::max(max_diff, std::abs(q1[i] - q4[i]));
    CHECK(max_diff > 1e-6);
}

TEST_CASE("encoder backward matches central finite differences") {
    EncoderParams p(small_config());
    init_encoder(p, 11);
    std::vector<uint32_t> tokens{5, 1, 7, 2, 0, 3};
    Rng rng(13);
    std::vector<SlotInjection> slots{{0, random_packed(rng, p.cfg.dim)},
                                     {3, random_packed(rng, p.cfg.dim)}};

    // Scalar loss: fixed random linear functional of the question vector.
    std::vector<double> probe(p.cfg.dim);
    for (double& x : probe) x = rng.next_normal();
    auto loss_of = [&](const EncoderParams& params) {
        auto q = encoder_forward(params, tokens, slots);
        double s = 0.0;
        for (size_t i = 0; i < q.size(); ++i) s += probe[i] * q[i];
        return s;
    };

    EncoderScratch cache;
    encoder_forward(p, tokens, slots, cache.get());
    std::vector<double> grad(p.flat.size(), 0.0);
    encoder_backward(p, *cache.get(), probe, grad);

    const double eps = 1e-5;
    size_t checked = 0;
    // Every parameter: the model is small enough to brute-force.
    for (size_t i = 0; i < p.flat.size(); ++i) {
        double saved = p.flat[i];
        p.flat[i] = saved + eps;
        double up = loss_of(p);
        p.flat[i] = saved - eps;
        double dn = loss_of(p);
        p.flat[i] = saved;
        double numeric = (up - dn) / (2.0 * eps);
        double denom = std::max({1e-6, std::abs(numeric), std::abs(grad[i])});
        CHECK(std::abs(numeric - grad[i]) / denom < 1e-4);
        ++checked;
    }
    CHECK(checked == p.flat.size());

    // Token embeddings at slot positions are fully overwritten, so they must
    // receive no gradient; tokens 5 and 2 appear only under slots.
    const size_t d = p.cfg.dim;
    for (size_t j = 0; j < d; ++j) {
        CHECK(grad[p.layout.token_embed + 5 * d + j] == 0.0);
        CHECK(grad[p.layout.token_embed + 2 * d + j] == 0.0);
    }
}

TEST_CASE("encoder rejects malformed input") {
    EncoderParams p(small_config());
    init_encoder(p, 1);
    CHECK_THROWS(encoder_forward(p, {}, {}));
    CHECK_THROWS(encoder_forward(p, {99}, {}));
    CHECK_THROWS(encoder_forward(p, {1, 2}, {{5, std::vector<double>(16, 0.0)}}));
    CHECK_THROWS(encoder_forward(p, {1, 2}, {{0, std::vector<double>(3, 0.0)}}));
}
