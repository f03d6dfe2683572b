#include "stkgqa/question.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stkgqa/kernels.hpp"
#include "stkgqa/packed.hpp"
#include "stkgqa/rng.hpp"

namespace stkgqa {

std::string entity_label(const std::string& id) {
    std::string label = id;
    std::replace(label.begin(), label.end(), '_', ' ');
    return label;
}

std::vector<std::string> tokenize_text(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (char ch : text) {
        unsigned char u = static_cast<unsigned char>(ch);
        if (std::isspace(u)) {
            flush();
        } else if (std::isalnum(u) || u >= 0x80 || ch == '[' || ch == ']' || ch == '-' ||
                   ch == '\'' || ch == '.') {
            // Keep interior dots/hyphens (F.C., e-v); strip other punctuation.
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    // Trailing sentence punctuation survives as part of the last word ("f.c."
    // keeps its dots but "munich." should not); trim dots at the edges.
    for (auto& tok : out) {
        while (tok.size() > 1 && tok.back() == '.' &&
               !(tok.size() >= 2 && tok[tok.size() - 2] == '.'))
            tok.pop_back();
    }
    return out;
}

namespace {

struct Mention {
    size_t start = 0;
    size_t len = 0;
    int role = 0;  // 0 = ENT, 1 = TS, 2 = GEO
    std::string entity;
};

std::optional<size_t> find_window(const std::vector<std::string>& toks,
                                  const std::vector<std::string>& needle,
                                  const std::vector<bool>& taken, size_t from) {
    if (needle.empty() || needle.size() > toks.size()) return std::nullopt;
    for (size_t i = from; i + needle.size() <= toks.size(); ++i) {
        bool ok = true;
        for (size_t j = 0; j < needle.size() && ok; ++j)
            ok = !taken[i + j] && toks[i + j] == needle[j];
        if (ok) return i;
    }
    return std::nullopt;
}

const char* role_token(int role) {
    return role == 0 ? kEntToken : role == 1 ? kTsToken : kGeoToken;
}

AnnotatedQuestion assemble(const std::vector<std::string>& toks, std::vector<Mention> mentions,
                           const AnnotateOptions& opt) {
    std::sort(mentions.begin(), mentions.end(),
              [](const Mention& a, const Mention& b) { return a.start < b.start; });

    AnnotatedQuestion q;
    if (opt.keep_surface_forms) {
        q.tokens = toks;
        for (const Mention& m : mentions) {
            SlotRef ref{m.start, m.entity};
            if (m.role == 0)
                q.ent = ref;
            else if (m.role == 1)
                q.ts = ref;
            else
                q.geo = ref;
        }
        return q;
    }

    size_t next_mention = 0;
    for (size_t i = 0; i < toks.size();) {
        if (next_mention < mentions.size() && mentions[next_mention].start == i) {
            const Mention& m = mentions[next_mention];
            SlotRef ref{q.tokens.size(), m.entity};
            q.tokens.push_back(role_token(m.role));
            if (m.role == 0)
                q.ent = ref;
            else if (m.role == 1)
                q.ts = ref;
            else
                q.geo = ref;
            i += m.len;
            ++next_mention;
        } else {
            q.tokens.push_back(toks[i]);
            ++i;
        }
    }
    return q;
}

// Resolve clue annotations against the graph and fill the injected year /
// point; drops or rejects unresolvable constraints per options.
void resolve_constraints(AnnotatedQuestion& q, std::vector<Constraint> constraints,
                         const KnowledgeGraph& graph, const AnnotateOptions& opt) {
    for (Constraint& c : constraints) {
        if (auto* t = std::get_if<TemporalConstraint>(&c)) {
            auto interval = graph.has_entity(t->clueEntity)
                                ? graph.entity_interval(t->clueEntity)
                                : std::nullopt;
            if (!interval) {
                if (opt.drop_unresolvable_constraints) continue;
                throw std::invalid_argument("temporal clue entity has no interval: " +
                                            t->clueEntity);
            }
            t->clueInterval = *interval;
            if (!q.ts_year) {
                switch (t->kind) {
                    case TemporalKind::After: q.ts_year = interval->start; break;
                    case TemporalKind::Before: q.ts_year = interval->end; break;
                    case TemporalKind::During: q.ts_year = interval->start; break;
                }
            }
            q.constraints.push_back(c);
        } else {
            auto* s = std::get_if<SpatialConstraint>(&c);
            auto point = graph.has_entity(s->clueEntity) ? graph.entity_coords(s->clueEntity)
                                                         : std::nullopt;
            if (!point) {
                if (opt.drop_unresolvable_constraints) continue;
                throw std::invalid_argument("spatial clue entity has no coordinates: " +
                                            s->clueEntity);
            }
            s->cluePoint = *point;
            if (!q.geo_point) q.geo_point = *point;
            q.constraints.push_back(c);
        }
    }
}

}  // namespace

AnnotatedQuestion annotate_question(const std::string& text, const GoldAnnotation& gold,
                                    const KnowledgeGraph& graph, const AnnotateOptions& opt) {
    if (text.empty()) throw std::invalid_argument("empty question text");
    const auto toks = tokenize_text(text);
    std::vector<bool> taken(toks.size(), false);
    std::vector<Mention> mentions;

    auto claim = [&](const std::string& entity, int role) -> bool {
        auto needle = tokenize_text(entity_label(entity));
        auto at = find_window(toks, needle, taken, 0);
        if (!at) return false;
        for (size_t j = *at; j < *at + needle.size(); ++j) taken[j] = true;
        mentions.push_back(Mention{*at, needle.size(), role, entity});
        return true;
    };

    if (!claim(gold.central, 0))
        throw std::invalid_argument("central entity not found in question: " + gold.central);
    if (gold.ts_clue && !claim(*gold.ts_clue, 1))
        throw std::invalid_argument("temporal clue not found in question: " + *gold.ts_clue);
    if (gold.geo_clue && !claim(*gold.geo_clue, 2))
        throw std::invalid_argument("spatial clue not found in question: " + *gold.geo_clue);

    AnnotatedQuestion q = assemble(toks, std::move(mentions), opt);
    resolve_constraints(q, gold.constraints, graph, opt);
    q.gold = gold.answers;
    return q;
}

namespace {

std::optional<Direction> direction_keyword(const std::string& word) {
    if (word == "north") return Direction::N;
    if (word == "south") return Direction::S;
    if (word == "east") return Direction::E;
    if (word == "west") return Direction::W;
    if (word == "northeast") return Direction::NE;
    if (word == "northwest") return Direction::NW;
    if (word == "southeast") return Direction::SE;
    if (word == "southwest") return Direction::SW;
    return std::nullopt;
}

std::optional<TemporalKind> temporal_keyword(const std::string& word) {
    if (word == "before") return TemporalKind::Before;
    if (word == "after") return TemporalKind::After;
    if (word == "during" || word == "while") return TemporalKind::During;
    return std::nullopt;
}

}  // namespace

AnnotatedQuestion annotate_question(const std::string& text, const KnowledgeGraph& graph,
                                    const AnnotateOptions& opt) {
    if (text.empty()) throw std::invalid_argument("empty question text");
    const auto toks = tokenize_text(text);

    // Longest-match dictionary over entity labels (up to 8 tokens).
    std::unordered_map<std::string, std::string> dict;
    size_t max_len = 1;
    for (const auto& id : graph.entities()) {
        auto words = tokenize_text(entity_label(id));
        if (words.empty()) continue;
        max_len = std::max(max_len, words.size());
        std::string key;
        for (const auto& w : words) {
            key += w;
            key += '\x1f';
        }
        dict.emplace(key, id);  // first (ascending id) wins on label collisions
    }
    max_len = std::min<size_t>(max_len, 8);

    std::vector<Mention> mentions;
    std::vector<Constraint> constraints;
    for (size_t i = 0; i < toks.size();) {
        size_t limit = std::min(max_len, toks.size() - i);
        std::string key;
        std::optional<std::pair<size_t, std::string>> hit;  // length, entity
        for (size_t len = 1; len <= limit; ++len) {
            key += toks[i + len - 1];
            key += '\x1f';
            auto it = dict.find(key);
            if (it != dict.end()) hit = {len, it->second};
        }
        if (!hit) {
            ++i;
            continue;
        }
        Mention m{i, hit->first, 0, hit->second};

        // Classify by the keywords immediately before the mention.
        if (i >= 1) {
            if (auto tk = temporal_keyword(toks[i - 1])) {
                m.role = 1;
                constraints.push_back(TemporalConstraint{*tk, {}, m.entity});
            } else if (toks[i - 1] == "of" && i >= 2) {
                if (auto dir = direction_keyword(toks[i - 2])) {
                    m.role = 2;
                    SpatialConstraint s;
                    s.kind = SpatialKind::Direction;
                    s.direction = *dir;
                    s.clueEntity = m.entity;
                    constraints.push_back(s);
                } else if (i >= 4 && toks[i - 2] == "miles" && toks[i - 4] == "within") {
                    int miles = 0;
                    const std::string& num = toks[i - 3];
                    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), miles);
                    if (ec == std::errc{} && p == num.data() + num.size() && miles >= 1) {
                        m.role = 2;
                        SpatialConstraint s;
                        s.kind = SpatialKind::WithinDistance;
                        s.miles = miles;
                        s.clueEntity = m.entity;
                        constraints.push_back(s);
                    }
                }
            }
        }
        mentions.push_back(m);
        i += hit->first;
    }

    // First unclassified mention is the central entity; keep the first TS and
    // first GEO mention, ignore the rest.
    std::vector<Mention> chosen;
    bool have_ent = false, have_ts = false, have_geo = false;
    for (const Mention& m : mentions) {
        if (m.role == 0 && !have_ent) {
            chosen.push_back(m);
            have_ent = true;
        } else if (m.role == 1 && !have_ts) {
            chosen.push_back(m);
            have_ts = true;
        } else if (m.role == 2 && !have_geo) {
            chosen.push_back(m);
            have_geo = true;
        }
    }
    if (!have_ent) throw std::invalid_argument("no central entity recognized in: " + text);

    // Drop constraints whose clue mention was not kept.
    std::vector<Constraint> kept_constraints;
    for (const Constraint& c : constraints) {
        const std::string& clue = std::visit([](const auto& v) { return v.clueEntity; }, c);
        for (const Mention& m : chosen)
            if (m.role != 0 && m.entity == clue) {
                kept_constraints.push_back(c);
                break;
            }
    }

    AnnotatedQuestion q = assemble(toks, std::move(chosen), opt);
    resolve_constraints(q, std::move(kept_constraints), graph, opt);
    return q;
}

uint32_t QaModel::token_id(const std::string& tok) const {
    auto it = token_index.find(tok);
    if (it != token_index.end()) return it->second;
    return token_index.at(kUnkToken);
}

namespace {

std::vector<double> packed_row(const EmbeddingTable& t, const std::string& id,
                               const char* what) {
    auto idx = t.index_of(id);
    if (!idx) throw std::invalid_argument(std::string("missing embedding for ") + what + ": " + id);
    auto r = t.row(*idx);
    return {r.begin(), r.end()};
}

}  // namespace

std::vector<double> encode_question(const AnnotatedQuestion& q, const QaModel& model,
                                    const EmbeddingSet& embeddings, const EncodeOptions& opt,
                                    EncoderCache* cache) {
    std::vector<uint32_t> ids;
    ids.reserve(q.tokens.size());
    for (const auto& tok : q.tokens) ids.push_back(model.token_id(tok));

    std::vector<SlotInjection> slots;
    slots.push_back({q.ent.pos, packed_row(embeddings.entities, q.ent.entity, "entity")});
    if (opt.inject_clues) {
        if (q.ts && q.ts_year)
            slots.push_back(
                {q.ts->pos, packed_row(embeddings.timestamps, timestamp_key(*q.ts_year),
                                       "timestamp")});
        if (q.geo && q.geo_point)
            slots.push_back(
                {q.geo->pos, packed_row(embeddings.locations, location_key(*q.geo_point),
                                        "location")});
    }
    return encoder_forward(model.encoder, ids, slots, cache);
}

namespace {

// Shared directed-score computation. scores/probs sized to the entity count;
// the packed intermediates are kept for the backward pass.
struct DirectedScores {
    std::vector<double> m;       // W_E q (as complex) ⊙ v_t ⊙ v_l
    std::vector<double> u1;      // e_c ⊙ m
    std::vector<double> ztilde;  // packed form whose dot with rows gives phi2
    std::vector<double> phi1, phi2, probs;
    std::vector<double> vtl;     // v_t ⊙ v_l (identity when absent)
    size_t central = 0;
};

void compute_directed(const std::vector<double>& question, size_t central_idx,
                      const double* vt, const double* vl, const EmbeddingSet& emb,
                      const std::vector<double>& w_e, DirectedScores& out) {
    const size_t d = emb.dim;
    const size_t width = 2 * d;
    const size_t n = emb.entities.rows();
    if (question.size() != d) throw std::invalid_argument("question vector width mismatch");
    if (w_e.size() != d * d) throw std::invalid_argument("W_E must be dim x dim");

    out.central = central_idx;
    // R = complex(W_E q): real part from the projection, zero imaginary.
    std::vector<double> r(width, 0.0);
    kernels::matvec_ref(w_e.data(), d, d, question.data(), r.data());

    out.vtl.assign(width, 0.0);
    std::fill(out.vtl.begin(), out.vtl.begin() + d, 1.0);
    std::vector<double> tmp(width);
    if (vt) {
        packed::cmul(out.vtl.data(), vt, tmp.data(), d);
        out.vtl = tmp;
    }
    if (vl) {
        packed::cmul(out.vtl.data(), vl, tmp.data(), d);
        out.vtl = tmp;
    }

    out.m.assign(width, 0.0);
    packed::cmul(r.data(), out.vtl.data(), out.m.data(), d);

    auto c_row = emb.entities.row(central_idx);
    out.u1.assign(width, 0.0);
    packed::cmul(c_row.data(), out.m.data(), out.u1.data(), d);

    // z = m ⊙ conj(e_c); phi2_a = dot(row_a, [z_re, -z_im])
    std::vector<double> z(width, 0.0);
    packed::cmul_conj_accum(out.m.data(), c_row.data(), z.data(), d);
    out.ztilde.assign(width, 0.0);
    for (size_t k = 0; k < d; ++k) {
        out.ztilde[k] = z[k];
        out.ztilde[d + k] = -z[d + k];
    }

    out.phi1.assign(n, 0.0);
    out.phi2.assign(n, 0.0);
    kernels::matvec(emb.entities.data(), n, width, out.u1.data(), out.phi1.data());
    kernels::matvec(emb.entities.data(), n, width, out.ztilde.data(), out.phi2.data());

    out.probs.resize(n);
    for (size_t a = 0; a < n; ++a) out.probs[a] = std::max(out.phi1[a], out.phi2[a]);
    kernels::softmax_inplace(out.probs.data(), n);
}

const double* clue_row_or_null(const EmbeddingTable& t, const std::optional<std::string>& key,
                               const char* what) {
    if (!key) return nullptr;
    auto idx = t.index_of(*key);
    if (!idx) throw std::invalid_argument(std::string("missing embedding for ") + what + ": " + *key);
    return t.row(*idx).data();
}

}  // namespace

ScoredCandidates score_candidates(const std::vector<double>& question, const std::string& central,
                                  std::optional<int> ts_year, std::optional<GeoPoint> geo_point,
                                  const EmbeddingSet& embeddings,
                                  const std::vector<double>& w_e) {
    auto c_idx = embeddings.entities.index_of(central);
    if (!c_idx) throw std::invalid_argument("unknown central entity: " + central);

    std::optional<std::string> tkey, lkey;
    if (ts_year) tkey = timestamp_key(*ts_year);
    if (geo_point) lkey = location_key(*geo_point);
    const double* vt = clue_row_or_null(embeddings.timestamps, tkey, "timestamp");
    const double* vl = clue_row_or_null(embeddings.locations, lkey, "location");

    DirectedScores ds;
    compute_directed(question, *c_idx, vt, vl, embeddings, w_e, ds);

    const auto& names = embeddings.entities.names();
    ScoredCandidates out;
    out.reserve(names.size());
    for (size_t a = 0; a < names.size(); ++a) out.push_back({names[a], ds.probs[a]});
    std::sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.prob != b.prob) return a.prob > b.prob;
        return a.id < b.id;
    });
    return out;
}

ScoredCandidates retrieve_topk(const AnnotatedQuestion& q, const QaModel& model,
                               const EmbeddingSet& embeddings, size_t k,
                               const EncodeOptions& opt) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    auto question = encode_question(q, model, embeddings, opt);
    auto ranked = score_candidates(question, q.ent.entity, q.ts_year, q.geo_point, embeddings,
                                   model.w_e);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

namespace {

struct PreparedQuestion {
    std::vector<uint32_t> ids;
    std::vector<SlotInjection> slots;
    size_t central_idx = 0;
    std::optional<std::string> tkey, lkey;
    std::vector<size_t> gold_idx;
};

PreparedQuestion prepare(const AnnotatedQuestion& q, const QaModel& model,
                         const EmbeddingSet& emb) {
    PreparedQuestion p;
    p.ids.reserve(q.tokens.size());
    for (const auto& tok : q.tokens) p.ids.push_back(model.token_id(tok));
    p.slots.push_back({q.ent.pos, packed_row(emb.entities, q.ent.entity, "entity")});
    if (q.ts && q.ts_year)
        p.slots.push_back(
            {q.ts->pos, packed_row(emb.timestamps, timestamp_key(*q.ts_year), "timestamp")});
    if (q.geo && q.geo_point)
        p.slots.push_back(
            {q.geo->pos, packed_row(emb.locations, location_key(*q.geo_point), "location")});
    auto c = emb.entities.index_of(q.ent.entity);
    if (!c) throw std::invalid_argument("unknown central entity: " + q.ent.entity);
    p.central_idx = *c;
    if (q.ts_year) p.tkey = timestamp_key(*q.ts_year);
    if (q.geo_point) p.lkey = location_key(*q.geo_point);
    for (const auto& g : q.gold) {
        auto gi = emb.entities.index_of(g);
        if (!gi) throw std::invalid_argument("gold answer not in entity table: " + g);
        p.gold_idx.push_back(*gi);
    }
    if (p.gold_idx.empty()) throw std::invalid_argument("question has no gold answers");
    return p;
}

// Loss and gradients for one question; returns -log P(gold set).
double question_loss(const PreparedQuestion& p, const QaModel& model, const EmbeddingSet& emb,
                     std::vector<double>* enc_grad, std::vector<double>* we_grad) {
    const size_t d = emb.dim;
    const size_t width = 2 * d;
    const size_t n = emb.entities.rows();

    EncoderScratch cache;
    auto question =
        encoder_forward(model.encoder, p.ids, p.slots, enc_grad ? cache.get() : nullptr);

    const double* vt = clue_row_or_null(emb.timestamps, p.tkey, "timestamp");
    const double* vl = clue_row_or_null(emb.locations, p.lkey, "location");
    DirectedScores ds;
    compute_directed(question, p.central_idx, vt, vl, emb, model.w_e, ds);

    double p_gold = 0.0;
    for (size_t g : p.gold_idx) p_gold += ds.probs[g];
    p_gold = std::max(p_gold, 1e-300);
    const double loss = -std::log(p_gold);
    if (!enc_grad) return loss;

    // dL/ds_a = p_a - p_a * [a in gold] / P_gold, routed through the max.
    std::vector<double> g1(n, 0.0), g2(n, 0.0);
    {
        std::vector<char> is_gold(n, 0);
        for (size_t g : p.gold_idx) is_gold[g] = 1;
        for (size_t a = 0; a < n; ++a) {
            double grad = ds.probs[a];
            if (is_gold[a]) grad -= ds.probs[a] / p_gold;
            (ds.phi1[a] >= ds.phi2[a] ? g1[a] : g2[a]) = grad;
        }
    }

    std::vector<double> du1(width), y2(width);
    kernels::matvec_t(emb.entities.data(), n, width, g1.data(), du1.data());
    kernels::matvec_t(emb.entities.data(), n, width, g2.data(), y2.data());

    auto c_row = emb.entities.row(p.central_idx);
    std::vector<double> dm(width, 0.0);
    // u1 = e_c ⊙ m
    packed::cmul_conj_accum(du1.data(), c_row.data(), dm.data(), d);
    // z = m ⊙ conj(e_c), phi2 via ztilde: dz = conj(y2), dm += dz ⊙ e_c
    std::vector<double> dz(width);
    for (size_t k = 0; k < d; ++k) {
        dz[k] = y2[k];
        dz[d + k] = -y2[d + k];
    }
    packed::cmul_accum(dz.data(), c_row.data(), dm.data(), d);

    // m = R ⊙ vtl with R = complex(W_E q): dR = dm ⊙ conj(vtl); only the real
    // half of dR reaches the projection.
    std::vector<double> dr(width, 0.0);
    packed::cmul_conj_accum(dm.data(), ds.vtl.data(), dr.data(), d);

    // dW_E += dr_re ⊗ q ; dq = W_E^T dr_re
    for (size_t i = 0; i < d; ++i) {
        const double gi = dr[i];
        double* row = we_grad->data() + i * d;
        for (size_t j = 0; j < d; ++j) row[j] += gi * question[j];
    }
    std::vector<double> dq(d, 0.0);
    kernels::matvec_t_ref(model.w_e.data(), d, d, dr.data(), dq.data());

    encoder_backward(model.encoder, *cache.get(), dq, *enc_grad);
    return loss;
}

}  // namespace

double qa_question_loss(const AnnotatedQuestion& q, const QaModel& model,
                        const EmbeddingSet& embeddings, std::vector<double>* encoder_grad,
                        std::vector<double>* we_grad) {
    if ((encoder_grad == nullptr) != (we_grad == nullptr))
        throw std::invalid_argument("provide both gradient buffers or neither");
    return question_loss(prepare(q, model, embeddings), model, embeddings, encoder_grad, we_grad);
}

namespace {

std::vector<std::string> build_vocab(const std::vector<AnnotatedQuestion>& train) {
    std::vector<std::string> vocab{kUnkToken, kEntToken, kTsToken, kGeoToken};
    std::unordered_map<std::string, bool> seen;
    for (const auto& t : vocab) seen.emplace(t, true);
    for (const auto& q : train)
        for (const auto& tok : q.tokens)
            if (seen.emplace(tok, true).second) vocab.push_back(tok);
    return vocab;
}

}  // namespace

QaTrainResult train_qa(const std::vector<AnnotatedQuestion>& train,
                       const std::vector<AnnotatedQuestion>& valid,
                       const EmbeddingSet& embeddings, const QaConfig& cfg) {
    if (train.empty()) throw std::invalid_argument("empty training split");

    QaTrainResult result;
    QaModel& model = result.model;
    model.vocab = build_vocab(train);
    for (size_t i = 0; i < model.vocab.size(); ++i)
        model.token_index.emplace(model.vocab[i], static_cast<uint32_t>(i));

    EncoderConfig ec;
    ec.vocab = model.vocab.size();
    ec.dim = cfg.dim == 0 ? embeddings.dim : cfg.dim;
    if (ec.dim != embeddings.dim)
        throw std::invalid_argument("encoder width must match the embedding dimension");
    ec.layers = cfg.layers;
    ec.heads = cfg.heads;
    ec.ff_hidden = cfg.ff_hidden;
    model.encoder = EncoderParams(ec);
    init_encoder(model.encoder, cfg.seed);

    const size_t d = ec.dim;
    model.w_e.assign(d * d, 0.0);
    {
        Rng rng(Rng::derive(cfg.seed, 0xA27));
        const double std = 1.0 / std::sqrt(static_cast<double>(d));
        for (double& v : model.w_e) v = rng.next_normal() * std;
    }

    std::vector<PreparedQuestion> prepared;
    prepared.reserve(train.size());
    for (const auto& q : train) prepared.push_back(prepare(q, model, embeddings));
    std::vector<PreparedQuestion> prepared_valid;
    prepared_valid.reserve(valid.size());
    for (const auto& q : valid) prepared_valid.push_back(prepare(q, model, embeddings));

    std::vector<double> enc_grad(model.encoder.flat.size(), 0.0);
    std::vector<double> we_grad(model.w_e.size(), 0.0);
    std::vector<double> enc_m(enc_grad.size(), 0.0), enc_v(enc_grad.size(), 0.0);
    std::vector<double> we_m(we_grad.size(), 0.0), we_v(we_grad.size(), 0.0);

    QaModel best = model;
    double best_valid = std::numeric_limits<double>::infinity();
    uint64_t step = 0;

    std::vector<size_t> order(prepared.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(Rng::derive(cfg.seed, 0x0A + epoch));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        double epoch_total = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::fill(enc_grad.begin(), enc_grad.end(), 0.0);
            std::fill(we_grad.begin(), we_grad.end(), 0.0);
            for (size_t i = start; i < stop; ++i)
                epoch_total += question_loss(prepared[order[i]], model, embeddings, &enc_grad,
                                             &we_grad);
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (double& v : enc_grad) v *= inv;
            for (double& v : we_grad) v *= inv;

            ++step;
            kernels::adam_step(model.encoder.flat.data(), enc_m.data(), enc_v.data(),
                               enc_grad.data(), enc_grad.size(), cfg.learning_rate,
                               cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, step);
            kernels::adam_step(model.w_e.data(), we_m.data(), we_v.data(), we_grad.data(),
                               we_grad.size(), cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                               cfg.adam_eps, step);
        }
        result.epoch_train_loss.push_back(epoch_total / static_cast<double>(prepared.size()));

        double vloss = 0.0;
        for (const auto& pq : prepared_valid)
            vloss += question_loss(pq, model, embeddings, nullptr, nullptr);
        vloss = prepared_valid.empty() ? result.epoch_train_loss.back()
                                       : vloss / static_cast<double>(prepared_valid.size());
        result.epoch_valid_loss.push_back(vloss);
        if (vloss < best_valid) {
            best_valid = vloss;
            best = model;
            result.best_epoch = epoch;
        }
    }

    if (cfg.epochs > 0) model = best;
    return result;
}

namespace {

std::string f32_str(double v) {
    char buf[48];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
    (void)ec;
    return std::string(buf, ptr);
}

void write_tensor(std::ostream& out, const char* name, const std::vector<double>& v) {
    out << "tensor " << name << ' ' << v.size() << '\n';
    for (size_t i = 0; i < v.size(); ++i) {
        out << f32_str(v[i]);
        out << ((i + 1) % 16 == 0 || i + 1 == v.size() ? '\n' : ' ');
    }
}

}  // namespace

void save_qa_checkpoint(const QaModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    const auto& c = model.encoder.cfg;
    out << "STKGQ v1\n";
    out << "config " << c.dim << ' ' << c.layers << ' ' << c.heads << ' ' << c.ff() << ' '
        << c.max_len << ' ' << model.vocab.size() << '\n';
    for (const auto& tok : model.vocab) out << tok << '\n';
    write_tensor(out, "encoder", model.encoder.flat);
    write_tensor(out, "w_e", model.w_e);
}

QaModel load_qa_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::string magic, version;
    in >> magic >> version;
    if (magic != "STKGQ" || version != "v1")
        throw std::runtime_error("not an STKGQ v1 checkpoint: " + path.string());

    std::string kw;
    EncoderConfig c;
    size_t vocab_size = 0;
    in >> kw >> c.dim >> c.layers >> c.heads >> c.ff_hidden >> c.max_len >> vocab_size;
    if (kw != "config") throw std::runtime_error("malformed checkpoint config line");
    c.vocab = vocab_size;

    QaModel model;
    model.vocab.resize(vocab_size);
    for (auto& tok : model.vocab) in >> tok;
    for (size_t i = 0; i < model.vocab.size(); ++i)
        model.token_index.emplace(model.vocab[i], static_cast<uint32_t>(i));

    model.encoder = EncoderParams(c);
    auto read_tensor = [&](const char* name, std::vector<double>& v, size_t expect) {
        std::string tag, got;
        size_t count = 0;
        in >> tag >> got >> count;
        if (tag != "tensor" || got != name)
            throw std::runtime_error(std::string("expected tensor ") + name);
        if (count != expect)
            throw std::runtime_error(std::string("tensor ") + name + " has " +
                                     std::to_string(count) + " values, expected " +
                                     std::to_string(expect));
        v.resize(count);
        for (auto& x : v) {
            float f = 0.0f;
            if (!(in >> f)) throw std::runtime_error("checkpoint truncated");
            x = static_cast<double>(f);
        }
    };
    read_tensor("encoder", model.encoder.flat, model.encoder.layout.total);
    model.w_e.clear();
    read_tensor("w_e", model.w_e, c.dim * c.dim);
    return model;
}

}  // namespace stkgqa
