#include "stkgqa/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stkgqa/kernels.hpp"
#include "stkgqa/packed.hpp"
#include "stkgqa/rng.hpp"

namespace stkgqa {

const char* model_name(ModelKind m) {
    switch (m) {
        case ModelKind::Complex: return "complex";
        case ModelKind::TComplex: return "tcomplex";
        case ModelKind::STComplex: return "stcomplex";
    }
    return "?";
}

ModelKind model_from_name(const std::string& name) {
    if (name == "complex") return ModelKind::Complex;
    if (name == "tcomplex") return ModelKind::TComplex;
    if (name == "stcomplex") return ModelKind::STComplex;
    throw std::invalid_argument("unknown model: " + name);
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> names, size_t dim)
    : dim_(dim), names_(std::move(names)), data_(names_.size() * 2 * dim, 0.0) {
    for (size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
}

std::optional<size_t> EmbeddingTable::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ComplexVector EmbeddingTable::vector_at(size_t i) const {
    auto r = row(i);
    ComplexVector v;
    v.re.assign(r.begin(), r.begin() + dim_);
    v.im.assign(r.begin() + dim_, r.end());
    return v;
}

void EmbeddingTable::set_row(size_t i, const ComplexVector& v) {
    if (v.dim() != dim_) throw std::invalid_argument("row dimension mismatch");
    auto r = row(i);
    std::copy(v.re.begin(), v.re.end(), r.begin());
    std::copy(v.im.begin(), v.im.end(), r.begin() + dim_);
}

ComplexVector EmbeddingSet::entity_vector(const std::string& id) const {
    auto i = entities.index_of(id);
    if (!i) throw std::invalid_argument("unknown entity: " + id);
    return entities.vector_at(*i);
}

std::string timestamp_key(int year) { return std::to_string(year); }

std::string location_key(const GeoPoint& p) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f", p.lat, p.lon);
    return buf;
}

namespace {

void gaussian_fill(EmbeddingTable& table, double stddev, uint64_t seed) {
    Rng rng(seed);
    double* d = table.data();
    for (size_t i = 0; i < table.value_count(); ++i) d[i] = rng.next_normal() * stddev;
}

}  // namespace

EmbeddingSet init_embeddings(const KnowledgeGraph& g, size_t dim, uint64_t seed) {
    std::set<int> years;
    std::set<std::string> locs;
    for (const Fact& f : g.facts()) {
        if (f.interval) {
            years.insert(f.interval->start);
            years.insert(f.interval->end);
        }
        if (f.location) locs.insert(location_key(*f.location));
    }
    std::vector<std::string> year_names;
    for (int y : years) year_names.push_back(timestamp_key(y));

    EmbeddingSet s;
    s.dim = dim;
    s.entities = EmbeddingTable(g.entities(), dim);
    s.relations = EmbeddingTable(g.relation_ids(), dim);
    s.timestamps = EmbeddingTable(std::move(year_names), dim);
    s.locations = EmbeddingTable({locs.begin(), locs.end()}, dim);

    const double stddev = 1.0 / std::sqrt(static_cast<double>(dim));
    gaussian_fill(s.entities, stddev, Rng::derive(seed, 1));
    gaussian_fill(s.relations, stddev, Rng::derive(seed, 2));
    gaussian_fill(s.timestamps, stddev, Rng::derive(seed, 3));
    gaussian_fill(s.locations, stddev, Rng::derive(seed, 4));
    return s;
}

std::vector<IndexedFact> index_facts(const std::vector<Fact>& facts, const EmbeddingSet& params) {
    std::vector<IndexedFact> out;
    out.reserve(facts.size());
    for (const Fact& f : facts) {
        IndexedFact x;
        auto s = params.entities.index_of(f.subject);
        auto r = params.relations.index_of(f.relation);
        auto o = params.entities.index_of(f.object);
        if (!s) throw std::invalid_argument("unknown entity: " + f.subject);
        if (!r) throw std::invalid_argument("unknown relation: " + f.relation);
        if (!o) throw std::invalid_argument("unknown entity: " + f.object);
        x.s = static_cast<uint32_t>(*s);
        x.r = static_cast<uint32_t>(*r);
        x.o = static_cast<uint32_t>(*o);
        if (f.interval) {
            auto t = params.timestamps.index_of(timestamp_key(f.interval->start));
            if (!t) throw std::invalid_argument("unknown timestamp: " +
                                                timestamp_key(f.interval->start));
            x.t = static_cast<int32_t>(*t);
        }
        if (f.location) {
            auto l = params.locations.index_of(location_key(*f.location));
            if (!l) throw std::invalid_argument("unknown location: " + location_key(*f.location));
            x.l = static_cast<int32_t>(*l);
        }
        out.push_back(x);
    }
    return out;
}

Gradients Gradients::like(const EmbeddingSet& p) {
    Gradients g;
    g.entities.assign(p.entities.value_count(), 0.0);
    g.relations.assign(p.relations.value_count(), 0.0);
    g.timestamps.assign(p.timestamps.value_count(), 0.0);
    g.locations.assign(p.locations.value_count(), 0.0);
    return g;
}

void Gradients::zero() {
    std::fill(entities.begin(), entities.end(), 0.0);
    std::fill(relations.begin(), relations.end(), 0.0);
    std::fill(timestamps.begin(), timestamps.end(), 0.0);
    std::fill(locations.begin(), locations.end(), 0.0);
}

namespace {

using packed::cmul;
using packed::cmul_conj_accum;

// The fused relation factor w = es ⊙ r [⊙ t][⊙ l], depending on model and
// per-fact annotation. Returns the packed factor rows that participate.
struct FactorSet {
    const double* rows[4];
    double* grads[4];
    size_t count = 0;
};

FactorSet gather_factors(const IndexedFact& f, const EmbeddingSet& p, ModelKind model,
                         Gradients* g) {
    const size_t w = p.entities.row_width();
    FactorSet fs;
    auto push = [&](const double* row, double* grad) {
        fs.rows[fs.count] = row;
        fs.grads[fs.count] = grad;
        ++fs.count;
    };
    push(p.entities.row(f.s).data(), g ? g->entities.data() + f.s * w : nullptr);
    push(p.relations.row(f.r).data(), g ? g->relations.data() + f.r * w : nullptr);
    if (model != ModelKind::Complex && f.t >= 0)
        push(p.timestamps.row(static_cast<size_t>(f.t)).data(),
             g ? g->timestamps.data() + static_cast<size_t>(f.t) * w : nullptr);
    if (model == ModelKind::STComplex && f.l >= 0)
        push(p.locations.row(static_cast<size_t>(f.l)).data(),
             g ? g->locations.data() + static_cast<size_t>(f.l) * w : nullptr);
    return fs;
}

void product_of(const FactorSet& fs, size_t skip, size_t dim, double* out) {
    bool first = true;
    std::vector<double> tmp(2 * dim);
    for (size_t i = 0; i < fs.count; ++i) {
        if (i == skip) continue;
        if (first) {
            std::copy(fs.rows[i], fs.rows[i] + 2 * dim, out);
            first = false;
        } else {
            cmul(out, fs.rows[i], tmp.data(), dim);
            std::copy(tmp.begin(), tmp.end(), out);
        }
    }
    if (first) {  // single-factor product of "others" is the identity
        std::fill(out, out + dim, 1.0);
        std::fill(out + dim, out + 2 * dim, 0.0);
    }
}

}  // namespace

double loss_and_gradients(const std::vector<IndexedFact>& batch, const EmbeddingSet& params,
                          ModelKind model, Gradients& grads) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const size_t dim = params.dim;
    const size_t width = 2 * dim;
    const size_t n_ent = params.entities.rows();

    grads.zero();
    std::vector<double> w(width), scores(n_ent), u(width), others(width);
    double total = 0.0;

    for (const IndexedFact& f : batch) {
        FactorSet fs = gather_factors(f, params, model, &grads);
        product_of(fs, fs.count, dim, w.data());  // skip index out of range = full product

        kernels::matvec(params.entities.data(), n_ent, width, w.data(), scores.data());
        const double gold_score = scores[f.o];
        const double lse = kernels::softmax_inplace(scores.data(), n_ent);
        total += lse - gold_score;

        // scores now holds probabilities; turn into dL/dscore.
        scores[f.o] -= 1.0;

        // Object-side: every entity row receives g_e * w.
        kernels::rank1_update(grads.entities.data(), n_ent, width, scores.data(), w.data());
        // Fused-factor side: u = sum_e g_e * row_e, then chain through the
        // complex product.
        kernels::matvec_t(params.entities.data(), n_ent, width, scores.data(), u.data());
        for (size_t i = 0; i < fs.count; ++i) {
            product_of(fs, i, dim, others.data());
            cmul_conj_accum(u.data(), others.data(), fs.grads[i], dim);
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto* buf : {&grads.entities, &grads.relations, &grads.timestamps, &grads.locations})
        for (double& v : *buf) v *= inv;
    return total * inv;
}

double loss_and_gradients(const std::vector<Fact>& batch, const EmbeddingSet& params,
                          ModelKind model, Gradients& grads) {
    return loss_and_gradients(index_facts(batch, params), params, model, grads);
}

SplitFacts split_facts(const std::vector<Fact>& facts, uint64_t seed) {
    std::vector<size_t> order(facts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(Rng::derive(seed, 0x5F17));
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);

    const size_t n = facts.size();
    const size_t n_train = n * 8 / 10;
    const size_t n_valid = n * 9 / 10 - n_train;
    SplitFacts s;
    for (size_t i = 0; i < n; ++i) {
        const Fact& f = facts[order[i]];
        if (i < n_train)
            s.train.push_back(f);
        else if (i < n_train + n_valid)
            s.valid.push_back(f);
        else
            s.test.push_back(f);
    }
    return s;
}

HitsReport evaluate_completion(const std::vector<Fact>& test, const EmbeddingSet& params,
                               ModelKind model,
                               std::vector<std::vector<std::string>>* ranking_dump) {
    const size_t dim = params.dim;
    const size_t width = 2 * dim;
    const size_t n_ent = params.entities.rows();
    const auto indexed = index_facts(test, params);

    HitsReport rep;
    rep.count = test.size();
    std::vector<double> w(width), scores(n_ent);
    if (ranking_dump) ranking_dump->clear();

    for (const IndexedFact& f : indexed) {
        FactorSet fs = gather_factors(f, params, model, nullptr);
        product_of(fs, fs.count, dim, w.data());
        kernels::matvec(params.entities.data(), n_ent, width, w.data(), scores.data());

        // Rank of the gold object: entities scoring strictly higher, plus
        // equal scorers with a smaller id (ids are in ascending-name order).
        const double gold = scores[f.o];
        size_t rank = 1;
        for (size_t e = 0; e < n_ent; ++e) {
            if (e == f.o) continue;
            if (scores[e] > gold || (scores[e] == gold && e < f.o)) ++rank;
        }
        rep.hits1 += rank <= 1;
        rep.hits3 += rank <= 3;
        rep.hits10 += rank <= 10;

        if (ranking_dump) {
            std::vector<size_t> idx(n_ent);
            for (size_t e = 0; e < n_ent; ++e) idx[e] = e;
            std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
                if (scores[a] != scores[b]) return scores[a] > scores[b];
                return a < b;
            });
            std::vector<std::string> names;
            names.reserve(n_ent);
            for (size_t e : idx) names.push_back(params.entities.names()[e]);
            ranking_dump->push_back(std::move(names));
        }
    }
    if (rep.count > 0) {
        rep.hits1 /= static_cast<double>(rep.count);
        rep.hits3 /= static_cast<double>(rep.count);
        rep.hits10 /= static_cast<double>(rep.count);
    }
    return rep;
}

EmbedTrainResult train_embeddings_on_split(EmbeddingSet init, const std::vector<Fact>& train,
                                           const std::vector<Fact>& valid, ModelKind model,
                                           const TrainConfig& cfg) {
    if (train.empty()) throw std::invalid_argument("empty training split");

    EmbedTrainResult result;
    result.params = std::move(init);
    EmbeddingSet& params = result.params;

    const auto train_idx = index_facts(train, params);
    Gradients grads = Gradients::like(params);
    Gradients accum = Gradients::like(params);  // Adagrad squared-gradient state

    EmbeddingSet best = params;
    double best_hits = -1.0;

    std::vector<size_t> order(train_idx.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(Rng::derive(cfg.seed, 0xE70C + epoch));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        double epoch_total = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<IndexedFact> batch;
            batch.reserve(stop - start);
            for (size_t i = start; i < stop; ++i) batch.push_back(train_idx[order[i]]);

            const double loss = loss_and_gradients(batch, params, model, grads);
            epoch_total += loss * static_cast<double>(batch.size());

            kernels::adagrad_step(params.entities.data(), accum.entities.data(),
                                  grads.entities.data(), grads.entities.size(),
                                  cfg.learning_rate, cfg.adagrad_eps);
            kernels::adagrad_step(params.relations.data(), accum.relations.data(),
                                  grads.relations.data(), grads.relations.size(),
                                  cfg.learning_rate, cfg.adagrad_eps);
            kernels::adagrad_step(params.timestamps.data(), accum.timestamps.data(),
                                  grads.timestamps.data(), grads.timestamps.size(),
                                  cfg.learning_rate, cfg.adagrad_eps);
            kernels::adagrad_step(params.locations.data(), accum.locations.data(),
                                  grads.locations.data(), grads.locations.size(),
                                  cfg.learning_rate, cfg.adagrad_eps);
        }
        result.epoch_loss.push_back(epoch_total / static_cast<double>(train_idx.size()));

        // Without a validation split the final parameters are kept.
        double hits10 = valid.empty() ? 0.0 : evaluate_completion(valid, params, model).hits10;
        result.epoch_valid_hits10.push_back(hits10);
        if (!valid.empty() && hits10 > best_hits) {
            best_hits = hits10;
            best = params;
            result.best_epoch = epoch;
        }
    }

    if (cfg.epochs > 0 && !valid.empty()) params = best;
    if (valid.empty()) result.best_epoch = cfg.epochs;
    return result;
}

EmbedTrainResult train_embeddings(const KnowledgeGraph& g, ModelKind model,
                                  const TrainConfig& cfg) {
    SplitFacts split = split_facts(g.facts(), cfg.seed);
    EmbeddingSet init = init_embeddings(g, cfg.dim, cfg.seed);
    return train_embeddings_on_split(std::move(init), split.train, split.valid, model, cfg);
}

namespace {

std::string f32_str(double v) {
    char buf[48];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
    (void)ec;
    return std::string(buf, ptr);
}

void write_table(std::ostream& out, const char* kind, const EmbeddingTable& t) {
    for (size_t i = 0; i < t.rows(); ++i) {
        out << kind << '\t' << t.names()[i];
        for (double v : t.row(i)) out << '\t' << f32_str(v);
        out << '\n';
    }
}

}  // namespace

void save_embedding_checkpoint(const EmbeddingSet& params, ModelKind model,
                               const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << "STKGE v1 " << model_name(model) << ' ' << params.dim << '\n';
    write_table(out, "entity", params.entities);
    write_table(out, "relation", params.relations);
    write_table(out, "timestamp", params.timestamps);
    write_table(out, "location", params.locations);
}

std::pair<EmbeddingSet, ModelKind> load_embedding_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());

    std::string magic, version, model_str;
    size_t dim = 0;
    in >> magic >> version >> model_str >> dim;
    if (magic != "STKGE" || version != "v1")
        throw std::runtime_error("not an STKGE v1 checkpoint: " + path.string());
    if (dim == 0) throw std::runtime_error("checkpoint declares dimension 0");
    ModelKind model = model_from_name(model_str);
    std::string rest;
    std::getline(in, rest);

    struct Rows {
        std::vector<std::string> names;
        std::vector<double> values;
    };
    Rows tables[4];
    auto kind_slot = [&](const std::string& kind) -> Rows& {
        if (kind == "entity") return tables[0];
        if (kind == "relation") return tables[1];
        if (kind == "timestamp") return tables[2];
        if (kind == "location") return tables[3];
        throw std::runtime_error("unknown row kind in checkpoint: " + kind);
    };

    std::string line;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        if (fields.size() != 2 + 2 * dim)
            throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(2 + 2 * dim) +
                                     " fields for dimension " + std::to_string(dim));
        Rows& slot = kind_slot(fields[0]);
        slot.names.push_back(fields[1]);
        for (size_t i = 2; i < fields.size(); ++i) {
            float v = 0.0f;
            auto [p, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
            if (ec != std::errc{} || p != fields[i].data() + fields[i].size())
                throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                                         ": bad float '" + fields[i] + "'");
            slot.values.push_back(static_cast<double>(v));
        }
    }

    EmbeddingSet s;
    s.dim = dim;
    auto build = [&](Rows& r) {
        EmbeddingTable t(std::move(r.names), dim);
        std::copy(r.values.begin(), r.values.end(), t.data());
        return t;
    };
    s.entities = build(tables[0]);
    s.relations = build(tables[1]);
    s.timestamps = build(tables[2]);
    s.locations = build(tables[3]);
    return {std::move(s), model};
}

}  // namespace stkgqa
