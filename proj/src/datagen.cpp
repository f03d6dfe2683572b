#include "stkgqa/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "stkgqa/question.hpp"

namespace stkgqa {

std::vector<Fact> select_central_facts(const KnowledgeGraph& g,
                                       const std::vector<std::string>& relations) {
    std::unordered_set<std::string> allowed(relations.begin(), relations.end());
    std::vector<Fact> out;
    for (const Fact& f : g.facts())
        if (f.interval && f.location && allowed.count(f.relation)) out.push_back(f);
    return out;
}

ClueCandidates extract_clue_candidates(const KnowledgeGraph& g, const std::string& central,
                                       const GenOptions& opt) {
    std::unordered_set<std::string> blocked(opt.ambiguous_relations.begin(),
                                            opt.ambiguous_relations.end());
    ClueCandidates out;
    for (const Fact& f : g.subgraph_within_hops(central, opt.hops)) {
        if (blocked.count(f.relation)) continue;
        if (f.interval) out.temporal.push_back(f);
        if (f.location) out.spatial.push_back(f);
    }
    return out;
}

std::optional<std::pair<TemporalConstraint, SpatialConstraint>> generate_constraints(
    const Fact& central, const Fact& t_clue_fact, const Fact& g_clue_fact, Rng& rng) {
    if (!central.interval || !central.location) return std::nullopt;
    if (!t_clue_fact.interval || !g_clue_fact.location) return std::nullopt;
    auto temporal = derive_temporal_constraint(*central.interval, *t_clue_fact.interval);
    if (!temporal) return std::nullopt;
    SpatialConstraint spatial =
        derive_spatial_constraint(*central.location, *g_clue_fact.location, rng);
    return std::make_pair(*temporal, spatial);
}

std::set<std::string> execute_procedure(const KnowledgeGraph& g, const BoundProcedure& proc) {
    std::set<std::string> answers;
    for (size_t i : g.by_subject(proc.subject)) {
        const Fact& f = g.facts()[i];
        if (f.relation != proc.relation) continue;
        if (proc.temporal) {
            if (!f.interval || !proc.temporal->evaluate(*f.interval)) continue;
        }
        if (proc.spatial) {
            if (!f.location || !proc.spatial->evaluate(*f.location)) continue;
        }
        answers.insert(f.object);
    }
    return answers;
}

namespace {

// Re-resolve the pair's constraints against entity profiles, as an
// independent consumer of the dataset file would.
std::optional<std::pair<TemporalConstraint, SpatialConstraint>> resolve_pair_constraints(
    const KnowledgeGraph& g, const QAPair& pair) {
    std::optional<TemporalConstraint> tc;
    std::optional<SpatialConstraint> sc;
    for (const Constraint& c : pair.constraints) {
        if (const auto* t = std::get_if<TemporalConstraint>(&c)) {
            if (!g.has_entity(t->clueEntity)) return std::nullopt;
            auto interval = g.entity_interval(t->clueEntity);
            if (!interval) return std::nullopt;
            tc = *t;
            tc->clueInterval = *interval;
        } else {
            const auto& s = std::get<SpatialConstraint>(c);
            if (!g.has_entity(s.clueEntity)) return std::nullopt;
            auto point = g.entity_coords(s.clueEntity);
            if (!point) return std::nullopt;
            sc = s;
            sc->cluePoint = *point;
        }
    }
    if (!tc || !sc) return std::nullopt;
    return std::make_pair(*tc, *sc);
}

}  // namespace

bool verify_qa_pair(const KnowledgeGraph& g, const QAPair& pair) {
    auto resolved = resolve_pair_constraints(g, pair);
    if (!resolved) return false;

    BoundProcedure full{pair.central_entity, pair.relation, resolved->first, resolved->second};
    auto with_constraints = execute_procedure(g, full);
    if (!with_constraints.count(pair.gold_object)) return false;

    BoundProcedure relaxed{pair.central_entity, pair.relation, std::nullopt, std::nullopt};
    auto without = execute_procedure(g, relaxed);
    return without.size() > with_constraints.size();
}

std::string qa_pair_to_json(const QAPair& p) {
    nlohmann::json j;
    j["question"] = p.question;
    j["template_question"] = p.template_question;
    j["central_entity"] = p.central_entity;
    j["relation"] = p.relation;
    j["gold_object"] = p.gold_object;
    j["ts_clue"] = p.ts_clue;
    j["geo_clue"] = p.geo_clue;
    j["clue_shared"] = p.clue_shared;
    auto& cs = j["constraints"] = nlohmann::json::array();
    for (const auto& c : p.constraints) cs.push_back(nlohmann::json::parse(constraint_to_json(c)));
    j["answers"] = p.answers;
    auto& cls = j["constraint_classes"] = nlohmann::json::array();
    for (auto c : p.classes) cls.push_back(constraint_class_name(c));
    j["split"] = p.split;
    j["template_id"] = p.template_id;
    return j.dump();
}

QAPair qa_pair_from_json(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    QAPair p;
    p.question = j.at("question").get<std::string>();
    p.template_question = j.at("template_question").get<std::string>();
    p.central_entity = j.at("central_entity").get<std::string>();
    p.relation = j.at("relation").get<std::string>();
    p.gold_object = j.at("gold_object").get<std::string>();
    p.ts_clue = j.at("ts_clue").get<std::string>();
    p.geo_clue = j.at("geo_clue").get<std::string>();
    p.clue_shared = j.at("clue_shared").get<bool>();
    for (const auto& c : j.at("constraints")) p.constraints.push_back(constraint_from_json(c.dump()));
    p.answers = j.at("answers").get<std::vector<std::string>>();
    for (const auto& c : j.at("constraint_classes")) {
        const std::string name = c.get<std::string>();
        if (name == "DTC") p.classes.push_back(ConstraintClass::DTC);
        else if (name == "STC") p.classes.push_back(ConstraintClass::STC);
        else if (name == "DDC") p.classes.push_back(ConstraintClass::DDC);
        else if (name == "SDC") p.classes.push_back(ConstraintClass::SDC);
        else if (name == "DC") p.classes.push_back(ConstraintClass::DC);
        else throw std::runtime_error("unknown constraint class: " + name);
    }
    p.split = j.at("split").get<std::string>();
    p.template_id = j.at("template_id").get<std::string>();
    return p;
}

std::vector<QAPair> load_dataset_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());
    std::vector<QAPair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(qa_pair_from_json(line));
    }
    return out;
}

std::vector<QAPair> load_dataset_dir(const std::filesystem::path& dir) {
    std::vector<QAPair> all;
    for (const char* name : {"train.jsonl", "dev.jsonl", "test.jsonl"}) {
        auto part = load_dataset_file(dir / name);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

namespace {

// The clue entity of a fact is the endpoint whose graph profile carries the
// fact's own annotation (object preferred), so that constraints serialized
// by clue reference re-resolve to the same values. Endpoints equal to the
// central fact's subject or object are excluded to avoid self-reference and
// answer leakage.
std::optional<std::string> temporal_clue_entity(const KnowledgeGraph& g, const Fact& clue,
                                                const Fact& central) {
    for (const std::string* cand : {&clue.object, &clue.subject}) {
        if (*cand == central.subject || *cand == central.object) continue;
        auto interval = g.entity_interval(*cand);
        if (interval && *interval == *clue.interval) return *cand;
    }
    return std::nullopt;
}

std::optional<std::string> spatial_clue_entity(const KnowledgeGraph& g, const Fact& clue,
                                               const Fact& central) {
    for (const std::string* cand : {&clue.object, &clue.subject}) {
        if (*cand == central.subject || *cand == central.object) continue;
        auto point = g.entity_coords(*cand);
        if (point && *point == *clue.location) return *cand;
    }
    return std::nullopt;
}

struct UsableClues {
    // Index lists into the candidate fact vectors, split by whether the
    // central interval is contained in the clue interval (the scarce DTC
    // case is emitted first when available).
    std::vector<size_t> during_facts;
    std::vector<size_t> other_temporal;
    std::vector<size_t> spatial;
};

UsableClues usable_clues(const KnowledgeGraph& g, const Fact& central,
                         const ClueCandidates& cands) {
    UsableClues u;
    for (size_t i = 0; i < cands.temporal.size(); ++i) {
        const Fact& f = cands.temporal[i];
        if (f == central) continue;
        if (!temporal_clue_entity(g, f, central)) continue;
        auto c = derive_temporal_constraint(*central.interval, *f.interval);
        if (!c) continue;
        (c->kind == TemporalKind::During ? u.during_facts : u.other_temporal).push_back(i);
    }
    for (size_t i = 0; i < cands.spatial.size(); ++i) {
        const Fact& f = cands.spatial[i];
        if (f == central) continue;
        if (!spatial_clue_entity(g, f, central)) continue;
        u.spatial.push_back(i);
    }
    return u;
}

std::string dedup_key(const QAPair& p) {
    std::string key = p.template_id + '\x1f' + p.central_entity + '\x1f' + p.gold_object +
                      '\x1f' + p.ts_clue + '\x1f' + p.geo_clue;
    for (const auto& c : p.constraints) {
        key += '\x1f';
        key += constraint_to_json(c);
    }
    return key;
}

}  // namespace

GenReport emit_dataset(const KnowledgeGraph& input_graph,
                       const std::vector<SeedTemplate>& templates, size_t target, uint64_t seed,
                       const std::filesystem::path& out_dir, const GenOptions& opt,
                       const Paraphraser& paraphrase) {
    GenReport report;
    report.requested = target;

    // Location completion is idempotent; applying it here keeps generation
    // correct when the caller passes a raw graph.
    const KnowledgeGraph g = input_graph.complete_fact_locations();

    std::vector<std::string> relations =
        opt.relations.empty() ? template_relations() : opt.relations;
    // Keep only relations that actually have templates.
    std::map<std::string, std::vector<const SeedTemplate*>> by_relation;
    for (const auto& t : templates) by_relation[t.relation].push_back(&t);
    relations.erase(std::remove_if(relations.begin(), relations.end(),
                                   [&](const std::string& r) { return !by_relation.count(r); }),
                    relations.end());

    const std::vector<Fact> centrals = select_central_facts(g, relations);

    // Clue candidates per central entity are invariant across rounds.
    std::vector<ClueCandidates> cands(centrals.size());
    std::vector<UsableClues> usable(centrals.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(centrals.size()); ++i) {
        cands[i] = extract_clue_candidates(g, centrals[i].subject, opt);
        usable[i] = usable_clues(g, centrals[i], cands[i]);
    }

    std::vector<QAPair> pool;
    std::unordered_set<std::string> seen;

    for (size_t round = 0; round < opt.max_rounds && pool.size() < target; ++round) {
        ++report.rounds;
        std::vector<std::optional<QAPair>> produced(centrals.size());

        // Independent seeded stream per (round, central fact); output is
        // appended in fact order afterwards, so thread count cannot affect
        // the result.
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < static_cast<int64_t>(centrals.size()); ++i) {
            const Fact& central = centrals[i];
            const UsableClues& u = usable[i];
            if (u.spatial.empty() || (u.during_facts.empty() && u.other_temporal.empty()))
                continue;
            Rng rng(Rng::derive(Rng::derive(seed, 0xD47A + round), static_cast<uint64_t>(i)));

            // DTC first when available; uniform draw within the chosen tier.
            const std::vector<size_t>& tier =
                !u.during_facts.empty() ? u.during_facts : u.other_temporal;
            const Fact& t_fact = cands[i].temporal[tier[rng.next_below(tier.size())]];

            // Prefer a spatial clue fact distinct from the temporal one.
            std::vector<size_t> spatial_pool;
            for (size_t s : u.spatial)
                if (!(cands[i].spatial[s] == t_fact)) spatial_pool.push_back(s);
            bool shared = spatial_pool.empty();
            if (shared) spatial_pool = u.spatial;
            const Fact& g_fact = cands[i].spatial[spatial_pool[rng.next_below(spatial_pool.size())]];

            auto derived = generate_constraints(central, t_fact, g_fact, rng);
            if (!derived) continue;
            auto [tc, sc] = *derived;
            tc.clueEntity = *temporal_clue_entity(g, t_fact, central);
            sc.clueEntity = *spatial_clue_entity(g, g_fact, central);

            const auto& tpls = by_relation.at(central.relation);
            const SeedTemplate& tpl = *tpls[rng.next_below(tpls.size())];

            QAPair pair;
            pair.template_id = tpl.id;
            pair.central_entity = central.subject;
            pair.relation = central.relation;
            pair.gold_object = central.object;
            pair.ts_clue = tc.clueEntity;
            pair.geo_clue = sc.clueEntity;
            pair.clue_shared = shared && pair.ts_clue == pair.geo_clue;
            pair.constraints = {tc, sc};
            pair.classes = {classify(tc), classify(sc)};
            pair.template_question = fill_template(tpl, pair.central_entity, Constraint{tc},
                                                   pair.ts_clue, Constraint{sc}, pair.geo_clue);
            pair.question = paraphrase ? paraphrase(pair.template_question)
                                       : pair.template_question;

            BoundProcedure proc{pair.central_entity, pair.relation, tc, sc};
            auto answers = execute_procedure(g, proc);
            pair.answers.assign(answers.begin(), answers.end());

            if (!verify_qa_pair(g, pair)) continue;
            produced[i] = std::move(pair);
        }

        for (auto& maybe : produced) {
            if (!maybe || pool.size() >= target) continue;
            if (!seen.insert(dedup_key(*maybe)).second) continue;
            pool.push_back(std::move(*maybe));
        }
    }

    // Seeded shuffle then 8:1:1 split tags; file order stays the generation
    // order.
    std::vector<size_t> order(pool.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(Rng::derive(seed, 0x5B717));
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);
    const size_t n = pool.size();
    const size_t n_train = n * 8 / 10, n_dev = n * 9 / 10 - n_train;
    for (size_t rank = 0; rank < n; ++rank) {
        QAPair& p = pool[order[rank]];
        p.split = rank < n_train ? "train" : rank < n_train + n_dev ? "dev" : "test";
    }

    report.generated = pool.size();
    for (const char* cls : {"DTC", "STC", "DDC", "SDC", "DC"})
        for (const char* split : {"train", "dev", "test"}) report.census[cls][split] = 0;
    for (const char* split : {"train", "dev", "test"}) report.split_sizes[split] = 0;
    for (const QAPair& p : pool) {
        ++report.split_sizes[p.split];
        std::set<std::string> classes;
        for (auto c : p.classes) classes.insert(constraint_class_name(c));
        for (const auto& c : classes) ++report.census[c][p.split];
    }

    std::filesystem::create_directories(out_dir);
    std::ofstream train(out_dir / "train.jsonl"), dev(out_dir / "dev.jsonl"),
        test(out_dir / "test.jsonl");
    if (!train || !dev || !test)
        throw std::runtime_error("cannot write dataset files under " + out_dir.string());
    double word_sum[3] = {0, 0, 0};
    for (const QAPair& p : pool) {
        std::ostream& out = p.split == "train" ? train : p.split == "dev" ? dev : test;
        out << qa_pair_to_json(p) << '\n';
        size_t words = tokenize_text(p.question).size();
        word_sum[p.split == "train" ? 0 : p.split == "dev" ? 1 : 2] += static_cast<double>(words);
    }

    nlohmann::json census;
    for (const auto& [cls, per_split] : report.census) {
        for (const auto& [split, count] : per_split) census["constraints"][cls][split] = count;
    }
    for (const auto& [split, count] : report.split_sizes) census["overall"][split] = count;
    const char* split_names[3] = {"train", "dev", "test"};
    for (int i = 0; i < 3; ++i) {
        size_t count = report.split_sizes[split_names[i]];
        census["avg_sentence_length"][split_names[i]] =
            count == 0 ? 0.0 : word_sum[i] / static_cast<double>(count);
    }
    census["generated"] = report.generated;
    census["requested"] = report.requested;
    std::ofstream census_out(out_dir / "census.json");
    census_out << census.dump(2) << '\n';

    return report;
}

}  // namespace stkgqa
