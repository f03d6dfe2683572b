#include "stkgqa/eval.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace stkgqa {

int hits_at_k(const std::vector<std::string>& ranked, const std::vector<std::string>& gold,
              size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (gold.empty()) throw std::invalid_argument("empty gold set");
    const size_t limit = std::min(k, ranked.size());
    for (size_t i = 0; i < limit; ++i)
        if (std::find(gold.begin(), gold.end(), ranked[i]) != gold.end()) return 1;
    return 0;
}

AblationConfig ablation_from_flags(const std::string& csv) {
    AblationConfig a;
    std::stringstream ss(csv);
    std::string flag;
    while (std::getline(ss, flag, ',')) {
        if (flag.empty()) continue;
        if (flag == "no_entity_annotation") a.no_entity_annotation = true;
        else if (flag == "no_clue_embedding") a.no_clue_embedding = true;
        else if (flag == "no_constraint_filter") a.no_constraint_filter = true;
        else if (flag == "no_temporal_knowledge") a.no_temporal_knowledge = true;
        else if (flag == "no_spatial_knowledge") a.no_spatial_knowledge = true;
        else throw std::invalid_argument("unknown ablation flag: " + flag);
    }
    return a;
}

std::string ablation_to_string(const AblationConfig& a) {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    add(a.no_entity_annotation, "no_entity_annotation");
    add(a.no_clue_embedding, "no_clue_embedding");
    add(a.no_constraint_filter, "no_constraint_filter");
    add(a.no_temporal_knowledge, "no_temporal_knowledge");
    add(a.no_spatial_knowledge, "no_spatial_knowledge");
    return out;
}

KnowledgeGraph apply_knowledge_ablation(const KnowledgeGraph& g, const AblationConfig& a) {
    if (!a.no_temporal_knowledge && !a.no_spatial_knowledge) return g;
    return g.strip_annotations(a.no_temporal_knowledge, a.no_spatial_knowledge);
}

std::vector<std::string> answer_question(const QAPair& pair, const QaPipeline& pipeline,
                                         const EvalOptions& opt, FilterReport* out_report) {
    const AblationConfig& ab = opt.ablation;

    GoldAnnotation gold;
    gold.central = pair.central_entity;
    if (!pair.ts_clue.empty()) gold.ts_clue = pair.ts_clue;
    if (!pair.geo_clue.empty()) gold.geo_clue = pair.geo_clue;
    gold.constraints = pair.constraints;
    gold.answers = pair.answers;

    AnnotateOptions aopt;
    aopt.keep_surface_forms = ab.no_entity_annotation;
    aopt.drop_unresolvable_constraints = ab.no_temporal_knowledge || ab.no_spatial_knowledge;
    AnnotatedQuestion q = annotate_question(pair.question, gold, *pipeline.graph, aopt);

    EncodeOptions eopt;
    eopt.inject_clues = !ab.no_clue_embedding;
    auto question = encode_question(q, *pipeline.model, *pipeline.embeddings, eopt);
    ScoredCandidates ranked = score_candidates(question, q.ent.entity, q.ts_year, q.geo_point,
                                               *pipeline.embeddings, pipeline.model->w_e);

    std::vector<std::string> order;
    order.reserve(ranked.size());
    if (ab.no_constraint_filter) {
        for (const auto& c : ranked) order.push_back(c.id);
        return order;
    }

    FilterReport report = filter_candidates(ranked, q.constraints, *pipeline.graph);
    for (const auto& c : report.kept) order.push_back(c.id);
    if (opt.tail == TailPolicy::KeptThenTail) {
        // Dropped and unevaluable candidates keep their relative rank order
        // behind the kept list.
        std::vector<std::string> rejected;
        rejected.reserve(report.dropped.size() + report.unevaluable.size());
        for (const auto& [id, c] : report.dropped) rejected.push_back(id);
        for (const auto& id : report.unevaluable) rejected.push_back(id);
        for (const auto& c : ranked)
            if (std::find(rejected.begin(), rejected.end(), c.id) != rejected.end())
                order.push_back(c.id);
    }
    if (out_report) *out_report = std::move(report);
    return order;
}

EvalReport evaluate_qa(const std::vector<QAPair>& questions, const QaPipeline& pipeline,
                       const EvalOptions& opt) {
    struct PerQuestion {
        int h1 = 0, h3 = 0, h10 = 0;
        std::string trace;
    };
    std::vector<PerQuestion> rows(questions.size());

#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(questions.size()); ++i) {
        const QAPair& pair = questions[i];
        FilterReport freport;
        auto ranked = answer_question(pair, pipeline, opt,
                                      opt.trace ? &freport : nullptr);
        rows[i].h1 = hits_at_k(ranked, pair.answers, 1);
        rows[i].h3 = hits_at_k(ranked, pair.answers, 3);
        rows[i].h10 = hits_at_k(ranked, pair.answers, 10);
        if (opt.trace && !opt.ablation.no_constraint_filter)
            rows[i].trace = filter_trace_json(pair.question, freport);
    }

    EvalReport report;
    report.questions = questions.size();
    report.ablation = ablation_to_string(opt.ablation);
    for (const char* cls : {"DTC", "STC", "DDC", "SDC", "DC"}) report.per_class[cls] = {};

    for (size_t i = 0; i < questions.size(); ++i) {
        report.hits1 += rows[i].h1;
        report.hits3 += rows[i].h3;
        report.hits10 += rows[i].h10;
        std::set<std::string> classes;
        for (auto c : questions[i].classes) classes.insert(constraint_class_name(c));
        for (const auto& cls : classes) {
            ClassHits& ch = report.per_class[cls];
            ++ch.count;
            ch.hits1 += rows[i].h1;
            ch.hits3 += rows[i].h3;
            ch.hits10 += rows[i].h10;
        }
        if (opt.trace && !rows[i].trace.empty()) (*opt.trace) << rows[i].trace << '\n';
    }
    if (report.questions > 0) {
        report.hits1 /= static_cast<double>(report.questions);
        report.hits3 /= static_cast<double>(report.questions);
        report.hits10 /= static_cast<double>(report.questions);
    }
    for (auto& [cls, ch] : report.per_class) {
        if (ch.count == 0) continue;
        ch.hits1 /= static_cast<double>(ch.count);
        ch.hits3 /= static_cast<double>(ch.count);
        ch.hits10 /= static_cast<double>(ch.count);
    }

    // Fingerprint of everything that determines this report.
    {
        nlohmann::json cfg;
        cfg["ablation"] = report.ablation;
        cfg["tail"] = opt.tail == TailPolicy::KeptThenTail ? "kept_then_tail" : "kept_only";
        cfg["questions"] = report.questions;
        cfg["entities"] = pipeline.embeddings->entities.rows();
        cfg["dim"] = pipeline.embeddings->dim;
        const std::string s = cfg.dump();
        uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[19];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        report.config_fingerprint = buf;
    }
    return report;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["questions"] = questions;
    j["hits1"] = hits1;
    j["hits3"] = hits3;
    j["hits10"] = hits10;
    for (const auto& [cls, ch] : per_class) {
        j["per_class"][cls] = {{"count", ch.count},
                               {"hits1", ch.hits1},
                               {"hits3", ch.hits3},
                               {"hits10", ch.hits10}};
    }
    j["config_fingerprint"] = config_fingerprint;
    j["ablation"] = ablation;
    return j.dump(2);
}

}  // namespace stkgqa
