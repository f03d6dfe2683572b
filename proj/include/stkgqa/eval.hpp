#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stkgqa/datagen.hpp"
#include "stkgqa/filter.hpp"
#include "stkgqa/question.hpp"

namespace stkgqa {

// 1 iff any gold entity appears among the first k ranked answers.
int hits_at_k(const std::vector<std::string>& ranked, const std::vector<std::string>& gold,
              size_t k);

struct AblationConfig {
    bool no_entity_annotation = false;
    bool no_clue_embedding = false;
    bool no_constraint_filter = false;
    bool no_temporal_knowledge = false;
    bool no_spatial_knowledge = false;
};

// Parses "no_constraint_filter,no_temporal_knowledge"; throws on unknown
// names.
AblationConfig ablation_from_flags(const std::string& csv);
std::string ablation_to_string(const AblationConfig& a);

// Where filtered-out candidates go when computing Hits@k.
enum class TailPolicy : uint8_t {
    KeptThenTail,  // kept list first, then dropped/unevaluable in rank order
    KeptOnly,
};

struct EvalOptions {
    AblationConfig ablation;
    TailPolicy tail = TailPolicy::KeptThenTail;
    std::ostream* trace = nullptr;  // one JSON line per question when set
};

struct ClassHits {
    size_t count = 0;
    double hits1 = 0, hits3 = 0, hits10 = 0;  // ratios after aggregation
};

struct EvalReport {
    size_t questions = 0;
    double hits1 = 0, hits3 = 0, hits10 = 0;
    std::map<std::string, ClassHits> per_class;  // DTC/STC/DDC/SDC/DC
    std::string config_fingerprint;
    std::string ablation;

    std::string to_json() const;
};

struct QaPipeline {
    const KnowledgeGraph* graph = nullptr;  // already ablation-stripped if applicable
    const EmbeddingSet* embeddings = nullptr;
    const QaModel* model = nullptr;
};

// Runs annotate -> encode -> score -> filter per question and aggregates
// overall and per-constraint-class hit ratios. A question counts once in
// every class family its constraints contain. Parallel across questions
// with an ordered reduction.
EvalReport evaluate_qa(const std::vector<QAPair>& questions, const QaPipeline& pipeline,
                       const EvalOptions& opt = {});

// The ranked entity list for one question under the given options (the
// per-question piece of evaluate_qa; also used by the `answer` command).
std::vector<std::string> answer_question(const QAPair& pair, const QaPipeline& pipeline,
                                         const EvalOptions& opt, FilterReport* report = nullptr);

// Strips annotations according to the knowledge-removal flags.
KnowledgeGraph apply_knowledge_ablation(const KnowledgeGraph& g, const AblationConfig& a);

}  // namespace stkgqa
