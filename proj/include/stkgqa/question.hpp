#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stkgqa/constraint.hpp"
#include "stkgqa/embedding.hpp"
#include "stkgqa/encoder.hpp"
#include "stkgqa/graph.hpp"

namespace stkgqa {

// Special tokens; ids are pinned so checkpoints stay portable.
inline constexpr const char* kEntToken = "[ENT]";
inline constexpr const char* kTsToken = "[TS]";
inline constexpr const char* kGeoToken = "[GEO]";
inline constexpr const char* kUnkToken = "[UNK]";

// Lower-cased word tokens; punctuation stripped, entity labels use spaces
// instead of underscores.
std::vector<std::string> tokenize_text(const std::string& text);
std::string entity_label(const std::string& id);

struct SlotRef {
    size_t pos = 0;
    std::string entity;
};

struct AnnotatedQuestion {
    std::vector<std::string> tokens;
    SlotRef ent;                      // central entity (always present)
    std::optional<SlotRef> ts, geo;   // clue slots
    std::vector<Constraint> constraints;  // clue annotations resolved
    std::vector<std::string> gold;        // training/eval only
    std::optional<int> ts_year;           // year injected at the TS slot
    std::optional<GeoPoint> geo_point;    // point injected at the GEO slot
};

// Annotation coming from the dataset record.
struct GoldAnnotation {
    std::string central;
    std::optional<std::string> ts_clue;
    std::optional<std::string> geo_clue;
    std::vector<Constraint> constraints;  // clue refs only, resolved here
    std::vector<std::string> answers;
};

struct AnnotateOptions {
    // Ablation "w/o Entity Annotation": keep surface forms, slots point at
    // the first token of each mention.
    bool keep_surface_forms = false;
    // Knowledge-removal ablations: silently drop constraints whose clue
    // lacks the needed annotation instead of raising.
    bool drop_unresolvable_constraints = false;
};

AnnotatedQuestion annotate_question(const std::string& text, const GoldAnnotation& gold,
                                    const KnowledgeGraph& graph,
                                    const AnnotateOptions& opt = {});

// Longest-match dictionary linking over the graph's entity labels; clue
// roles and constraints come from the keywords preceding each mention
// (before/after/during/while, direction words, "within N miles of").
AnnotatedQuestion annotate_question(const std::string& text, const KnowledgeGraph& graph,
                                    const AnnotateOptions& opt = {});

struct QaConfig {
    size_t dim = 0;  // 0 adopts the embedding dimension
    size_t layers = 2;
    size_t heads = 4;
    size_t ff_hidden = 0;
    double learning_rate = 2e-5;
    size_t batch_size = 150;
    size_t epochs = 60;
    uint64_t seed = 0;
    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
};

// Trained QA artifacts: the sequence encoder, the answer projection W_E and
// the token vocabulary. STKG embeddings are used frozen and are not part of
// the model.
struct QaModel {
    EncoderParams encoder;
    std::vector<double> w_e;  // dim x dim, row-major
    std::vector<std::string> vocab;
    std::unordered_map<std::string, uint32_t> token_index;

    uint32_t token_id(const std::string& tok) const;
};

struct EncodeOptions {
    bool inject_clues = true;  // ablation "w/o Spatio-temporal Clue Embedding"
};

std::vector<double> encode_question(const AnnotatedQuestion& q, const QaModel& model,
                                    const EmbeddingSet& embeddings,
                                    const EncodeOptions& opt = {}, EncoderCache* cache = nullptr);

struct ScoredCandidate {
    std::string id;
    double prob = 0.0;
};
using ScoredCandidates = std::vector<ScoredCandidate>;

// Directed-max scoring (element-wise max of the two subject/object-swapped
// directions) followed by a softmax over every entity. Candidates are sorted
// by descending probability, ties by ascending id.
ScoredCandidates score_candidates(const std::vector<double>& question,
                                  const std::string& central, std::optional<int> ts_year,
                                  std::optional<GeoPoint> geo_point,
                                  const EmbeddingSet& embeddings,
                                  const std::vector<double>& w_e);

struct QaTrainResult {
    QaModel model;
    std::vector<double> epoch_train_loss;
    std::vector<double> epoch_valid_loss;
    size_t best_epoch = 0;
};

QaTrainResult train_qa(const std::vector<AnnotatedQuestion>& train,
                       const std::vector<AnnotatedQuestion>& valid,
                       const EmbeddingSet& embeddings, const QaConfig& cfg);

// Cross-entropy of the gold answer set for one question, optionally with
// gradients for the encoder parameters and W_E (the training step; exposed
// for the finite-difference check).
double qa_question_loss(const AnnotatedQuestion& q, const QaModel& model,
                        const EmbeddingSet& embeddings, std::vector<double>* encoder_grad,
                        std::vector<double>* we_grad);

// annotate -> encode -> score, truncated to the top k.
ScoredCandidates retrieve_topk(const AnnotatedQuestion& q, const QaModel& model,
                               const EmbeddingSet& embeddings, size_t k,
                               const EncodeOptions& opt = {});

// Checkpoint: text container "STKGQ v1" with the config line, vocabulary and
// float32 tensors; the loader rejects dimension mismatches.
void save_qa_checkpoint(const QaModel& model, const std::filesystem::path& path);
QaModel load_qa_checkpoint(const std::filesystem::path& path);

}  // namespace stkgqa
