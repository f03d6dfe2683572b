#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stkgqa/complex_vec.hpp"
#include "stkgqa/graph.hpp"

namespace stkgqa {

enum class ModelKind : uint8_t { Complex, TComplex, STComplex };

const char* model_name(ModelKind m);
ModelKind model_from_name(const std::string& name);  // throws on unknown

// Complex embedding table: one packed row [re..., im...] per id.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::vector<std::string> names, size_t dim);

    size_t rows() const { return names_.size(); }
    size_t dim() const { return dim_; }
    size_t row_width() const { return 2 * dim_; }

    std::span<double> row(size_t i) { return {data_.data() + i * row_width(), row_width()}; }
    std::span<const double> row(size_t i) const {
        return {data_.data() + i * row_width(), row_width()};
    }

    const std::vector<std::string>& names() const { return names_; }
    std::optional<size_t> index_of(const std::string& id) const;

    ComplexVector vector_at(size_t i) const;
    void set_row(size_t i, const ComplexVector& v);

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    size_t value_count() const { return data_.size(); }

private:
    size_t dim_ = 0;
    std::vector<std::string> names_;
    std::unordered_map<std::string, size_t> index_;
    std::vector<double> data_;
};

// All learned parameters of one factorization model. Vocabularies are fixed
// at initialization from the training graph; ids are sorted so runs are
// reproducible.
struct EmbeddingSet {
    size_t dim = 0;
    EmbeddingTable entities;
    EmbeddingTable relations;
    EmbeddingTable timestamps;  // keyed by year, e.g. "1914"
    EmbeddingTable locations;   // keyed by quantized "lat,lon", e.g. "48.14,11.58"

    ComplexVector entity_vector(const std::string& id) const;  // throws on unknown id
};

std::string timestamp_key(int year);
std::string location_key(const GeoPoint& p);  // 2-decimal quantization

// Gaussian(0, 1/sqrt(dim)) initialization over the graph's vocabularies.
// A fact's timestamp id is its start year; the timestamp vocabulary still
// covers end years so question-side clue lookups resolve.
EmbeddingSet init_embeddings(const KnowledgeGraph& g, size_t dim, uint64_t seed);

struct TrainConfig {
    size_t dim = 512;
    double learning_rate = 0.1;
    size_t batch_size = 1000;
    size_t epochs = 50;
    uint64_t seed = 0;
    double adagrad_eps = 1e-10;
};

// Facts resolved to table rows; t/l of -1 select the identity factor.
struct IndexedFact {
    uint32_t s = 0, r = 0, o = 0;
    int32_t t = -1, l = -1;
};

std::vector<IndexedFact> index_facts(const std::vector<Fact>& facts, const EmbeddingSet& params);

// Dense gradient buffers matching the parameter tables.
struct Gradients {
    std::vector<double> entities, relations, timestamps, locations;

    static Gradients like(const EmbeddingSet& p);
    void zero();
};

// Mean cross-entropy of the gold object under a full softmax over every
// entity as replacement object, plus gradients for all touched parameters.
double loss_and_gradients(const std::vector<Fact>& batch, const EmbeddingSet& params,
                          ModelKind model, Gradients& grads);
double loss_and_gradients(const std::vector<IndexedFact>& batch, const EmbeddingSet& params,
                          ModelKind model, Gradients& grads);

struct SplitFacts {
    std::vector<Fact> train, valid, test;
};

// Seeded shuffle, 8:1:1.
SplitFacts split_facts(const std::vector<Fact>& facts, uint64_t seed);

struct HitsReport {
    double hits1 = 0, hits3 = 0, hits10 = 0;
    size_t count = 0;
};

// Masked-object ranking over all entities; ties resolved by ascending
// entity id. `ranking_dump`, when given, receives the full ranked id list
// per test fact (used by the oracle test).
HitsReport evaluate_completion(const std::vector<Fact>& test, const EmbeddingSet& params,
                               ModelKind model,
                               std::vector<std::vector<std::string>>* ranking_dump = nullptr);

struct EmbedTrainResult {
    EmbeddingSet params;  // from the epoch with the best validation Hits@10
    std::vector<double> epoch_loss;
    std::vector<double> epoch_valid_hits10;
    size_t best_epoch = 0;  // 1-based; 0 means initialization was returned
};

EmbedTrainResult train_embeddings_on_split(EmbeddingSet init, const std::vector<Fact>& train,
                                           const std::vector<Fact>& valid, ModelKind model,
                                           const TrainConfig& cfg);

// Convenience wrapper: vocabularies from the whole graph, facts split 8:1:1
// by cfg.seed, trained on the first two parts.
EmbedTrainResult train_embeddings(const KnowledgeGraph& g, ModelKind model,
                                  const TrainConfig& cfg);

// Checkpoint: header "STKGE v1 <model> <dim>", then one line per id:
//   kind \t id \t re... \t im...
// with float32-precision decimals. The loader validates the dimension.
void save_embedding_checkpoint(const EmbeddingSet& params, ModelKind model,
                               const std::filesystem::path& path);
std::pair<EmbeddingSet, ModelKind> load_embedding_checkpoint(const std::filesystem::path& path);

}  // namespace stkgqa
