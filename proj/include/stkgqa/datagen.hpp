#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stkgqa/constraint.hpp"
#include "stkgqa/graph.hpp"
#include "stkgqa/rng.hpp"
#include "stkgqa/templates.hpp"

namespace stkgqa {

struct GenOptions {
    std::vector<std::string> relations;  // empty selects the template relations
    std::vector<std::string> ambiguous_relations{"influence", "linksTo"};
    int hops = 2;
    size_t max_rounds = 64;  // clue re-draw rounds over the central facts
};

// One verified question/answer record as it appears in the dataset files.
struct QAPair {
    std::string question;           // paraphraser output (identity by default)
    std::string template_question;  // raw template fill
    std::string central_entity;     // subject of the central fact
    std::string relation;
    std::string gold_object;  // object of the central fact
    std::string ts_clue;
    std::string geo_clue;
    bool clue_shared = false;  // one fact served as both clues (no alternative)
    std::vector<Constraint> constraints;
    std::vector<std::string> answers;  // sorted
    std::vector<ConstraintClass> classes;
    std::string split;  // train | dev | test
    std::string template_id;
};

// Extension point for question rewriting; the default passes text through.
using Paraphraser = std::function<std::string(const std::string&)>;

// Fully annotated facts whose relation is in `relations`, in file order.
std::vector<Fact> select_central_facts(const KnowledgeGraph& g,
                                       const std::vector<std::string>& relations);

// Two-hop facts around the central entity carrying the respective
// annotation, with ambiguous relations removed.
struct ClueCandidates {
    std::vector<Fact> temporal;
    std::vector<Fact> spatial;
};
ClueCandidates extract_clue_candidates(const KnowledgeGraph& g, const std::string& central,
                                       const GenOptions& opt = {});

// Temporal constraint from the central/clue interval pair (containment
// first), spatial constraint from the coordinate pair. Nothing is returned
// when the intervals only overlap.
std::optional<std::pair<TemporalConstraint, SpatialConstraint>> generate_constraints(
    const Fact& central, const Fact& t_clue_fact, const Fact& g_clue_fact, Rng& rng);

// The executable form of a filled seed procedure: a relation pattern with
// the object variable plus optional spatio-temporal predicates evaluated on
// each matched fact's own annotations.
struct BoundProcedure {
    std::string subject;
    std::string relation;
    std::optional<TemporalConstraint> temporal;
    std::optional<SpatialConstraint> spatial;
};

std::set<std::string> execute_procedure(const KnowledgeGraph& g, const BoundProcedure& proc);

// Acceptance test from the generation pipeline: the gold object must be
// retrieved, and removing the constraints must strictly enlarge the answer
// set. Clue annotations are re-resolved from the graph.
bool verify_qa_pair(const KnowledgeGraph& g, const QAPair& pair);

std::string qa_pair_to_json(const QAPair& pair);
QAPair qa_pair_from_json(const std::string& line);

std::vector<QAPair> load_dataset_file(const std::filesystem::path& path);
// Loads train.jsonl + dev.jsonl + test.jsonl from a dataset directory.
std::vector<QAPair> load_dataset_dir(const std::filesystem::path& dir);

struct GenReport {
    size_t requested = 0;
    size_t generated = 0;
    size_t rounds = 0;
    // census[class][split] counts, mirroring the constraint-type table.
    std::map<std::string, std::map<std::string, size_t>> census;
    std::map<std::string, size_t> split_sizes;
};

// Generates up to `target` verified pairs (deterministic in `seed`), assigns
// 8:1:1 splits, and writes train/dev/test.jsonl plus census.json to
// `out_dir`.
GenReport emit_dataset(const KnowledgeGraph& g, const std::vector<SeedTemplate>& templates,
                       size_t target, uint64_t seed, const std::filesystem::path& out_dir,
                       const GenOptions& opt = {}, const Paraphraser& paraphrase = nullptr);

}  // namespace stkgqa
