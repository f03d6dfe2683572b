#include "stkgqa/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stkgqa/datagen.hpp"
#include "stkgqa/embedding.hpp"
#include "stkgqa/eval.hpp"
#include "stkgqa/filter.hpp"
#include "stkgqa/question.hpp"
#include "stkgqa/synth.hpp"
#include "stkgqa/templates.hpp"

namespace stkgqa {

namespace {

struct CommonArgs {
    std::string graph;
    std::string ablate;
    uint64_t seed = 0;
};

KnowledgeGraph load_ablated_graph(const CommonArgs& c, std::ostream& err) {
    KnowledgeGraph g = KnowledgeGraph::load(c.graph);
    if (g.duplicates_dropped() > 0)
        err << "warning: dropped " << g.duplicates_dropped() << " duplicate facts\n";
    return apply_knowledge_ablation(g, ablation_from_flags(c.ablate));
}

void print_stats(const GraphStats& s, std::ostream& out) {
    out << "facts\t" << s.facts << '\n'
        << "facts_with_interval\t" << s.facts_with_interval << '\n'
        << "facts_with_location\t" << s.facts_with_location << '\n'
        << "facts_fully_annotated\t" << s.facts_fully_annotated << '\n'
        << "entities\t" << s.entities << '\n'
        << "relations\t" << s.relations << '\n'
        << "timestamps\t" << s.timestamps << '\n'
        << "coordinates\t" << s.coordinates << '\n'
        << "time_span\t" << s.span_min << '-' << s.span_max << '\n';
}

void print_hits(const char* label, const HitsReport& h, std::ostream& out) {
    out << label << "\thits@1 " << h.hits1 << "\thits@3 " << h.hits3 << "\thits@10 " << h.hits10
        << "\t(" << h.count << " facts)\n";
}

std::vector<QAPair> load_split(const std::filesystem::path& dir, const std::string& split) {
    if (split == "all") return load_dataset_dir(dir);
    return load_dataset_file(dir / (split + ".jsonl"));
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"spatio-temporal knowledge-graph question answering lab"};
    app.require_subcommand(1);
    app.set_config("--config");

    CommonArgs common;

    // ingest ----------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "load a fact file, complete locations, save");
    std::string ingest_out;
    ingest->add_option("--graph", common.graph, "input fact TSV")->required();
    ingest->add_option("--out", ingest_out, "output fact TSV")->required();

    // stats -----------------------------------------------------------------
    auto* stats = app.add_subcommand("stats", "print graph statistics");
    stats->add_option("--graph", common.graph, "input fact TSV")->required();

    // gen-dataset -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-dataset", "generate a verified QA dataset");
    std::string templates_path = "data/seed_templates.json", gen_out = "dataset";
    size_t gen_count = 1000;
    std::string ambiguous = "influence,linksTo";
    gen->add_option("--graph", common.graph)->required();
    gen->add_option("--templates", templates_path, "seed template JSON");
    gen->add_option("--count", gen_count, "target number of pairs");
    gen->add_option("--seed", common.seed);
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--ambiguous", ambiguous, "comma-separated blocked relations");

    // train-embed -------------------------------------------------------------
    auto* tr_embed = app.add_subcommand("train-embed", "train STKG embeddings");
    std::string model_name_arg = "stcomplex", embed_out = "embed.ckpt";
    TrainConfig tc;
    tr_embed->add_option("--graph", common.graph)->required();
    tr_embed->add_option("--model", model_name_arg, "complex|tcomplex|stcomplex");
    tr_embed->add_option("--dim", tc.dim);
    tr_embed->add_option("--epochs", tc.epochs);
    tr_embed->add_option("--batch", tc.batch_size);
    tr_embed->add_option("--lr", tc.learning_rate);
    tr_embed->add_option("--seed", common.seed);
    tr_embed->add_option("--out", embed_out);
    tr_embed->add_option("--ablate", common.ablate, "knowledge-removal flags");

    // eval-embed --------------------------------------------------------------
    auto* ev_embed = app.add_subcommand("eval-embed", "masked-object completion metrics");
    std::string embed_ckpt;
    std::string eval_embed_out;
    ev_embed->add_option("--graph", common.graph)->required();
    ev_embed->add_option("--embed", embed_ckpt, "embedding checkpoint")->required();
    ev_embed->add_option("--seed", common.seed, "split seed (must match training)");
    ev_embed->add_option("--ablate", common.ablate);
    ev_embed->add_option("--out", eval_embed_out, "optional JSON report path");

    // train-qa ----------------------------------------------------------------
    auto* tr_qa = app.add_subcommand("train-qa", "train the question model");
    std::string dataset_dir, qa_out = "qa.ckpt";
    QaConfig qc;
    tr_qa->add_option("--graph", common.graph)->required();
    tr_qa->add_option("--dataset", dataset_dir, "dataset directory")->required();
    tr_qa->add_option("--embed", embed_ckpt, "embedding checkpoint")->required();
    tr_qa->add_option("--epochs", qc.epochs);
    tr_qa->add_option("--batch", qc.batch_size);
    tr_qa->add_option("--lr", qc.learning_rate);
    tr_qa->add_option("--seed", common.seed);
    tr_qa->add_option("--out", qa_out);
    tr_qa->add_option("--ablate", common.ablate);

    // eval-qa -----------------------------------------------------------------
    auto* ev_qa = app.add_subcommand("eval-qa", "end-to-end QA evaluation");
    std::string qa_ckpt, report_out, trace_out, split = "test";
    bool kept_only = false;
    ev_qa->add_option("--graph", common.graph)->required();
    ev_qa->add_option("--dataset", dataset_dir)->required();
    ev_qa->add_option("--embed", embed_ckpt)->required();
    ev_qa->add_option("--qa", qa_ckpt)->required();
    ev_qa->add_option("--split", split, "train|dev|test|all");
    ev_qa->add_option("--ablate", common.ablate, "ablation flags");
    ev_qa->add_option("--out", report_out, "report JSON path");
    ev_qa->add_option("--trace", trace_out, "filter trace JSONL path");
    ev_qa->add_flag("--kept-only", kept_only, "drop filtered candidates from the ranking");

    // answer ------------------------------------------------------------------
    auto* answer = app.add_subcommand("answer", "answer a single question");
    std::string question_text;
    size_t topk = 10;
    bool answer_trace = false;
    answer->add_option("--graph", common.graph)->required();
    answer->add_option("--embed", embed_ckpt)->required();
    answer->add_option("--qa", qa_ckpt)->required();
    answer->add_option("--question", question_text)->required();
    answer->add_option("--k", topk);
    answer->add_flag("--trace", answer_trace, "print the filter trace");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*ingest) {
            KnowledgeGraph g = KnowledgeGraph::load(common.graph);
            out << "loaded " << g.facts().size() << " facts, " << g.duplicates_dropped()
                << " duplicates dropped\n";
            KnowledgeGraph completed = g.complete_fact_locations();
            completed.save(ingest_out);
            size_t gained = completed.stats().facts_with_location - g.stats().facts_with_location;
            out << "completed locations for " << gained << " facts -> " << ingest_out << '\n';
            print_stats(completed.stats(), out);
        } else if (*stats) {
            KnowledgeGraph g = KnowledgeGraph::load(common.graph);
            if (g.duplicates_dropped() > 0)
                err << "warning: dropped " << g.duplicates_dropped() << " duplicate facts\n";
            print_stats(g.stats(), out);
        } else if (*gen) {
            KnowledgeGraph g = KnowledgeGraph::load(common.graph);
            GenOptions gopt;
            gopt.ambiguous_relations.clear();
            std::stringstream ss(ambiguous);
            std::string rel;
            while (std::getline(ss, rel, ','))
                if (!rel.empty()) gopt.ambiguous_relations.push_back(rel);
            auto templates = load_templates(templates_path);
            out << "resolved config: seed=" << common.seed << " count=" << gen_count
                << " templates=" << templates.size() << '\n';
            GenReport rep = emit_dataset(g, templates, gen_count, common.seed, gen_out, gopt);
            out << "generated " << rep.generated << "/" << rep.requested << " pairs in "
                << rep.rounds << " rounds -> " << gen_out << '\n';
            for (const auto& [cls, per_split] : rep.census) {
                out << cls;
                for (const auto& [s, n] : per_split) out << '\t' << s << ' ' << n;
                out << '\n';
            }
        } else if (*tr_embed) {
            KnowledgeGraph g = load_ablated_graph(common, err);
            tc.seed = common.seed;
            ModelKind model = model_from_name(model_name_arg);
            out << "resolved config: model=" << model_name_arg << " dim=" << tc.dim
                << " epochs=" << tc.epochs << " batch=" << tc.batch_size
                << " lr=" << tc.learning_rate << " seed=" << tc.seed << '\n';
            EmbedTrainResult r = train_embeddings(g, model, tc);
            save_embedding_checkpoint(r.params, model, embed_out);
            out << "best epoch " << r.best_epoch << " valid hits@10 "
                << (r.best_epoch > 0 ? r.epoch_valid_hits10[r.best_epoch - 1] : 0.0) << " -> "
                << embed_out << '\n';
        } else if (*ev_embed) {
            KnowledgeGraph g = load_ablated_graph(common, err);
            auto [params, model] = load_embedding_checkpoint(embed_ckpt);
            out << "resolved config: embed=" << embed_ckpt << " seed=" << common.seed
                << " ablate=" << common.ablate << '\n';
            SplitFacts split_facts_ = split_facts(g.facts(), common.seed);
            HitsReport h = evaluate_completion(split_facts_.test, params, model);
            print_hits(model_name(model), h, out);
            if (!eval_embed_out.empty()) {
                nlohmann::json j{{"model", model_name(model)},
                                 {"hits1", h.hits1},
                                 {"hits3", h.hits3},
                                 {"hits10", h.hits10},
                                 {"facts", h.count},
                                 {"seed", common.seed}};
                std::ofstream f(eval_embed_out);
                f << j.dump(2) << '\n';
            }
        } else if (*tr_qa) {
            KnowledgeGraph g = load_ablated_graph(common, err);
            auto [params, model] = load_embedding_checkpoint(embed_ckpt);
            AblationConfig ab = ablation_from_flags(common.ablate);
            AnnotateOptions aopt;
            aopt.keep_surface_forms = ab.no_entity_annotation;
            aopt.drop_unresolvable_constraints =
                ab.no_temporal_knowledge || ab.no_spatial_knowledge;

            auto to_annotated = [&](const std::vector<QAPair>& pairs) {
                std::vector<AnnotatedQuestion> qs;
                qs.reserve(pairs.size());
                for (const auto& p : pairs) {
                    GoldAnnotation gold;
                    gold.central = p.central_entity;
                    if (!p.ts_clue.empty()) gold.ts_clue = p.ts_clue;
                    if (!p.geo_clue.empty()) gold.geo_clue = p.geo_clue;
                    gold.constraints = p.constraints;
                    gold.answers = p.answers;
                    qs.push_back(annotate_question(p.question, gold, g, aopt));
                }
                return qs;
            };
            auto train_qs = to_annotated(load_split(dataset_dir, "train"));
            auto dev_qs = to_annotated(load_split(dataset_dir, "dev"));
            qc.seed = common.seed;
            qc.dim = params.dim;
            out << "resolved config: dim=" << qc.dim << " layers=" << qc.layers
                << " heads=" << qc.heads << " epochs=" << qc.epochs << " batch=" << qc.batch_size
                << " lr=" << qc.learning_rate << " seed=" << qc.seed << '\n';
            QaTrainResult r = train_qa(train_qs, dev_qs, params, qc);
            save_qa_checkpoint(r.model, qa_out);
            out << "best epoch " << r.best_epoch << " valid loss "
                << (r.best_epoch > 0 ? r.epoch_valid_loss[r.best_epoch - 1] : 0.0) << " -> "
                << qa_out << '\n';
        } else if (*ev_qa) {
            KnowledgeGraph g = load_ablated_graph(common, err);
            auto [params, model] = load_embedding_checkpoint(embed_ckpt);
            QaModel qa = load_qa_checkpoint(qa_ckpt);
            auto questions = load_split(dataset_dir, split);
            out << "resolved config: embed=" << embed_ckpt << " qa=" << qa_ckpt
                << " split=" << split << " seed=" << common.seed << " ablate=" << common.ablate
                << '\n';

            EvalOptions opt;
            opt.ablation = ablation_from_flags(common.ablate);
            opt.tail = kept_only ? TailPolicy::KeptOnly : TailPolicy::KeptThenTail;
            std::ofstream trace_file;
            if (!trace_out.empty()) {
                trace_file.open(trace_out);
                opt.trace = &trace_file;
            }
            QaPipeline pipeline{&g, &params, &qa};
            EvalReport report = evaluate_qa(questions, pipeline, opt);
            out << report.to_json() << '\n';
            if (!report_out.empty()) {
                std::ofstream f(report_out);
                f << report.to_json() << '\n';
            }
        } else if (*answer) {
            KnowledgeGraph g = load_ablated_graph(common, err);
            auto [params, model] = load_embedding_checkpoint(embed_ckpt);
            QaModel qa = load_qa_checkpoint(qa_ckpt);
            err << "resolved config: embed=" << embed_ckpt << " qa=" << qa_ckpt << " k=" << topk
                << '\n';

            AnnotatedQuestion q = annotate_question(question_text, g);
            auto question = encode_question(q, qa, params);
            ScoredCandidates ranked =
                score_candidates(question, q.ent.entity, q.ts_year, q.geo_point, params, qa.w_e);
            FilterReport report = filter_candidates(ranked, q.constraints, g);
            if (answer_trace) out << filter_trace_json(question_text, report) << '\n';

            size_t shown = 0;
            for (const auto& c : report.kept) {
                if (shown++ >= topk) break;
                out << c.id << '\t' << c.prob << '\n';
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace stkgqa
