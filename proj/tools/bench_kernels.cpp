// Compares the serial reference kernels against the OpenMP versions on
// problem sizes representative of the embedding trainer (score-all-entities
// matvecs, gradient reductions, rank-1 table updates, optimizer sweeps) and
// prints a speedup table. The two variants are bitwise-equal by
// construction; this target is about throughput, tests/test_kernels.cpp is
// about equality.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stkgqa/embedding.hpp"
#include "stkgqa/kernels.hpp"
#include "stkgqa/rng.hpp"
#include "stkgqa/synth.hpp"

using namespace stkgqa;

namespace {

double now_seconds() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
#endif
}

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        double t0 = now_seconds();
        fn();
        best = std::min(best, now_seconds() - t0);
    }
    return best;
}

void report_row(const char* name, double serial, double parallel) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
                serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    size_t rows = 15000, cols = 1024;  // full-scale STKG shape
    if (argc > 2) {
        rows = std::stoul(argv[1]);
        cols = std::stoul(argv[2]);
    }
    const int reps = 5;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif
    std::printf("entity table: %zu x %zu\n\n", rows, cols);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    Rng rng(1);
    std::vector<double> table(rows * cols), x(cols), y(rows), g(rows), u(cols);
    for (double& v : table) v = rng.next_normal();
    for (double& v : x) v = rng.next_normal();
    for (double& v : g) v = rng.next_normal();

    report_row("matvec (score entities)",
               time_best_of(reps, [&] { kernels::matvec_ref(table.data(), rows, cols, x.data(), y.data()); }),
               time_best_of(reps, [&] { kernels::matvec(table.data(), rows, cols, x.data(), y.data()); }));

    report_row("matvec_t (grad reduce)",
               time_best_of(reps, [&] { kernels::matvec_t_ref(table.data(), rows, cols, g.data(), u.data()); }),
               time_best_of(reps, [&] { kernels::matvec_t(table.data(), rows, cols, g.data(), u.data()); }));

    report_row("rank1_update (grad table)",
               time_best_of(reps, [&] { kernels::rank1_update_ref(table.data(), rows, cols, g.data(), x.data()); }),
               time_best_of(reps, [&] { kernels::rank1_update(table.data(), rows, cols, g.data(), x.data()); }));

    {
        std::vector<double> accum(rows * cols, 0.0), grad(rows * cols);
        for (double& v : grad) v = rng.next_normal();
        report_row("adagrad_step (full table)",
                   time_best_of(reps, [&] {
                       kernels::adagrad_step_ref(table.data(), accum.data(), grad.data(),
                                                 table.size(), 0.1, 1e-10);
                   }),
                   time_best_of(reps, [&] {
                       kernels::adagrad_step(table.data(), accum.data(), grad.data(),
                                             table.size(), 0.1, 1e-10);
                   }));
    }

    {
        const size_t m = 256, k = 512, n = 256;
        std::vector<double> a(m * k), b(k * n), c(m * n);
        for (double& v : a) v = rng.next_normal();
        for (double& v : b) v = rng.next_normal();
        report_row("matmul 256x512x256",
                   time_best_of(reps, [&] { kernels::matmul_ref(a.data(), b.data(), c.data(), m, k, n); }),
                   time_best_of(reps, [&] { kernels::matmul(a.data(), b.data(), c.data(), m, k, n); }));
    }

    // One full training batch on the synthetic lab graph, exercising the
    // composed pipeline rather than a single kernel. Serial timing comes
    // from forcing one thread via OMP_NUM_THREADS.
    {
        KnowledgeGraph graph = make_synthetic_stkg({});
        EmbeddingSet params = init_embeddings(graph, 64, 1);
        Gradients grads = Gradients::like(params);
        auto batch = index_facts(graph.facts(), params);
        double t = time_best_of(3, [&] {
            loss_and_gradients(batch, params, ModelKind::STComplex, grads);
        });
        std::printf("\nfull loss+grad batch (%zu facts, %zu entities, dim 64): %.3f ms\n",
                    batch.size(), params.entities.rows(), t * 1e3);
    }
    return 0;
}
