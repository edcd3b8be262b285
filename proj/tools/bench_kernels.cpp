// Times the OpenMP kernels against the serial reference at a few shapes,
// including an encoder forward pass at published-scale dimensions.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dancer/kernels.hpp"
#include "dancer/layers.hpp"
#include "dancer/rng.hpp"
#include "dancer/seqops.hpp"
#include "dancer/tensor.hpp"

using namespace dancer;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
    fn();  // warm caches and thread pool outside the timed loop
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

Tensor random_tensor(std::vector<int64_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.next_real(-1, 1);
    return t;
}

void bench_matvec(int64_t m, int64_t n, int reps) {
    Rng rng(1);
    Tensor A = random_tensor({m, n}, rng);
    Tensor x = random_tensor({n}, rng);
    Tensor y({m});
    double serial = seconds(
        [&] { kernels::serial::matvec(y.data(), A.data(), x.data(), m, n, false); }, reps);
    double parallel =
        seconds([&] { kernels::matvec(y.data(), A.data(), x.data(), m, n, false); }, reps);
    double flops = 2.0 * static_cast<double>(m) * static_cast<double>(n);
    std::printf("matvec %5ldx%-5ld  serial %8.3f us (%7.2f MFLOP/s)  omp %8.3f us (%7.2f "
                "MFLOP/s)  speedup %.2fx\n",
                static_cast<long>(m), static_cast<long>(n), serial * 1e6, flops / serial / 1e6,
                parallel * 1e6, flops / parallel / 1e6, serial / parallel);
}

void bench_matmul(int64_t m, int64_t n, int64_t k, int reps) {
    Rng rng(2);
    Tensor A = random_tensor({m, k}, rng);
    Tensor B = random_tensor({n, k}, rng);
    Tensor C({m, n});
    double serial = seconds(
        [&] { kernels::serial::matmul_nt(C.data(), A.data(), B.data(), m, n, k, false); }, reps);
    double parallel = seconds(
        [&] { kernels::matmul_nt(C.data(), A.data(), B.data(), m, n, k, false); }, reps);
    double flops = 2.0 * static_cast<double>(m) * static_cast<double>(n) * static_cast<double>(k);
    std::printf("matmul %4ldx%-4ldx%-4ld serial %8.3f ms (%7.2f MFLOP/s)  omp %8.3f ms (%7.2f "
                "MFLOP/s)  speedup %.2fx\n",
                static_cast<long>(m), static_cast<long>(n), static_cast<long>(k), serial * 1e3,
                flops / serial / 1e6, parallel * 1e3, flops / parallel / 1e6, serial / parallel);
}

void bench_encoder(int64_t vocab, int64_t embed, int64_t hidden, int64_t len, int reps) {
    EncoderDecoderConfig cfg;
    cfg.vocab_size = vocab;
    cfg.embed_dim = embed;
    cfg.hidden_dim = hidden;
    cfg.max_len = len;
    ParamSet params;
    Rng rng(3);
    Seq2Seq::init_params(cfg, params, rng);
    Seq2Seq net(cfg, params);
    std::vector<int32_t> ids;
    ids.push_back(2);
    for (int64_t i = 0; i < len; ++i)
        ids.push_back(static_cast<int32_t>(4 + rng.next_index(static_cast<uint64_t>(vocab - 4))));
    ids.push_back(3);
    double t = seconds(
        [&] {
            Tape tape;
            net.encode(tape, ids);
        },
        reps);
    std::printf("encoder V=%ld E=%ld H=%ld T=%ld: %8.3f ms per pass\n", static_cast<long>(vocab),
                static_cast<long>(embed), static_cast<long>(hidden), static_cast<long>(len + 2),
                t * 1e3);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run the serial path\n\n");
#endif
    bench_matvec(256, 96, 2000);
    bench_matvec(1024, 1024, 500);
    bench_matvec(4096, 2048, 100);
    std::printf("\n");
    bench_matmul(128, 128, 128, 50);
    bench_matmul(512, 512, 512, 5);
    std::printf("\n");
    bench_encoder(256, 32, 64, 30, 50);    // desk scale
    bench_encoder(4632, 256, 1024, 30, 2); // published scale
    return 0;
}
