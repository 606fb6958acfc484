#include <benchmark/benchmark.h>

#include "dlcov/dataset.hpp"
#include "dlcov/learner.hpp"
#include "dlcov/mmse.hpp"

using namespace dlcov;

namespace {

RMat random_rows(int n, int d, Rng& rng) {
    std::normal_distribution<double> g;
    RMat X(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = g(rng);
    return X;
}

void BM_CcmFirstRow(benchmark::State& st) {
    const auto cfg = ArrayConfig::make(static_cast<int>(st.range(0)));
    const auto p = AngularProfile::make(PasFamily::Uniform, 0.4, deg_to_rad(10.0));
    for (auto _ : st) benchmark::DoNotOptimize(ccm_first_row(cfg, p, Link::Downlink));
}
BENCHMARK(BM_CcmFirstRow)->Arg(32)->Arg(64)->Arg(256);

void BM_StructureProject(benchmark::State& st) {
    const int M = static_cast<int>(st.range(0));
    const auto cfg = ArrayConfig::make(M);
    const auto row = ccm_first_row(cfg, AngularProfile::make(PasFamily::Uniform, 0.4, deg_to_rad(10.0)),
                                   Link::Uplink);
    Rng rng(1);
    const CMat S = noisy_sample_covariance(row, NoiseSpec{20.0, 2 * M}, rng);
    for (auto _ : st) benchmark::DoNotOptimize(structure_project(S));
}
BENCHMARK(BM_StructureProject)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_EmbeddingUpdate(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    Rng rng(2);
    const RMat X = random_rows(n, 127, rng);
    const RMat R = random_rows(n, 127, rng);
    const double m = median_pairwise_distance(X);
    const RMat L = build_laplacian(X, m);
    const RMat Psi = kernel_matrix(X, m, 1e-8);
    for (auto _ : st) benchmark::DoNotOptimize(update_embedding(L, Psi, R, 0.1, 100.0));
}
BENCHMARK(BM_EmbeddingUpdate)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SigmaStep(benchmark::State& st) {
    Rng rng(3);
    const RMat X = random_rows(400, 127, rng);
    const RMat R = random_rows(400, 127, rng);
    const double m = median_pairwise_distance(X);
    Hyperparams h;
    for (auto _ : st) benchmark::DoNotOptimize(update_sigma(R, X, m, h, m));
}
BENCHMARK(BM_SigmaStep)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& st) {
    Rng rng(4);
    TrainedInterpolator model;
    model.centers = random_rows(400, 127, rng);
    model.coeffs = random_rows(400, 127, rng);
    model.embedding = model.coeffs;
    model.sigma = median_pairwise_distance(model.centers);
    const RVec x = random_rows(1, 127, rng).row(0).transpose();
    for (auto _ : st) benchmark::DoNotOptimize(predict_raw(model, x));
}
BENCHMARK(BM_Predict);

void BM_MmseGain(benchmark::State& st) {
    Rng rng(5);
    const int M = 64;
    const CMat G = random_rows(M, M, rng).cast<cdouble>();
    const CMat R = G * G.adjoint();
    const CMat X = make_pilots(32, M, 1.0, PilotStyle::DftRows, rng);
    for (auto _ : st) benchmark::DoNotOptimize(mmse_gain(R, X, 0.01));
}
BENCHMARK(BM_MmseGain);

}  // namespace

BENCHMARK_MAIN();
