// Compares the parallel kernels against their serial runs and the brute-force
// reference path finder. Every pair must produce identical results; timings
// show what the OpenMP paths buy on this machine.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "rtbwt/denoise.hpp"
#include "rtbwt/engine.hpp"
#include "rtbwt/geometry.hpp"
#include "rtbwt/parallel.hpp"
#include "rtbwt/reference.hpp"
#include "rtbwt/wavelet.hpp"

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool match) {
    std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   %s\n", name, serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, match ? "identical" : "MISMATCH");
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

} // namespace

int main() {
    using rtbwt::set_parallel;
    std::printf("workers available: %d\n\n", rtbwt::worker_count());
    std::printf("%-28s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

    // Greedy path over 4096 random 2-D points, plus the brute-force reference.
    {
        std::mt19937_64 rng(7);
        const std::size_t m = 4096;
        std::vector<double> flat(2 * m);
        for (double& v : flat) v = uniform01(rng);
        const rtbwt::PointSet points(2, flat);

        auto t0 = std::chrono::steady_clock::now();
        const rtbwt::Permutation ref =
            rtbwt::reference::nn_path(points, 0, rtbwt::DistanceMetric::squared_euclidean);
        const double ref_ms = ms_since(t0);

        set_parallel(false);
        t0 = std::chrono::steady_clock::now();
        const rtbwt::Permutation serial =
            rtbwt::nn_path(points, 0, rtbwt::DistanceMetric::squared_euclidean);
        const double serial_ms = ms_since(t0);

        set_parallel(true);
        t0 = std::chrono::steady_clock::now();
        const rtbwt::Permutation parallel =
            rtbwt::nn_path(points, 0, rtbwt::DistanceMetric::squared_euclidean);
        const double parallel_ms = ms_since(t0);

        report("nn_path m=4096", serial_ms, parallel_ms, serial == parallel && serial == ref);
        std::printf("%-28s %10.1f ms   (brute-force rescan baseline)\n", "  reference walker", ref_ms);
    }

    // Full transform of a 16384-sample signal at depth 9.
    {
        std::mt19937_64 rng(11);
        const std::size_t n = 16384;
        std::vector<double> signal(n);
        for (double& v : signal) v = uniform01(rng);
        const rtbwt::PointSet points(1, signal);
        const rtbwt::WaveletFilterPair filt = rtbwt::make_filter("sym8");

        set_parallel(true);
        const rtbwt::OperatorSet ops =
            rtbwt::build_operators(points, 9, filt, rtbwt::DistanceMetric::squared_euclidean);

        set_parallel(false);
        auto t0 = std::chrono::steady_clock::now();
        const rtbwt::CoefficientPyramid ser = rtbwt::decompose(signal, ops, filt);
        const std::vector<double> ser_rec = rtbwt::reconstruct(ser, ops, filt);
        const double serial_ms = ms_since(t0);

        set_parallel(true);
        t0 = std::chrono::steady_clock::now();
        const rtbwt::CoefficientPyramid par = rtbwt::decompose(signal, ops, filt);
        const std::vector<double> par_rec = rtbwt::reconstruct(par, ops, filt);
        const double parallel_ms = ms_since(t0);

        const bool match = ser.details == par.details && ser.approx == par.approx && ser_rec == par_rec;
        report("decompose+reconstruct 16k", serial_ms, parallel_ms, match);
    }

    // End-to-end denoise of a synthetic 64x64 image with a fixed threshold.
    {
        rtbwt::Image img(64, 64);
        for (int r = 0; r < img.height; ++r) {
            for (int c = 0; c < img.width; ++c) {
                img.at(r, c) = 128.0 + 90.0 * std::sin(r * 0.21) * std::cos(c * 0.13);
            }
        }
        rtbwt::DenoiseConfig cfg;
        cfg.sigma = 25.0;
        cfg.window = 15;
        cfg.threshold_auto = false;
        cfg.threshold = 300.0;
        const rtbwt::Image noisy = rtbwt::add_awgn(img, cfg.sigma, cfg.seed);

        set_parallel(false);
        auto t0 = std::chrono::steady_clock::now();
        const rtbwt::Image ser = rtbwt::denoise(noisy, cfg);
        const double serial_ms = ms_since(t0);

        set_parallel(true);
        t0 = std::chrono::steady_clock::now();
        const rtbwt::Image par = rtbwt::denoise(noisy, cfg);
        const double parallel_ms = ms_since(t0);

        report("denoise 64x64", serial_ms, parallel_ms, ser.pixels == par.pixels);
    }

    set_parallel(true);
    return 0;
}
