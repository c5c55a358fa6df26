// Timing and peak-memory harness for the inference path.

#ifndef PANLUT_BENCH_HPP
#define PANLUT_BENCH_HPP

#include <cstdint>
#include <vector>

#include "panlut/pipeline.hpp"

namespace panlut {

struct BenchRow {
    int size = 0;         // PAN edge length; MS is size/4
    double median_ms = 0; // median of timed runs
    double peak_mb = 0;   // resident high-water delta across the runs
    bool oom = false;
};

// Peak resident set size of this process (VmHWM), in kB; 0 if unavailable.
long peak_rss_kb();

// For each size: synthesize seeded random PAN (size^2) and MS ((size/4)^2 x 4),
// one warm-up sharpen, then `runs` timed runs. Allocation failures mark the
// row OOM and the sweep continues.
std::vector<BenchRow> run_bench(const PanLutModel& model, const std::vector<int>& sizes,
                                std::uint64_t seed, int threads, int runs = 5);

} // namespace panlut

#endif
