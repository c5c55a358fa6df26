#include "panlut/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <new>
#include <string>

#include "panlut/synth.hpp"

namespace panlut {

long peak_rss_kb() {
    std::ifstream is("/proc/self/status");
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            long kb = 0;
            for (char c : line)
                if (c >= '0' && c <= '9') kb = kb * 10 + (c - '0');
            return kb;
        }
    }
    return 0;
}

std::vector<BenchRow> run_bench(const PanLutModel& model, const std::vector<int>& sizes,
                                std::uint64_t seed, int threads, int runs) {
    using clock = std::chrono::steady_clock;
    std::vector<BenchRow> rows;
    for (int size : sizes) {
        BenchRow row;
        row.size = size;
        try {
            if (size < 4 || size % 4 != 0)
                throw DomainError("bench: sizes must be positive multiples of 4");
            Rng rng(seed ^ static_cast<std::uint64_t>(size));
            const MultiBandImage pan = random_image(size, size, 1, rng);
            const MultiBandImage ms = random_image(size / 4, size / 4, 4, rng);
            SharpenOptions opts;
            opts.threads = threads;
            const long rss_before = peak_rss_kb();
            (void)sharpen(model, pan, ms, opts); // warm-up
            std::vector<double> times;
            times.reserve(runs);
            for (int i = 0; i < runs; ++i) {
                const auto t0 = clock::now();
                volatile double sink = sharpen(model, pan, ms, opts).samples[0];
                (void)sink;
                const auto t1 = clock::now();
                times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
            }
            std::sort(times.begin(), times.end());
            row.median_ms = times[times.size() / 2];
            row.peak_mb = static_cast<double>(peak_rss_kb() - rss_before) / 1024.0;
        } catch (const std::bad_alloc&) {
            row.oom = true;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace panlut
