// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: acceptance [work-dir]

#include <cstdio>
#include <iostream>

#include "battery.hpp"

int main(int argc, char** argv) {
    oscgeo::checks::BatteryOptions options;
    if (argc > 1) options.work_dir = argv[1];

    const auto results = oscgeo::checks::run_battery(options, [](const oscgeo::checks::CheckResult& r) {
        std::printf("[%s] criterion %2d  %-34s %8.2f s  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.seconds, r.measured.dump().c_str());
        std::fflush(stdout);
    });
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::printf("%zu/%zu criteria passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
}
