// The distro benchmark_main archive is LTO bytecode from another compiler
// release, so the entry point is provided here.
#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
