#include <benchmark/benchmark.h>

#include <string>

#include "safegen/llm_handler.hpp"
#include "safegen/signature_matcher.hpp"

namespace {

using namespace safegen;

std::string sample_source(int functions) {
  std::string code = "#include <cmath>\n#include \"acc_api.h\"\n\n";
  for (int i = 0; i < functions; ++i) {
    code += "// helper " + std::to_string(i) + "\n";
    code += "static double helper" + std::to_string(i) +
            "(double a, double b) {\n  const char* s = \"{ not code }\";\n  static_cast<void>(s);\n"
            "  return a > b ? a : b;\n}\n\n";
  }
  code += "AccCommand computeAccCommand(double v, double a, double gap, double rel) {\n  return {};\n}\n";
  return code;
}

void BM_ExtractCode(benchmark::State& state) {
  const std::string body = sample_source(static_cast<int>(state.range(0)));
  const std::string response = "Draft:\n```cpp\nint f(\n```\nFinal:\n```cpp\n" + body + "```\nDone.\n";
  for (auto _ : state) {
    auto a = extract_code(response, LanguageTarget::Cpp);
    benchmark::DoNotOptimize(a.code.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(response.size()));
}
BENCHMARK(BM_ExtractCode)->Arg(4)->Arg(64);

void BM_FindDefinitions(benchmark::State& state) {
  const std::string code = sample_source(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto defs = find_definitions(code, "computeAccCommand");
    benchmark::DoNotOptimize(defs.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(code.size()));
}
BENCHMARK(BM_FindDefinitions)->Arg(4)->Arg(64);

void BM_ContentHash(benchmark::State& state) {
  const std::string code = sample_source(64);
  for (auto _ : state) benchmark::DoNotOptimize(content_hash(code));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(code.size()));
}
BENCHMARK(BM_ContentHash);

}  // namespace
