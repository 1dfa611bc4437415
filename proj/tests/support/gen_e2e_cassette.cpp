// Regenerates tests/fixtures/e2e/cassette.jsonl from the scripted replies:
//   gen_e2e_cassette <cassette-out>
// One worker keeps the recording order fixed.

#include <filesystem>
#include <iostream>

#include "augur/cassette.hpp"
#include "e2e.hpp"
#include "scripted_backend.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: gen_e2e_cassette <cassette-out>\n";
    return 1;
  }
  namespace at = augur::testing;
  const std::filesystem::path out = argv[1];
  std::filesystem::remove(out);
  at::ScriptedBackend scripted = at::ScriptedBackend::load(at::e2e_fixture("script.json"));
  at::TempDir run("gen-e2e");
  {
    augur::RecordingBackend recorder(scripted, out);
    at::run_e2e(recorder, run.path(), 1);
  }
  std::cout << "recorded " << scripted.calls() << " exchanges to " << out.string() << "\n";
  return 0;
}
