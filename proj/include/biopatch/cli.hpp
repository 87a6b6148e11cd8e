#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biopatch/corpus.hpp"
#include "biopatch/persona.hpp"
#include "biopatch/schedule.hpp"

namespace biopatch {

/// Everything a run needs besides the code itself. Fields present in a
/// --config file take precedence over command-line flags.
struct RunConfig {
  std::uint64_t seed = 0;
  int population = 3000;
  PoolSizes pool_sizes;
  RephraseSchedule schedule;
  int anniversary_years = 10;
  int wiki_per_subset = 100;
  std::vector<VariantSpec> variants;

  struct Paths {
    std::filesystem::path names;
    std::filesystem::path templates;
    std::filesystem::path people;
    std::filesystem::path corpus;
    std::filesystem::path wiki;
    std::filesystem::path manifests;
  } paths;
};

json to_json(const RunConfig& c);
/// Unknown keys are rejected. Keys absent from `j` keep the values in `base`.
RunConfig run_config_from_json(const json& j, RunConfig base = {});

/// BIOPATCH_DATA_DIR when set, else the data directory of the source tree.
std::filesystem::path default_data_dir();

namespace cli {

enum ExitCode { kOk = 0, kValidation = 1, kIoFailure = 2 };

/// `args` excludes the program name. Results go to `out`; warnings and
/// errors go to `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cli

}  // namespace biopatch
