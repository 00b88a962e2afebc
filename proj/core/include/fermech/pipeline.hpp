#pragma once

#include "fermech/config.hpp"

namespace fermech::pipeline {

// CLI entry points. Each reads its inputs from the run configuration (CLI
// flags are applied as overrides before the call), writes its output files
// under `out_dir` and throws on failure:
//   ConfigError/DomainError -> exit 1, DataError/ShapeError -> exit 2,
//   NumericError -> exit 3.

void run_gen_synthetic(const config::File& cfg);
void run_train(const config::File& cfg);
void run_eval(const config::File& cfg);
void run_merge(const config::File& cfg);
void run_correct(const config::File& cfg);
void run_report(const config::File& cfg);

}  // namespace fermech::pipeline
