#pragma once

#include "homsim/config.hpp"

namespace homsim {

// Executes the configured run and writes two_fold.csv, four_fold.csv and
// report.txt into config.out_dir. Files are written to temporaries and
// renamed; on failure no partial outputs remain. Throws ConfigError for
// configuration and filesystem problems and NumericRefusal when the
// sampler declines the requested cutoff. Cutoff warnings go to stderr.
void run(const RunConfig& config);

} // namespace homsim
