#pragma once

#include <string>

#include "cyclegate/augment.hpp"
#include "cyclegate/eval.hpp"

namespace cyclegate {

/// Full run configuration as read from a config file.
struct RunConfig {
    EvalConfig eval;
    std::string manifest_path;
    std::string output_dir = "out";
    int worker_count = 1;
    bool emit_mask_artifacts = false;
    AugmentPolicy augment;  // used by the augment command only

    void validate() const;
};

/// Parses the flat-key config format (docs/config.md). Paths in the file are
/// resolved against the config file's directory. Errors name the offending
/// key and line.
RunConfig load_run_config(const std::string& path);

}  // namespace cyclegate
