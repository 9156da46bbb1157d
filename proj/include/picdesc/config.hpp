#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "picdesc/classify.hpp"
#include "picdesc/regions.hpp"

namespace picdesc {

// Full description of one experiment run. Parsed from a flat key=value file;
// individual keys can be overridden from the command line. All randomness
// derives from `seed`.
struct RunConfig {
    std::string dataset_dir;
    std::string output_dir = "out";
    std::string cache_dir;  // empty -> "<output_dir>/cache"; env PICDESC_CACHE_DIR wins

    // backend: "synthetic" | "fixture:<model_id>" | "pretrained:<model_id>"
    std::string backend = "synthetic";
    uint64_t seed = 0;
    int dim = 64;  // synthetic joint/text dimension
    double logit_scale = 100.0;
    int max_text_tokens = 77;

    RegionProposalConfig regions;
    std::string proposals = "selective_search";  // or "grid"
    double nms_iou_threshold = 0.5;

    int k_t_max = 10;
    int k_b_max = 10;
    int k_f = 5;
    std::vector<std::vector<int>> area_subsets = {{1}, {1, 2}, {1, 2, 3}};

    std::vector<int> shots = {1, 5, 10, 20};
    int test_per_class = 15;
    int rounds = 600;
    ClassifierSpec classifier;

    bool figures = true;
};

// Flat key=value syntax: one pair per line, '#' starts a comment, blank
// lines ignored. Unknown keys are rejected.
RunConfig parse_config_file(const std::string& path);

// Applies one "key=value" override in the same syntax as the file.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

// Canonical serialization (sorted keys, one per line). Covers every field
// that can influence results; output_dir is deliberately omitted so the
// same experiment hashes identically wherever it is written.
std::string serialize_config(const RunConfig& config);

// Hash of the canonical serialization; embedded in every output file.
std::string config_hash(const RunConfig& config);

// Cache directory after defaults and the PICDESC_CACHE_DIR override.
std::string effective_cache_dir(const RunConfig& config);

}  // namespace picdesc
