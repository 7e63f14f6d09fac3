#pragma once

#include <string>
#include <vector>

#include "tsacap/autodiff.hpp"

namespace tsacap {

// Self-describing text container for trained parameters: a header carrying
// the kind, the full run configuration (JSON, one line) and a parameter
// manifest, followed by one line of full-precision decimal values per
// parameter in manifest order. Identical runs produce byte-identical files.
struct Checkpoint {
    std::string kind;         // "mil-image", "mil-video" or "caption-model"
    std::string config_json;  // serialized RunConfig, single line
    std::vector<std::string> vocab_words;      // caption models: full vocabulary incl. reserved
    std::vector<std::string> attribute_words;  // detectors and caption models
    ParamMap params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// Fails loudly on format violations and on any mismatch between the manifest
// and the stored values.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tsacap
