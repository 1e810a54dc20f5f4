#pragma once

#include <string>

#include "cyanocast/features.hpp"
#include "cyanocast/model.hpp"

namespace cyano {

// Everything inference needs: the architecture, the feature normalization
// fitted on the training split, and the weights.
struct Checkpoint {
    ModelConfig cfg;
    NormStats norm;
    Model model;
};

// Versioned little-endian binary. Saving and reloading is byte-stable: a
// save(load(f)) produces the same bytes as f.
void save_checkpoint(const std::string& path, const Model& model,
                     const NormStats& norm);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cyano
