#pragma once

#include "autolabel/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace autolabel {

/// Versioned binary container for model parameters: named blocks of shapes +
/// flat float64 arrays plus a free-form JSON metadata string (seed and
/// hyperparameters). Round-trips bit-exactly.
struct CheckpointBlock {
    std::string name;
    std::vector<std::int64_t> dims;
    std::vector<double> values;
};

struct Checkpoint {
    std::string meta_json;
    std::vector<CheckpointBlock> blocks;

    const CheckpointBlock& block(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Fixed formatting used by CSV artifacts: 9 significant digits.
std::string format_g9(double value);

/// Report floats are written with 6 decimal places.
double round6(double value);

}  // namespace autolabel
