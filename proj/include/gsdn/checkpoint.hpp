#pragma once

#include <string>
#include <vector>

#include "gsdn/autodiff.hpp"

namespace gsdn {

// JSON checkpoint of named parameters: shapes plus flat value arrays.
std::string params_to_json(const std::vector<ad::Param*>& params);
// Fills matching parameters by name; throws on missing names or shape
// mismatches.
void params_from_json(const std::string& json_text, const std::vector<ad::Param*>& params);

void save_checkpoint(const std::vector<ad::Param*>& params, const std::string& path);
void load_checkpoint(const std::string& path, const std::vector<ad::Param*>& params);

}  // namespace gsdn
