#pragma once

#include <iosfwd>
#include <string>

#include "copycat/model.hpp"

namespace copycat {

// Checkpoint layout (all integers little-endian):
//   magic "CPYC", u32 version,
//   u32 json_len + architecture descriptor (UTF-8 JSON),
//   per parameter: u32 name_len, name, u32 rank, u32 dims[rank], f64 values.
// Round trips are bitwise exact.
void save_model(const Model& m, std::ostream& out);
void save_model(const Model& m, const std::string& path);

Model load_model(std::istream& in);
Model load_model(const std::string& path);

std::string arch_to_json(const Model& m);

}  // namespace copycat
