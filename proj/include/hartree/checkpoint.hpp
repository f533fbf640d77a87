#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "hartree/radial_field.hpp"

namespace hartree {

struct Checkpoint {
  RadialField field;
  double time = 0.0;
  std::map<std::string, std::string> meta;
};

// Binary layout: one JSON header line
//   {"format_version":1,"n":...,"r_max":...,"time":...,"meta":{...}}\n
// followed by n complex samples as interleaved little-endian float64.
void write_checkpoint(const std::filesystem::path &path, const RadialField &u, double time,
                      const std::map<std::string, std::string> &meta = {});

// Reads the binary layout, or the text layout with one "r re im" triple per
// line ('#' starts a comment). Text input must sit on a uniform cell-centred
// grid; r_max is inferred from the node spacing.
Checkpoint read_checkpoint(const std::filesystem::path &path);

} // namespace hartree
