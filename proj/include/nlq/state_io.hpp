#pragma once

#include <string>

#include "nlq/states.hpp"

namespace nlq {

// printf %.<significant>g formatting; exact strtod round trip at 17
std::string format_double(double v, int significant);

// Accepts preset strings (preset:bell, preset:pure-theta:<t>, preset:mems:<g>,
// preset:ghz3:<xi>:<beta>, preset:noise:<d>; angles in radians, plain decimal)
// or a path to a state file. Throws std::invalid_argument with a readable
// diagnostic on anything else.
DensityMatrix parse_state_spec(const std::string& spec);

// {"dims":[dA,dB],"kind":"pure","amplitudes":[[re,im],...]} or
// {"dims":[dA,dB],"kind":"mixed","matrix":[[[re,im],...],...]} (row-major).
// Mixed input must pass density validation; the thrown message carries the
// validator's defect report verbatim.
DensityMatrix parse_state_json(const std::string& text);

DensityMatrix load_state_file(const std::string& path);

// Always the mixed form, entries at 17 significant digits.
std::string state_to_json(const DensityMatrix& rho);

}  // namespace nlq
