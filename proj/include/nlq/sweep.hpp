#pragma once

#include <string>
#include <vector>

#include "nlq/extension.hpp"

namespace nlq {

enum class Experiment { fig2a, fig2b, fig3, custom };

// Figure-data sweeps. fig2a walks the pure-state angle over [0, pi/2],
// fig2b the mixed-family coherence over [0, 1], fig3 the qutrit beta angle
// over [0, pi/2] once per xi in {pi/6, pi/3, pi/2} (one file each). custom
// walks one named family parameter over [range_lo, range_hi].
struct SweepOptions {
    Experiment experiment = Experiment::fig2a;
    std::size_t points = 61;  // per axis, >= 2
    std::string out_dir = ".";
    SettingsCount settings{2, 2};
    QuantifyOptions quantify;
    std::size_t threads = 0;  // 0 = hardware concurrency

    // custom only: pure-theta | mems | ghz3-beta; equal range endpoints
    // select the family's full domain; xi applies to ghz3-beta
    std::string family = "pure-theta";
    double range_lo = 0.0;
    double range_hi = 0.0;
    double xi = 1.5707963267948966;

    // Replace the chsh_norm column by the violation measure
    // max(value-2, 0)/(2 sqrt(2) - 2). Off: raw value/(2 sqrt(2)).
    bool chsh_violation = false;
};

struct SweepOutcome {
    std::vector<std::string> files;  // paths written, in emission order
    std::size_t rows = 0;
    std::size_t optimal_rows = 0;
};

// Rows are computed by a bounded worker pool and assembled in grid order,
// so output bytes do not depend on thread count. Throws std::invalid_argument
// on bad options and propagates filesystem failures as std::runtime_error.
SweepOutcome run_sweep(const SweepOptions& opts);

}  // namespace nlq
