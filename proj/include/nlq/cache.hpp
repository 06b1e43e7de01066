#pragma once

#include <string>

#include "nlq/extension.hpp"

namespace nlq {

// Directory named by NLQ_CACHE_DIR; empty string when caching is off.
std::string cache_directory();

// quantify() through the on-disk results cache. Keyed by the full problem
// content: the matrix at 17 significant digits plus settings, mode and every
// tolerance. The stored key is compared byte for byte on lookup, so a digest
// collision degrades to a miss. Unreadable entries trigger a recompute and
// a stderr warning, never a wrong answer. Pass-through when no cache
// directory is configured. `hit` (optional) reports whether the result came
// from the store.
QuantifyResult cached_quantify(const DensityMatrix& rho, SettingsCount settings,
                               const QuantifyOptions& opts = {}, bool* hit = nullptr);

}  // namespace nlq
