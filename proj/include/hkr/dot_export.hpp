// dot_export.hpp - deterministic Graphviz rendering of a hybrid KB
#pragma once

#include <string>

#include "hkr/hybrid.hpp"

namespace hkr::cli {

// Spaces as nested clusters, nodes sorted by id, is-a edges solid,
// instance edges dashed, has/named edges dotted, hybrid links bold.
// Byte-identical for identical KBs regardless of insertion order.
std::string export_dot(const hybrid::HybridKb& kb);

}  // namespace hkr::cli
