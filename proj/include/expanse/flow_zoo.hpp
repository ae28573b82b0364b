#pragma once

#include <string>
#include <vector>

#include "expanse/flow_engine.hpp"

namespace expanse::zoo {

/// Registered flow instances, by name. Throws DomainError for unknown
/// names, listing the registered ones.
const FlowInstance& get(const std::string& name);

std::vector<std::string> list();

}  // namespace expanse::zoo
