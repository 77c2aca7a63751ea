#pragma once
#include <string>

#include "dhs/bounds.hpp"

namespace dhs {

// columns: inequality,p,index,bound,observed,slack,pass,mode
std::string bound_report_csv(const BoundReport& report);

// {"provenance": {...}, "rows": [...]} with every constant the rows depend on
std::string bound_report_json(const BoundReport& report);

} // namespace dhs
