#pragma once

// Dataset files: CSV with header `x1,x2`, one pair per row, '.' as the
// decimal point.

#include <iosfwd>
#include <string>

#include "pmp/model.hpp"

namespace pmp::io {

// Throws DomainError on a malformed header or row (message names the line).
model::Dataset read_dataset(std::istream& in);
model::Dataset read_dataset_file(const std::string& path);

// Values are printed with 17 significant digits so a read-back is exact.
void write_dataset(std::ostream& out, const model::Dataset& data);

}  // namespace pmp::io
