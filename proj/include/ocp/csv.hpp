#pragma once

#include <iosfwd>
#include <string>

#include "ocp/dataset.hpp"

namespace ocp {

// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

// Reads a dataset from CSV: header row required, one integer 1-based label
// column named "y", every other column a numeric feature (kept in file
// order). K is inferred as the largest label.
Dataset read_csv_dataset(const std::string& path);
Dataset read_csv_dataset(std::istream& in, const std::string& name);

// Same layout but the y column is optional (labels are 0 when absent) and
// no minimum class count is enforced. For prediction inputs.
Dataset read_csv_features(const std::string& path);

// Writes the x1..xd,y layout with a header row.
void write_csv_dataset(const Dataset& data, std::ostream& out);

}  // namespace ocp
