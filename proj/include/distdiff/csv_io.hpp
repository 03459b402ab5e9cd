#pragma once

#include <iosfwd>
#include <string>

#include "distdiff/data.hpp"

namespace distdiff {

// CSV schemas (header row required, comma separated):
//   randomized     a,y[,y2[,y3]]
//   multi-source   site,a,y[,y2[,y3]]     site is a free-form label
//   observational  x1,...,xk,a,y[,y2[,y3]]
// Column order is free. Row numbers in errors are 1-based data rows (the
// header is row 0).
RandomizedSample read_randomized_csv(std::istream& in);
MultiSourceSample read_multi_source_csv(std::istream& in);
ObservationalSample read_observational_csv(std::istream& in);

RandomizedSample load_randomized_csv(const std::string& path);
MultiSourceSample load_multi_source_csv(const std::string& path);
ObservationalSample load_observational_csv(const std::string& path);

// Shortest round-trip number formatting; ingesting the output and writing it
// again reproduces it byte for byte.
void write_randomized_csv(std::ostream& out, const RandomizedSample& data);
void write_multi_source_csv(std::ostream& out, const MultiSourceSample& data);
void write_observational_csv(std::ostream& out, const ObservationalSample& data);

std::string format_number(double value);

}  // namespace distdiff
