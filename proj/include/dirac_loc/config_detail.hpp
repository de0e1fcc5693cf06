#pragma once

#include <string>
#include <vector>

namespace dirac_loc::detail {

double parse_real(const std::string& key, const std::string& s);
long parse_int(const std::string& key, const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);
std::vector<double> parse_list(const std::string& key, const std::string& s);
/// `lo:hi:count` (inclusive, evenly spaced) or an explicit sorted list.
std::vector<double> parse_grid(const std::string& key, const std::string& s);
std::vector<long> parse_int_list(const std::string& key, const std::string& s);

}  // namespace dirac_loc::detail
