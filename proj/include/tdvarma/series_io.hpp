#ifndef TDVARMA_SERIES_IO_HPP
#define TDVARMA_SERIES_IO_HPP

#include <string>

#include "tdvarma/model.hpp"

namespace tdvarma {

/// Header `t,x1,...,xr`, one row per time point.
std::string series_to_csv(const Seriesd& series);
Seriesd parse_series_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace tdvarma

#endif  // TDVARMA_SERIES_IO_HPP
