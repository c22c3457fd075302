#include "tdvarma/series_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "tdvarma/format.hpp"

namespace tdvarma {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) f.push_back(line.substr(start, pos - start));
  f.push_back(line.substr(start));
  for (auto& s : f)
    if (!s.empty() && s.back() == '\r') s.pop_back();
  return f;
}

}  // namespace

std::string series_to_csv(const Seriesd& series) {
  std::string out = "t";
  for (int i = 1; i <= series.r(); ++i) out += ",x" + std::to_string(i);
  out += '\n';
  for (int t = 1; t <= series.n(); ++t) {
    out += std::to_string(t);
    for (int i = 0; i < series.r(); ++i) out += ',' + format_double(series.values(t - 1, i));
    out += '\n';
  }
  return out;
}

Seriesd parse_series_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("series CSV is empty");
  const auto head = split(line);
  const int r = static_cast<int>(head.size()) - 1;
  if (r < 1 || head[0] != "t") throw ConfigError("series CSV: header must be t,x1,...,xr");
  for (int i = 1; i <= r; ++i)
    if (head[static_cast<std::size_t>(i)] != "x" + std::to_string(i)) throw ConfigError("series CSV: header must be t,x1,...,xr");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (static_cast<int>(f.size()) != r + 1) throw ConfigError("series CSV: wrong field count at line " + std::to_string(lineno));
    if (parse_integer(f[0]) != static_cast<long long>(rows.size()) + 1)
      throw ConfigError("series CSV: time index out of sequence at line " + std::to_string(lineno));
    std::vector<double> v;
    for (int i = 1; i <= r; ++i) v.push_back(parse_double(f[static_cast<std::size_t>(i)]));
    rows.push_back(std::move(v));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), r);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int i = 0; i < r; ++i) x(static_cast<Eigen::Index>(t), i) = rows[t][static_cast<std::size_t>(i)];
  return Seriesd(std::move(x));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

}  // namespace tdvarma
