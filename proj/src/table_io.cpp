#include "ebnm/table_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ebnm/error.hpp"

namespace ebnm {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \"");
    const auto e = f.find_last_not_of(" \"");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& field, std::size_t line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last)
    throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" + field + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ObservationSet parse_observations(const std::string& text, std::optional<double> s_scalar) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line_no == 0 || line.empty()) throw DataError("input has no header row");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = split(line, delim);
  std::optional<std::size_t> xcol, scol;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "x") xcol = c;
    if (header[c] == "s") scol = c;
  }
  if (!xcol) throw DataError("header has no x column");
  if (!scol && !s_scalar) throw DataError("input has no s column; pass --s");

  std::vector<double> x, s;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split(line, delim);
    if (fields.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields");
    x.push_back(parse_number(fields[*xcol], line_no));
    if (scol) s.push_back(parse_number(fields[*scol], line_no));
  }
  if (scol) return validate_observations(std::move(x), std::move(s));
  return validate_observations(std::move(x), *s_scalar);
}

ObservationSet read_observations(const std::filesystem::path& path, std::optional<double> s_scalar) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_observations(ss.str(), s_scalar);
}

std::string posterior_csv(const ObservationSet& obs, const PosteriorSummary& post) {
  std::string out = "index,x,s,mean,sd,lfsr\n";
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(obs.x()[i]) + "," + format_double(obs.s()[i]) + "," +
           format_double(post.mean[i]) + "," + format_double(post.sd[i]) + "," + format_double(post.lfsr[i]) +
           "\n";
  }
  return out;
}

std::string samples_csv(const Eigen::MatrixXd& draws) {
  std::string out;
  for (Eigen::Index j = 0; j < draws.cols(); ++j) out += (j ? ",theta_" : "theta_") + std::to_string(j + 1);
  out += "\n";
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      if (j) out += ",";
      out += format_double(draws(r, j));
    }
    out += "\n";
  }
  return out;
}

}  // namespace ebnm
