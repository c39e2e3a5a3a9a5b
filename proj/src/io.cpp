#include "emm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace emm {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_emmf(std::ostream& os, const GridField& field) {
  const GridDomain& d = field.domain;
  os << "EMMF 1\n" << d.dim << ' ' << field.p << '\n';
  for (int a = 0; a < d.dim; ++a) os << (a ? " " : "") << d.shape[a];
  os << '\n';
  for (int a = 0; a < d.dim; ++a) os << (a ? " " : "") << format_real(d.origin[a]);
  os << '\n' << format_real(d.spacing) << '\n';
  std::string line;
  for (std::size_t k = 0; k < field.node_count(); ++k) {
    if (field.excluded(k)) {
      os << "X\n";
      continue;
    }
    line.clear();
    const auto v = field.at(k);
    for (int j = 0; j < field.p; ++j) {
      if (j) line += ' ';
      line += format_real(v[j]);
    }
    line += '\n';
    os << line;
  }
}

namespace {

std::string next_line(std::istream& is, int& lineno) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "unexpected end of file after line " + std::to_string(lineno));
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

template <class T>
std::vector<T> parse_list(const std::string& line, int lineno, std::size_t expected) {
  std::istringstream ss(line);
  std::vector<T> out;
  T v;
  while (ss >> v) out.push_back(v);
  if (!ss.eof() || out.size() != expected)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(expected) + " values");
  return out;
}

}  // namespace

GridField read_emmf(std::istream& is, std::optional<Constraint> constraint) {
  int lineno = 0;
  if (next_line(is, lineno) != "EMMF 1") throw Error(ErrorCode::ParseError, "missing `EMMF 1` header");
  const auto np = parse_list<int>(next_line(is, lineno), lineno, 2);
  const int n = np[0];
  const int p = np[1];
  if (n < 1 || n > kMaxDomainDim || p < 1 || p > kMaxTargetDim)
    throw Error(ErrorCode::ParseError, "unsupported dimensions n=" + std::to_string(n) + " p=" + std::to_string(p));
  GridDomain dom;
  dom.dim = n;
  dom.shape = parse_list<int>(next_line(is, lineno), lineno, static_cast<std::size_t>(n));
  for (int s : dom.shape)
    if (s < 2) throw Error(ErrorCode::BadShape, "shape entries must be >= 2");
  dom.origin = parse_list<double>(next_line(is, lineno), lineno, static_cast<std::size_t>(n));
  dom.spacing = parse_list<double>(next_line(is, lineno), lineno, 1)[0];
  if (!(dom.spacing > 0.0)) throw Error(ErrorCode::ParseError, "spacing must be positive");

  GridField field(dom, p);
  std::vector<std::uint8_t> excluded(field.node_count(), 0);
  bool any_excluded = false;
  bool all_unit = p >= 2;
  for (std::size_t k = 0; k < field.node_count(); ++k) {
    const std::string line = next_line(is, lineno);
    if (line == "X") {
      excluded[k] = 1;
      any_excluded = true;
      continue;
    }
    const auto v = parse_list<double>(line, lineno, static_cast<std::size_t>(p));
    double sq = 0.0;
    for (int j = 0; j < p; ++j) {
      field.at(k)[j] = v[j];
      sq += v[j] * v[j];
    }
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-12) all_unit = false;
  }
  if (any_excluded) field.mask.excluded = std::move(excluded);
  field.constraint = constraint.value_or(all_unit ? Constraint::UnitSphere : Constraint::Unconstrained);
  field.check_invariants();
  return field;
}

void save_emmf(const std::filesystem::path& path, const GridField& field) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_emmf(os, field);
  if (!os) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

GridField load_emmf(const std::filesystem::path& path, std::optional<Constraint> constraint) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_emmf(is, constraint);
}

}  // namespace emm
