#include "weakfactor/panel_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace weakfactor {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ParseError("not a decimal float: '" + field + "'");
  }
  return v;
}

void write_panel_csv(std::ostream& os, const PanelMatrix& panel, bool header) {
  const Index n = panel.n_units();
  const Index t = panel.n_periods();
  if (header) {
    for (Index j = 0; j < t; ++j) {
      if (j) os << ',';
      os << 't' << j;
    }
    os << '\n';
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < t; ++j) {
      if (j) os << ',';
      os << format_double(panel.values(i, j));
    }
    os << '\n';
  }
}

void write_panel_csv(const std::filesystem::path& path,
                     const PanelMatrix& panel, bool header) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  write_panel_csv(os, panel, header);
  if (!os) throw IoError("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

bool looks_numeric(const std::string& field) {
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  return res.ec == std::errc{} && res.ptr == field.data() + field.size();
}

}  // namespace

PanelMatrix read_panel_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      if (!looks_numeric(fields.front())) continue;  // header row
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged CSV: row " + std::to_string(rows.size() + 1) +
                       " has " + std::to_string(row.size()) + " fields");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty panel CSV");
  MatrixXd values(rows.size(), rows.front().size());
  for (Index i = 0; i < values.rows(); ++i)
    for (Index j = 0; j < values.cols(); ++j)
      values(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return PanelMatrix(std::move(values));
}

PanelMatrix read_panel_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return read_panel_csv(is);
}

namespace {
constexpr char kMagic[8] = {'W', 'F', 'P', 'A', 'N', 'E', 'L', '1'};
}

void write_panel_binary(const std::filesystem::path& path,
                        const PanelMatrix& panel) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kMagic, sizeof(kMagic));
  const std::int64_t dims[2] = {panel.n_units(), panel.n_periods()};
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  // row-major on disk; Eigen default storage is column-major
  for (Index i = 0; i < panel.n_units(); ++i) {
    for (Index j = 0; j < panel.n_periods(); ++j) {
      const double v = panel.values(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

PanelMatrix read_panel_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("bad magic in panel binary: " + path.string());
  }
  std::int64_t dims[2];
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!is || dims[0] < 2 || dims[1] < 2) {
    throw ParseError("bad dimensions in panel binary: " + path.string());
  }
  MatrixXd values(dims[0], dims[1]);
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      double v;
      is.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!is) throw ParseError("truncated panel binary: " + path.string());
      values(i, j) = v;
    }
  }
  return PanelMatrix(std::move(values));
}

}  // namespace weakfactor
