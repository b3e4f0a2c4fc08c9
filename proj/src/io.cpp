#include "cmtomo/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace cmtomo {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_payload(std::ofstream& out, const MatrixX<double>& values) {
  // row-major payload; storage is column-major, so emit row by row
  std::vector<double> row(values.cols());
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    for (Eigen::Index m = 0; m < values.cols(); ++m) row[m] = values(k, m);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

void write_header_and_payload(const std::string& path,
                              const std::vector<std::pair<std::string, std::string>>& fields,
                              const MatrixX<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  out << "RGF1\n";
  for (const auto& [key, value] : fields) out << key << ' ' << value << '\n';
  out << '\n';
  write_payload(out, values);
  if (!out) throw DataFormatError("write failed: " + path);
}

struct Header {
  std::map<std::string, std::string> fields;
  std::string get(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw DataFormatError("missing header field: " + key);
    return it->second;
  }
  long get_int(const std::string& key) const {
    try {
      return std::stol(get(key));
    } catch (const std::exception&) {
      throw DataFormatError("bad integer header field: " + key);
    }
  }
  double get_double(const std::string& key) const {
    const std::string s = get(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw DataFormatError("bad numeric header field: " + key);
    return v;
  }
};

MatrixX<double> read_payload(std::ifstream& in, long rows, long cols,
                             const std::string& path) {
  if (rows <= 0 || cols <= 0)
    throw DataFormatError("non-positive dimensions in " + path);
  MatrixX<double> values(rows, cols);
  std::vector<double> row(static_cast<std::size_t>(cols));
  for (long k = 0; k < rows; ++k) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) throw DataFormatError("payload shorter than declared in " + path);
    for (long m = 0; m < cols; ++m) values(k, m) = row[static_cast<std::size_t>(m)];
  }
  char extra;
  if (in.read(&extra, 1))
    throw DataFormatError("payload longer than declared in " + path);
  return values;
}

}  // namespace

void write_rgf(const std::string& path, const MeansData<double>& data) {
  write_header_and_payload(path,
                           {{"kind", "means"},
                            {"r0", fmt_double(data.ring.r0)},
                            {"nphi", std::to_string(data.ring.nphi)},
                            {"nr", std::to_string(data.rgrid.nr)},
                            {"hr", fmt_double(data.rgrid.step())}},
                           data.values);
}

void write_rgf(const std::string& path, const WaveTraceData<double>& data) {
  write_header_and_payload(path,
                           {{"kind", data.kind == TraceKind::p ? "traceP" : "traceW"},
                            {"r0", fmt_double(data.ring.r0)},
                            {"nphi", std::to_string(data.ring.nphi)},
                            {"nt", std::to_string(data.tgrid.nt)},
                            {"ht", fmt_double(data.tgrid.ht)}},
                           data.values);
}

void write_rgf(const std::string& path, const ImageData<double>& data) {
  write_header_and_payload(path,
                           {{"kind", "image"},
                            {"r0", fmt_double(data.grid.r0)},
                            {"n", std::to_string(data.grid.n)},
                            {"hx", fmt_double(data.grid.step())}},
                           data.values);
}

void write_rgf(const std::string& path, const GridFile& data) {
  std::visit([&](const auto& d) { write_rgf(path, d); }, data);
}

GridFile read_rgf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "RGF1")
    throw DataFormatError("bad magic in " + path);
  Header h;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    const auto sp = line.find(' ');
    if (sp == std::string::npos)
      throw DataFormatError("malformed header line in " + path);
    h.fields[line.substr(0, sp)] = line.substr(sp + 1);
  }
  if (line != "" || in.eof())
    throw DataFormatError("header not terminated by blank line in " + path);

  const std::string kind = h.get("kind");
  const double r0 = h.get_double("r0");
  if (!(r0 > 0)) throw DataFormatError("non-positive r0 in " + path);

  try {
    if (kind == "means") {
      MeansData<double> data(DetectorRing<double>(r0, int(h.get_int("nphi"))),
                             RadialGrid<double>(r0, int(h.get_int("nr"))));
      data.values = read_payload(in, data.ring.count(), data.rgrid.count(), path);
      return data;
    }
    if (kind == "traceP" || kind == "traceW") {
      WaveTraceData<double> data(
          DetectorRing<double>(r0, int(h.get_int("nphi"))),
          TimeGrid<double>(h.get_double("ht"), int(h.get_int("nt"))),
          kind == "traceP" ? TraceKind::p : TraceKind::w);
      data.values = read_payload(in, data.ring.count(), data.tgrid.count(), path);
      return data;
    }
    if (kind == "image") {
      ImageData<double> data(ImageGrid<double>(r0, int(h.get_int("n"))));
      data.values = read_payload(in, data.grid.count(), data.grid.count(), path);
      return data;
    }
  } catch (const std::invalid_argument& e) {
    throw DataFormatError(std::string(e.what()) + " in " + path);
  }
  throw DataFormatError("unknown kind '" + kind + "' in " + path);
}

Phantom<double> read_phantom_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open: " + path);
  Phantom<double> phantom;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;  // blank or comment-only line
    double cx, cy, size, amp;
    if (!(ss >> cx >> cy >> size >> amp))
      throw DataFormatError(path + ":" + std::to_string(lineno) +
                            ": expected 4 numbers after '" + tag + "'");
    std::string trailing;
    if (ss >> trailing)
      throw DataFormatError(path + ":" + std::to_string(lineno) +
                            ": trailing tokens");
    if (tag == "disk")
      phantom.disks.push_back({{cx, cy}, size, amp});
    else if (tag == "gauss")
      phantom.blobs.push_back({{cx, cy}, size, amp});
    else
      throw DataFormatError(path + ":" + std::to_string(lineno) +
                            ": unknown primitive '" + tag + "'");
  }
  return phantom;
}

void export_pgm(const ImageData<double>& img, const std::string& path) {
  const int n1 = img.grid.count();
  double lo = img.values(0, 0), hi = img.values(0, 0);
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n1; ++i2) {
      const double v = img.values(i1, i2);
      if (!std::isfinite(v)) throw DataFormatError("non-finite image value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double range = hi - lo;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot open for writing: " + path);
  out << "P5\n" << n1 << ' ' << n1 << "\n65535\n";
  // image row 0 is the top of the picture: i2 descends, i1 runs left to right
  std::vector<unsigned char> row(static_cast<std::size_t>(n1) * 2);
  for (int i2 = n1 - 1; i2 >= 0; --i2) {
    for (int i1 = 0; i1 < n1; ++i1) {
      unsigned v = 0;
      if (range > 0)
        v = static_cast<unsigned>(
            std::lround((img.values(i1, i2) - lo) / range * 65535.0));
      row[2 * i1] = static_cast<unsigned char>(v >> 8);
      row[2 * i1 + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataFormatError("write failed: " + path);

  std::ofstream scale(path + ".scale");
  if (!scale) throw DataFormatError("cannot open for writing: " + path + ".scale");
  scale << "min " << fmt_double(lo) << "\nmax " << fmt_double(hi) << '\n';
}

}  // namespace cmtomo
