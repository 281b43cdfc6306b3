#include "spsim/estimators/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <vector>

#include "spsim/errors.hpp"

namespace spsim::estimators {

namespace {

struct Row {
  int line;
  std::vector<std::string> cells;
};

class CsvSource {
 public:
  CsvSource(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-empty, non-comment row; false at end of input.
  bool next(Row& row) {
    std::string text;
    while (std::getline(in_, text)) {
      ++line_;
      if (!text.empty() && text.back() == '\r') text.pop_back();
      const auto first = text.find_first_not_of(" \t");
      if (first == std::string::npos || text[first] == '#') continue;
      row.line = line_;
      row.cells.clear();
      std::size_t start = 0;
      while (true) {
        const auto comma = text.find(',', start);
        std::string cell = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto b = cell.find_first_not_of(" \t");
        const auto e = cell.find_last_not_of(" \t");
        row.cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ValidationError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  double number(const Row& row, std::size_t col) const {
    if (col >= row.cells.size()) fail(row.line, "missing column " + std::to_string(col + 1));
    const std::string& s = row.cells[col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
      fail(row.line, "'" + s + "' is not a finite number");
    return v;
  }

  void expect_header(const Row& row, const std::string& a, const std::string& b) const {
    if (row.cells.size() != 2 || row.cells[0] != a || row.cells[1] != b)
      fail(row.line, "expected header '" + a + "," + b + "'");
  }

  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_ = 0;
};

// Two-column table after a fixed header; optional key,value lines before it.
template <class OnKey>
std::pair<std::vector<double>, std::vector<double>> read_columns(CsvSource& src, const std::string& a,
                                                                 const std::string& b, OnKey on_key) {
  Row row;
  bool header = false;
  std::vector<double> x, y;
  while (src.next(row)) {
    if (!header) {
      if (row.cells.size() == 2 && row.cells[0] == a) {
        src.expect_header(row, a, b);
        header = true;
      } else if (!on_key(row)) {
        src.fail(row.line, "expected header '" + a + "," + b + "'");
      }
      continue;
    }
    if (row.cells.size() != 2) src.fail(row.line, "expected 2 columns, found " + std::to_string(row.cells.size()));
    x.push_back(src.number(row, 0));
    y.push_back(src.number(row, 1));
  }
  if (!header) throw ValidationError(src.source() + ": missing header '" + a + "," + b + "'");
  if (x.empty()) throw ValidationError(src.source() + ": no data rows");
  return {std::move(x), std::move(y)};
}

void put(std::ostream& out, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", a, b);
  out << buf;
}

}  // namespace

Spectrum read_spectrum(std::istream& in, const std::string& source) {
  CsvSource src(in, source);
  auto [x, y] = read_columns(src, "wavelength_nm", "intensity", [](const Row&) { return false; });
  Spectrum s{std::move(x), std::move(y)};
  s.validate();
  return s;
}

CoincidenceHistogram read_histogram(std::istream& in, const std::string& source) {
  CsvSource src(in, source);
  double period = 0.0, bin = 0.0;
  auto [delay, counts] = read_columns(src, "delay_ps", "counts", [&](const Row& r) {
    if (r.cells.size() != 2) return false;
    if (r.cells[0] == "rep_period_ps") period = src.number(r, 1);
    else if (r.cells[0] == "bin_ps") bin = src.number(r, 1);
    else return false;
    return true;
  });
  if (!(period > 0) || !(bin > 0)) throw ValidationError(source + ": rep_period_ps and bin_ps header lines are required");
  // Delays must sit on the bin grid in ascending, contiguous order.
  const long first = std::lround(delay.front() / bin);
  for (std::size_t i = 0; i < delay.size(); ++i) {
    const double expect = static_cast<double>(first + static_cast<long>(i)) * bin;
    if (std::abs(delay[i] - expect) > 1e-6 * bin + 1e-9 * std::abs(expect))
      throw ValidationError(source + ": delay " + std::to_string(delay[i]) + " is off the contiguous bin grid");
    if (counts[i] < 0 || std::abs(counts[i] - std::round(counts[i])) > 1e-9)
      throw ValidationError(source + ": counts must be non-negative integers");
  }
  const long last = first + static_cast<long>(delay.size()) - 1;
  if (first > 0 || last < 0) throw ValidationError(source + ": histogram does not contain zero delay");
  // Keep the largest range symmetric about zero.
  const long half = std::min(-first, last);
  CoincidenceHistogram h;
  h.bin_ps = bin;
  h.rep_period_ps = period;
  h.half_bins = static_cast<int>(half);
  for (long k = -half; k <= half; ++k) h.counts.push_back(counts[static_cast<std::size_t>(k - first)]);
  h.validate();
  return h;
}

PolarScan read_polar_scan(std::istream& in, const std::string& source) {
  CsvSource src(in, source);
  auto [a, v] = read_columns(src, "angle_deg", "intensity", [](const Row&) { return false; });
  PolarScan s{std::move(a), std::move(v)};
  s.validate();
  return s;
}

DecayTrace read_decay_trace(std::istream& in, const std::string& source) {
  CsvSource src(in, source);
  double irf = 20.0;
  auto [t, c] = read_columns(src, "time_ps", "counts", [&](const Row& r) {
    if (r.cells.size() == 2 && r.cells[0] == "irf_fwhm_ps") {
      irf = src.number(r, 1);
      return true;
    }
    return false;
  });
  DecayTrace d{std::move(t), std::move(c), irf};
  d.validate();
  return d;
}

ImageFrame read_image(std::istream& in, const std::string& source) {
  CsvSource src(in, source);
  ImageFrame img;
  Row row;
  bool pitch = false;
  while (src.next(row)) {
    if (!pitch) {
      if (row.cells.size() != 2 || row.cells[0] != "pixel_pitch_nm") src.fail(row.line, "expected 'pixel_pitch_nm,<value>'");
      img.pixel_pitch_nm = src.number(row, 1);
      pitch = true;
      continue;
    }
    if (img.rows == 0) img.cols = static_cast<int>(row.cells.size());
    if (static_cast<int>(row.cells.size()) != img.cols)
      src.fail(row.line, "row has " + std::to_string(row.cells.size()) + " values, expected " + std::to_string(img.cols));
    for (std::size_t c = 0; c < row.cells.size(); ++c) img.pixels.push_back(src.number(row, c));
    ++img.rows;
  }
  if (!pitch) throw ValidationError(source + ": missing pixel_pitch_nm header");
  img.validate();
  return img;
}

void write_spectrum(std::ostream& out, const Spectrum& s) {
  out << "wavelength_nm,intensity\n";
  for (std::size_t i = 0; i < s.wavelength_nm.size(); ++i) put(out, s.wavelength_nm[i], s.intensity[i]);
}

void write_histogram(std::ostream& out, const CoincidenceHistogram& h) {
  out << "rep_period_ps,";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g\nbin_ps,%.17g\n", h.rep_period_ps, h.bin_ps);
  out << buf << "delay_ps,counts\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k) put(out, h.delay(k), h.counts[k]);
}

void write_polar_scan(std::ostream& out, const PolarScan& s) {
  out << "angle_deg,intensity\n";
  for (std::size_t i = 0; i < s.angle_deg.size(); ++i) put(out, s.angle_deg[i], s.intensity[i]);
}

void write_decay_trace(std::ostream& out, const DecayTrace& t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "irf_fwhm_ps,%.10g\n", t.irf_fwhm_ps);
  out << buf << "time_ps,counts\n";
  for (std::size_t i = 0; i < t.time_ps.size(); ++i) put(out, t.time_ps[i], t.counts[i]);
}

void write_image(std::ostream& out, const ImageFrame& img) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "pixel_pitch_nm,%.10g\n", img.pixel_pitch_nm);
  out << buf;
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      std::snprintf(buf, sizeof buf, c ? ",%.10g" : "%.10g", img.at(r, c));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace spsim::estimators
