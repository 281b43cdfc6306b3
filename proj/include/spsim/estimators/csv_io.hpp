#pragma once

#include <iosfwd>
#include <string>

#include "spsim/estimators/data.hpp"
#include "spsim/estimators/histogram.hpp"

// CSV formats (LF line ends, '.' decimals, '#' starts a comment line):
//   spectrum   wavelength_nm,intensity
//   histogram  rep_period_ps,<v> / bin_ps,<v> header lines, then delay_ps,counts
//   polar scan angle_deg,intensity
//   decay      optional irf_fwhm_ps,<v> line, then time_ps,counts
//   image      pixel_pitch_nm,<v> line, then one row of pixel values per line
// Readers throw ValidationError naming the source and line number.
namespace spsim::estimators {

Spectrum read_spectrum(std::istream& in, const std::string& source = "<input>");
CoincidenceHistogram read_histogram(std::istream& in, const std::string& source = "<input>");
PolarScan read_polar_scan(std::istream& in, const std::string& source = "<input>");
DecayTrace read_decay_trace(std::istream& in, const std::string& source = "<input>");
ImageFrame read_image(std::istream& in, const std::string& source = "<input>");

void write_spectrum(std::ostream& out, const Spectrum& s);
void write_histogram(std::ostream& out, const CoincidenceHistogram& h);
void write_polar_scan(std::ostream& out, const PolarScan& s);
void write_decay_trace(std::ostream& out, const DecayTrace& t);
void write_image(std::ostream& out, const ImageFrame& img);

// Opens a file and applies one of the readers above.
template <class Reader>
auto read_file(const std::string& path, Reader reader);

}  // namespace spsim::estimators

#include <fstream>

#include "spsim/errors.hpp"

template <class Reader>
auto spsim::estimators::read_file(const std::string& path, Reader reader) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return reader(in, path);
}
