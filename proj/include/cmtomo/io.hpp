#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include "cmtomo/phantom.hpp"
#include "cmtomo/types.hpp"

namespace cmtomo {

/// Malformed or inconsistent on-disk data.
struct DataFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using GridFile =
    std::variant<MeansData<double>, WaveTraceData<double>, ImageData<double>>;

/// Raw grid file: a short text header (magic "RGF1", kind, dimensions, R0 and
/// grid steps, one field per line, closed by a blank line) followed by the
/// payload as 64-bit little-endian IEEE-754 values, row-major and
/// detector-major for 2D data. read(write(x)) is bit-exact.
void write_rgf(const std::string& path, const MeansData<double>& data);
void write_rgf(const std::string& path, const WaveTraceData<double>& data);
void write_rgf(const std::string& path, const ImageData<double>& data);
void write_rgf(const std::string& path, const GridFile& data);
GridFile read_rgf(const std::string& path);

/// Line-oriented phantom description: one primitive per line,
///   disk cx cy radius amplitude
///   gauss cx cy sigma amplitude
/// with '#' comments. Support invariants are checked when the phantom meets a
/// concrete R0.
Phantom<double> read_phantom_spec(const std::string& path);

/// Binary PGM (P5, 16-bit big-endian samples) with linear min-max scaling; a
/// sidecar text file <path>.scale records the scaling bounds so the image can
/// be mapped back. A constant image maps to all-zero samples.
void export_pgm(const ImageData<double>& img, const std::string& path);

}  // namespace cmtomo
