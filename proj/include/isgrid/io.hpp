#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "isgrid/grid.hpp"
#include "isgrid/igrid.hpp"

namespace isgrid {

struct FieldSet;
struct MotionEstimate;
struct RespiratoryBins;

/// I/O failures (missing files, malformed headers, short payloads).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class DType { complex64, complex128, float32, float64 };

std::string to_string(DType t);
DType dtype_from_string(const std::string& s);
std::size_t dtype_size(DType t);
bool dtype_is_complex(DType t);

/// JSON sidecar describing a raw little-endian payload.
///
///   { "format": "isgrid-array", "version": 1, "shape": [..], "dtype": "complex128",
///     "axis_order": "row-major", "space_tag": "image", "endianness": "little",
///     "payload": "<name>.bin", "attributes": { ... } }
///
/// The payload lives next to the header; its byte length is prod(shape) * dtype size.
struct ArrayHeader {
  Shape shape;
  DType dtype = DType::complex128;
  std::string space_tag = "image";
  std::string payload;
  std::map<std::string, std::string> attributes;
};

/// Writes header `path` (conventionally *.json) and its payload (same stem, .bin).
void write_array(const std::filesystem::path& path, ArrayHeader header, std::span<const Complex> values);
void write_array(const std::filesystem::path& path, ArrayHeader header, std::span<const double> values);

struct ArrayData {
  ArrayHeader header;
  std::vector<Complex> complex_values;  // filled for complex dtypes
  std::vector<double> real_values;      // filled for real dtypes
};
ArrayData read_array(const std::filesystem::path& path);

void write_grid(const std::filesystem::path& path, const ComplexGrid& grid, DType dtype = DType::complex128);
/// Reads a complex or real array as a ComplexGrid.
ComplexGrid read_grid(const std::filesystem::path& path);

/// Single field: float64 array of shape [N..., ndim], space_tag "displacement".
void write_field(const std::filesystem::path& path, const DisplacementField& field);
DisplacementField read_field(const std::filesystem::path& path);

/// Per-bin fields: float64 array [bins, N..., ndim], attribute reference_bin.
void write_field_set(const std::filesystem::path& path, const FieldSet& set);
FieldSet read_field_set(const std::filesystem::path& path);

/// Non-Cartesian samples: coords float64 [count, ndim] and values complex128 [count],
/// stored as two arrays `<stem>_coords.json` and `<stem>_values.json`.
void write_samples(const std::filesystem::path& stem, const NonCartesianSet& set);
NonCartesianSet read_samples(const std::filesystem::path& stem);

/// One row per heartbeat: index, shift per axis, bin label.
void write_motion_csv(const std::filesystem::path& path, const MotionEstimate& est, const RespiratoryBins* bins);

/// Magnitude image, min-max windowed to 8 bits; 3D grids export the central slice of axis 0.
std::vector<std::uint8_t> to_gray8(const ComplexGrid& image, std::size_t& rows, std::size_t& cols);
void write_pgm(const std::filesystem::path& path, const ComplexGrid& image);
void write_png(const std::filesystem::path& path, const ComplexGrid& image);

/// key=value lines, in insertion order.
void write_metrics(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace isgrid
