#include "isgrid/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "isgrid/motion.hpp"
#include "json.hpp"

namespace isgrid {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "payloads are little-endian; big-endian hosts unsupported");

std::string to_string(DType t) {
  switch (t) {
    case DType::complex64: return "complex64";
    case DType::complex128: return "complex128";
    case DType::float32: return "float32";
    case DType::float64: return "float64";
  }
  return "?";
}

DType dtype_from_string(const std::string& s) {
  if (s == "complex64") return DType::complex64;
  if (s == "complex128") return DType::complex128;
  if (s == "float32") return DType::float32;
  if (s == "float64") return DType::float64;
  throw IoError("unknown dtype '" + s + "'");
}

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::complex64: return 8;
    case DType::complex128: return 16;
    case DType::float32: return 4;
    case DType::float64: return 8;
  }
  return 0;
}

bool dtype_is_complex(DType t) { return t == DType::complex64 || t == DType::complex128; }

namespace {

fs::path payload_path_for(const fs::path& header) {
  fs::path p = header;
  p.replace_extension(".bin");
  return p;
}

void write_header(const fs::path& path, const ArrayHeader& h) {
  json j;
  j["format"] = "isgrid-array";
  j["version"] = 1;
  j["shape"] = h.shape;
  j["dtype"] = to_string(h.dtype);
  j["axis_order"] = "row-major";
  j["space_tag"] = h.space_tag;
  j["endianness"] = "little";
  j["payload"] = h.payload;
  j["attributes"] = h.attributes;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void write_bytes(const fs::path& path, const void* data, std::size_t bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

ArrayHeader prepare(const fs::path& path, ArrayHeader header, std::size_t count) {
  if (numel(header.shape) != count)
    throw ShapeError("array of " + std::to_string(count) + " values does not match shape " + to_string(header.shape));
  header.payload = payload_path_for(path).filename().string();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return header;
}

}  // namespace

void write_array(const fs::path& path, ArrayHeader header, std::span<const Complex> values) {
  header = prepare(path, std::move(header), values.size());
  if (!dtype_is_complex(header.dtype)) throw IoError("complex values need a complex dtype");
  if (header.dtype == DType::complex128) {
    write_bytes(payload_path_for(path), values.data(), values.size() * 16);
  } else {
    std::vector<float> buf(values.size() * 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
      buf[2 * i] = static_cast<float>(values[i].real());
      buf[2 * i + 1] = static_cast<float>(values[i].imag());
    }
    write_bytes(payload_path_for(path), buf.data(), buf.size() * 4);
  }
  write_header(path, header);
}

void write_array(const fs::path& path, ArrayHeader header, std::span<const double> values) {
  header = prepare(path, std::move(header), values.size());
  if (dtype_is_complex(header.dtype)) throw IoError("real values need a real dtype");
  if (header.dtype == DType::float64) {
    write_bytes(payload_path_for(path), values.data(), values.size() * 8);
  } else {
    std::vector<float> buf(values.begin(), values.end());
    write_bytes(payload_path_for(path), buf.data(), buf.size() * 4);
  }
  write_header(path, header);
}

ArrayData read_array(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open array header '" + path.string() + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed array header '" + path.string() + "': " + e.what());
  }
  static const std::set<std::string> known = {"format", "version", "shape", "dtype", "axis_order",
                                              "space_tag", "endianness", "payload", "attributes"};
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw IoError("unknown key '" + key + "' in array header '" + path.string() + "'");

  ArrayData out;
  try {
    if (j.at("format") != "isgrid-array" || j.at("version") != 1) throw IoError("unsupported array format");
    if (j.at("axis_order") != "row-major") throw IoError("only row-major arrays are supported");
    if (j.at("endianness") != "little") throw IoError("only little-endian payloads are supported");
    out.header.shape = j.at("shape").get<Shape>();
    out.header.dtype = dtype_from_string(j.at("dtype").get<std::string>());
    out.header.space_tag = j.at("space_tag").get<std::string>();
    out.header.payload = j.at("payload").get<std::string>();
    if (j.contains("attributes")) out.header.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw IoError("invalid array header '" + path.string() + "': " + e.what());
  }
  if (out.header.shape.empty()) throw IoError("array header has an empty shape");

  const fs::path payload = path.parent_path() / out.header.payload;
  std::ifstream bin(payload, std::ios::binary);
  if (!bin) throw IoError("cannot open payload '" + payload.string() + "'");
  const std::size_t n = numel(out.header.shape);
  const std::size_t bytes = n * dtype_size(out.header.dtype);
  if (fs::file_size(payload) != bytes)
    throw IoError("payload '" + payload.string() + "' has " + std::to_string(fs::file_size(payload)) +
                  " bytes, header implies " + std::to_string(bytes));
  std::vector<char> raw(bytes);
  bin.read(raw.data(), static_cast<std::streamsize>(bytes));
  if (!bin) throw IoError("short read on '" + payload.string() + "'");

  switch (out.header.dtype) {
    case DType::complex128:
      out.complex_values.resize(n);
      std::memcpy(out.complex_values.data(), raw.data(), bytes);
      break;
    case DType::complex64: {
      std::vector<float> f(2 * n);
      std::memcpy(f.data(), raw.data(), bytes);
      out.complex_values.resize(n);
      for (std::size_t i = 0; i < n; ++i) out.complex_values[i] = {f[2 * i], f[2 * i + 1]};
      break;
    }
    case DType::float64:
      out.real_values.resize(n);
      std::memcpy(out.real_values.data(), raw.data(), bytes);
      break;
    case DType::float32: {
      std::vector<float> f(n);
      std::memcpy(f.data(), raw.data(), bytes);
      out.real_values.assign(f.begin(), f.end());
      break;
    }
  }
  return out;
}

void write_grid(const fs::path& path, const ComplexGrid& grid, DType dtype) {
  ArrayHeader h;
  h.shape = grid.shape();
  h.space_tag = to_string(grid.space_tag());
  if (dtype_is_complex(dtype)) {
    h.dtype = dtype;
    write_array(path, h, grid.data());
  } else {
    h.dtype = dtype;
    std::vector<double> re(grid.size());
    for (std::size_t i = 0; i < re.size(); ++i) re[i] = grid[i].real();
    write_array(path, h, re);
  }
}

ComplexGrid read_grid(const fs::path& path) {
  ArrayData a = read_array(path);
  SpaceTag tag = space_tag_from_string(a.header.space_tag);
  if (dtype_is_complex(a.header.dtype)) return ComplexGrid(a.header.shape, std::move(a.complex_values), tag);
  std::vector<Complex> v(a.real_values.begin(), a.real_values.end());
  return ComplexGrid(a.header.shape, std::move(v), tag);
}

void write_field(const fs::path& path, const DisplacementField& field) {
  field.validate();
  ArrayHeader h;
  h.shape = field.shape;
  h.shape.push_back(field.ndim());
  h.dtype = DType::float64;
  h.space_tag = "displacement";
  write_array(path, h, field.offsets);
}

DisplacementField read_field(const fs::path& path) {
  ArrayData a = read_array(path);
  if (a.header.space_tag != "displacement") throw IoError("'" + path.string() + "' is not a displacement field");
  if (dtype_is_complex(a.header.dtype)) throw IoError("displacement fields must be real");
  Shape s = a.header.shape;
  if (s.size() < 2 || s.back() != s.size() - 1)
    throw IoError("displacement field shape " + to_string(s) + " must end in the rank of the grid");
  s.pop_back();
  return DisplacementField(s, std::move(a.real_values));
}

void write_field_set(const fs::path& path, const FieldSet& set) {
  if (set.fields.empty()) throw std::invalid_argument("empty field set");
  const Shape& grid = set.fields.front().shape;
  ArrayHeader h;
  h.shape = {set.fields.size()};
  h.shape.insert(h.shape.end(), grid.begin(), grid.end());
  h.shape.push_back(grid.size());
  h.dtype = DType::float64;
  h.space_tag = "displacement";
  h.attributes["reference_bin"] = std::to_string(set.reference_bin);
  std::vector<double> all;
  for (const auto& f : set.fields) {
    if (f.shape != grid) throw ShapeError("field set members disagree in shape");
    all.insert(all.end(), f.offsets.begin(), f.offsets.end());
  }
  write_array(path, h, all);
}

FieldSet read_field_set(const fs::path& path) {
  ArrayData a = read_array(path);
  if (a.header.space_tag != "displacement") throw IoError("'" + path.string() + "' is not a displacement field set");
  if (dtype_is_complex(a.header.dtype)) throw IoError("displacement fields must be real");
  Shape s = a.header.shape;
  if (s.size() < 3 || s.back() != s.size() - 2)
    throw IoError("field set shape " + to_string(s) + " must be [bins, N..., rank]");
  const std::size_t bins = s.front();
  const Shape grid(s.begin() + 1, s.end() - 1);
  FieldSet set;
  auto it = a.header.attributes.find("reference_bin");
  if (it == a.header.attributes.end()) throw IoError("field set lacks a reference_bin attribute");
  try {
    set.reference_bin = std::stoul(it->second);
  } catch (const std::exception&) {
    throw IoError("field set reference_bin is not an integer");
  }
  const std::size_t per = numel(grid) * grid.size();
  for (std::size_t b = 0; b < bins; ++b) {
    std::vector<double> off(a.real_values.begin() + static_cast<long>(b * per),
                            a.real_values.begin() + static_cast<long>((b + 1) * per));
    set.fields.emplace_back(grid, std::move(off));
  }
  return set;
}

void write_samples(const fs::path& stem, const NonCartesianSet& set) {
  set.validate();
  ArrayHeader hc;
  hc.shape = {set.count(), set.dim};
  hc.dtype = DType::float64;
  hc.space_tag = "kspace";
  write_array(fs::path(stem.string() + "_coords.json"), hc, set.coords);
  ArrayHeader hv;
  hv.shape = {set.count()};
  hv.dtype = DType::complex128;
  hv.space_tag = "kspace";
  write_array(fs::path(stem.string() + "_values.json"), hv, set.values);
}

NonCartesianSet read_samples(const fs::path& stem) {
  ArrayData c = read_array(fs::path(stem.string() + "_coords.json"));
  ArrayData v = read_array(fs::path(stem.string() + "_values.json"));
  if (c.header.shape.size() != 2 || dtype_is_complex(c.header.dtype)) throw IoError("coordinate array must be real [count, dim]");
  if (!dtype_is_complex(v.header.dtype)) throw IoError("sample values must be complex");
  NonCartesianSet s;
  s.dim = c.header.shape[1];
  s.coords = std::move(c.real_values);
  s.values = std::move(v.complex_values);
  s.validate();
  return s;
}

void write_motion_csv(const fs::path& path, const MotionEstimate& est, const RespiratoryBins* bins) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "heartbeat";
  for (std::size_t a = 0; a < est.ndim(); ++a) os << ",shift" << a;
  os << ",bin\n";
  os << std::setprecision(17);
  for (std::size_t h = 0; h < est.count(); ++h) {
    os << h;
    for (double s : est.shifts[h]) os << ',' << s;
    os << ',' << (bins ? static_cast<long>(bins->labels.at(h)) : -1L) << '\n';
  }
}

std::vector<std::uint8_t> to_gray8(const ComplexGrid& image, std::size_t& rows, std::size_t& cols) {
  const Shape& s = image.shape();
  std::size_t offset = 0;
  if (s.size() == 1) {
    rows = 1;
    cols = s[0];
  } else if (s.size() == 2) {
    rows = s[0];
    cols = s[1];
  } else {
    rows = s[1];
    cols = s[2];
    offset = (s[0] / 2) * rows * cols;
  }
  std::vector<double> mag(rows * cols);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(image[offset + i]);
  const auto [mn, mx] = std::minmax_element(mag.begin(), mag.end());
  const double lo = *mn, range = *mx - *mn;
  std::vector<std::uint8_t> px(mag.size(), 0);
  if (range > 0)
    for (std::size_t i = 0; i < mag.size(); ++i)
      px[i] = static_cast<std::uint8_t>(std::lround(255.0 * (mag[i] - lo) / range));
  return px;
}

void write_pgm(const fs::path& path, const ComplexGrid& image) {
  std::size_t rows = 0, cols = 0;
  const auto px = to_gray8(image, rows, cols);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "P5\n" << cols << ' ' << rows << "\n255\n";
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

void write_png(const fs::path& path, const ComplexGrid& image) {
  std::size_t rows = 0, cols = 0;
  auto px = to_gray8(image, rows, cols);
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < rows; ++r) png_write_row(png, px.data() + r * cols);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_metrics(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

}  // namespace isgrid
