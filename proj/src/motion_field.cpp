#include "wavecs/motion_field.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "wavecs/error.hpp"

namespace wavecs {
namespace {

constexpr std::array<char, 4> kMagic{'W', 'M', 'V', 'F'};

static_assert(std::endian::native == std::endian::little, "field I/O assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

MotionField::MotionField(GridDims dims) : dims_(dims), values_(dims.size()) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nt <= 0) throw DataError("motion field dimensions must be positive");
}

FlowField MotionField::slice(int t) const {
  FlowField f(dims_.nx, dims_.ny);
  const std::size_t base = dims_.index(0, 0, t);
  for (std::size_t i = 0; i < dims_.plane_size(); ++i) {
    f.dx.data[i] = values_[base + i].real();
    f.dy.data[i] = values_[base + i].imag();
  }
  return f;
}

void MotionField::set_slice(int t, const FlowField& flow) {
  if (flow.width() != dims_.nx || flow.height() != dims_.ny) throw DataError("set_slice: size mismatch");
  const std::size_t base = dims_.index(0, 0, t);
  for (std::size_t i = 0; i < dims_.plane_size(); ++i) values_[base + i] = {flow.dx.data[i], flow.dy.data[i]};
}

void MotionField::check_finite() const {
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("motion field has non-finite values");
  }
}

void write_motion_field(const MotionField& field, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  const auto& d = field.dims();
  put_u32(os, static_cast<std::uint32_t>(d.nx));
  put_u32(os, static_cast<std::uint32_t>(d.ny));
  put_u32(os, static_cast<std::uint32_t>(d.nt));
  std::vector<float> buf(2 * field.values().size());
  for (std::size_t i = 0; i < field.values().size(); ++i) {
    buf[2 * i] = static_cast<float>(field.values()[i].real());
    buf[2 * i + 1] = static_cast<float>(field.values()[i].imag());
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!os) throw DataError("write failed: " + path.string());
}

MotionField read_motion_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw DataError(path.string() + ": not a motion field file");
  GridDims d;
  d.nx = static_cast<int>(get_u32(is));
  d.ny = static_cast<int>(get_u32(is));
  d.nt = static_cast<int>(get_u32(is));
  if (!is || d.nx <= 0 || d.ny <= 0 || d.nt <= 0) throw DataError(path.string() + ": bad dimensions");
  MotionField field(d);
  std::vector<float> buf(2 * d.size());
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw DataError(path.string() + ": truncated field data");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(buf[2 * i]) || !std::isfinite(buf[2 * i + 1])) {
      throw DataError(path.string() + ": non-finite value at site " + std::to_string(i));
    }
    field.values()[i] = {buf[2 * i], buf[2 * i + 1]};
  }
  return field;
}

}  // namespace wavecs
