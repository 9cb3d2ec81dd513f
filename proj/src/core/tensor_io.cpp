#include "core/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace ridgelayer {

namespace {

constexpr char kMagic[4] = {'R', 'L', 'T', '1'};
constexpr std::uint8_t kDtypeF64 = 0;

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f64_le(std::string& out, double v) {
  put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t get_u64_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | bytes[offset + static_cast<std::size_t>(k)];
  return v;
}

void require_finite_payload(std::span<const double> values, std::size_t payload_offset) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw FormatError("non-finite value at element " + std::to_string(i),
                        payload_offset + 8 * i);
}

std::string encode_header(std::uint8_t rank, std::span<const std::uint64_t> dims) {
  std::string out(kMagic, sizeof kMagic);
  out.push_back(static_cast<char>(kDtypeF64));
  out.push_back(static_cast<char>(rank));
  for (const std::uint64_t d : dims) put_u64_le(out, d);
  return out;
}

}  // namespace

std::string encode_tensor(const Tensor& t) {
  std::string out;
  std::span<const double> payload;
  if (const auto* m = std::get_if<Matrix>(&t)) {
    const std::uint64_t dims[2] = {m->rows(), m->cols()};
    out = encode_header(2, dims);
    payload = m->span();
  } else {
    const auto& v = std::get<Vector>(t);
    const std::uint64_t dims[1] = {v.size()};
    out = encode_header(1, dims);
    payload = v.span();
  }
  if (!all_finite(payload))
    throw ContractViolation("tensors written to RLT1 must be finite");
  out.reserve(out.size() + 8 * payload.size());
  for (const double v : payload) put_f64_le(out, v);
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad magic, expected RLT1", 0);
  if (bytes.size() < 5) throw FormatError("truncated header, missing dtype", 4);
  if (bytes[4] != kDtypeF64)
    throw FormatError("unsupported dtype code " + std::to_string(bytes[4]), 4);
  if (bytes.size() < 6) throw FormatError("truncated header, missing rank", 5);
  const std::uint8_t rank = bytes[5];
  if (rank != 1 && rank != 2)
    throw FormatError("unsupported rank " + std::to_string(rank), 5);

  std::size_t offset = 6;
  std::uint64_t dims[2] = {0, 0};
  for (std::uint8_t k = 0; k < rank; ++k) {
    if (bytes.size() < offset + 8)
      throw FormatError("truncated header, missing dimension " + std::to_string(k),
                        bytes.size());
    dims[k] = get_u64_le(bytes, offset);
    offset += 8;
  }

  std::uint64_t count = dims[0];
  if (rank == 2) {
    if (dims[1] != 0 && dims[0] > std::numeric_limits<std::uint64_t>::max() / dims[1])
      throw FormatError("dimension product overflows", 6);
    count = dims[0] * dims[1];
  }
  if (count > (std::numeric_limits<std::size_t>::max() - offset) / 8)
    throw FormatError("payload size overflows", 6);

  const std::size_t payload_offset = offset;
  const std::size_t expected = payload_offset + 8 * static_cast<std::size_t>(count);
  if (bytes.size() < expected)
    throw FormatError("truncated payload, expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()),
                      bytes.size());
  if (bytes.size() > expected)
    throw FormatError("trailing bytes after payload", expected);

  std::vector<double> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = std::bit_cast<double>(get_u64_le(bytes, payload_offset + 8 * i));
  require_finite_payload(values, payload_offset);

  if (rank == 1) return Vector(std::move(values));
  return Matrix::from_data(static_cast<std::size_t>(dims[0]),
                           static_cast<std::size_t>(dims[1]), std::move(values));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const std::string bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure: " + path.string());
  return decode_tensor(bytes);
}

Matrix read_matrix(const std::filesystem::path& path) {
  Tensor t = read_tensor(path);
  if (auto* m = std::get_if<Matrix>(&t)) return std::move(*m);
  throw FormatError("expected a rank-2 tensor in " + path.string(), 5);
}

Vector read_vector(const std::filesystem::path& path) {
  Tensor t = read_tensor(path);
  if (auto* v = std::get_if<Vector>(&t)) return std::move(*v);
  throw FormatError("expected a rank-1 tensor in " + path.string(), 5);
}

}  // namespace ridgelayer
