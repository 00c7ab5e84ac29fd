// Copyright 2026 The xsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xsim/embstore.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>

#include "xsim/fileutil.hpp"

namespace xsim {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

const char* to_string(FormatDiag diag) {
  switch (diag) {
    case FormatDiag::kBadMagic: return "bad magic";
    case FormatDiag::kUnsupportedVersion: return "unsupported version";
    case FormatDiag::kUnsupportedDtype: return "unsupported dtype";
    case FormatDiag::kTruncatedHeader: return "truncated header";
    case FormatDiag::kTruncatedData: return "truncated data";
    case FormatDiag::kTrailingBytes: return "trailing bytes";
    case FormatDiag::kBadDimensions: return "bad dimensions";
    case FormatDiag::kEmpty: return "empty";
    case FormatDiag::kBadOffsets: return "bad offsets";
    case FormatDiag::kNonFinite: return "non-finite value";
    case FormatDiag::kBadPooling: return "bad pooling";
    case FormatDiag::kBadReserved: return "bad reserved bytes";
  }
  return "unknown";
}

std::string_view to_string(PoolingKind kind) {
  switch (kind) {
    case PoolingKind::kCls: return "cls";
    case PoolingKind::kFirstToken: return "first_token";
    case PoolingKind::kMean: return "mean";
  }
  return "unknown";
}

PoolingKind parse_pooling_kind(std::string_view name) {
  if (name == "cls") return PoolingKind::kCls;
  if (name == "first_token") return PoolingKind::kFirstToken;
  if (name == "mean") return PoolingKind::kMean;
  throw ValidationError("unknown pooling strategy '" + std::string(name) +
                        "' (expected cls, first_token or mean)");
}

namespace {

[[noreturn]] void fail(FormatDiag diag, const std::string& detail) {
  throw FormatError(diag, std::string(to_string(diag)) + ": " + detail);
}

// Multiplies with overflow detection.
std::optional<std::uint64_t> checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::nullopt;
  }
  return a * b;
}

std::optional<std::uint64_t> checked_add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) return std::nullopt;
  return a + b;
}

std::optional<std::uint64_t> checked_mul(std::optional<std::uint64_t> a,
                                         std::uint64_t b) {
  return a ? checked_mul(*a, b) : std::nullopt;
}

std::optional<std::uint64_t> checked_add(std::optional<std::uint64_t> a,
                                         std::optional<std::uint64_t> b) {
  return a && b ? checked_add(*a, *b) : std::nullopt;
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) |
         (v << 24);
}

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >>
                                     (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i]))
         << (8 * i);
  }
  return static_cast<T>(v);
}

void put_floats(std::string& out, std::span<const float> values) {
  const std::size_t start = out.size();
  out.resize(start + values.size_bytes());
  char* dst = out.data() + start;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, values.data(), values.size_bytes());
  } else {
    for (float v : values) {
      const auto bits = byteswap32(std::bit_cast<std::uint32_t>(v));
      std::memcpy(dst, &bits, 4);
      dst += 4;
    }
  }
}

void floats_from_le(float* values, std::size_t count) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) {
      values[i] = std::bit_cast<float>(
          byteswap32(std::bit_cast<std::uint32_t>(values[i])));
    }
  }
}

void check_finite(const float* values, std::size_t count, const char* what) {
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(values[i])) {
      fail(FormatDiag::kNonFinite,
           std::string(what) + " value " + std::to_string(i) + " is " +
               (std::isnan(values[i]) ? "NaN" : "infinite"));
    }
  }
}

// Sequential reader over either an in-memory buffer or an open file, with
// the total size known up front so that truncation is detected before any
// large allocation.
class ByteSource {
 public:
  explicit ByteSource(std::span<const char> bytes)
      : bytes_(bytes), size_(bytes.size()) {}
  ByteSource(std::ifstream& stream, std::uint64_t size)
      : stream_(&stream), size_(size) {}

  std::uint64_t size() const { return size_; }
  std::uint64_t remaining() const { return size_ - pos_; }

  void read(void* dst, std::size_t n) {
    if (n > remaining()) {
      fail(FormatDiag::kTruncatedData, "unexpected end of input");
    }
    if (stream_ != nullptr) {
      stream_->read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
      if (!*stream_) throw IoError("read failed");
    } else {
      std::memcpy(dst, bytes_.data() + pos_, n);
    }
    pos_ += n;
  }

 private:
  std::span<const char> bytes_;
  std::ifstream* stream_ = nullptr;
  std::uint64_t size_ = 0;
  std::uint64_t pos_ = 0;
};

void check_magic_version_dtype(const char* header, const char* magic) {
  if (std::memcmp(header, magic, 4) != 0) {
    const char* other = std::memcmp(magic, "XEMB", 4) == 0 ? "XMAT" : "XEMB";
    fail(FormatDiag::kBadMagic,
         std::string("expected '") + magic + "'" +
             (std::memcmp(header, other, 4) == 0
                  ? std::string(", found '") + other + "'"
                  : std::string()));
  }
  const auto version = get_le<std::uint32_t>(header + 4);
  if (version != kFormatVersion) {
    fail(FormatDiag::kUnsupportedVersion,
         "version " + std::to_string(version));
  }
  const auto dtype = get_le<std::uint32_t>(header + 8);
  if (dtype != kDtypeF32) {
    fail(FormatDiag::kUnsupportedDtype, "dtype " + std::to_string(dtype));
  }
}

XembHeader parse_xemb_header(ByteSource& src) {
  if (src.size() < kXembHeaderSize) {
    // A short file may still carry a recognisable wrong magic.
    char partial[4] = {};
    if (src.size() >= 4) {
      src.read(partial, 4);
      if (std::memcmp(partial, "XEMB", 4) != 0) {
        fail(FormatDiag::kBadMagic, "expected 'XEMB'");
      }
    }
    fail(FormatDiag::kTruncatedHeader,
         "file has " + std::to_string(src.size()) + " bytes");
  }
  char header[kXembHeaderSize];
  src.read(header, sizeof header);
  check_magic_version_dtype(header, "XEMB");
  XembHeader h;
  h.hidden_dim = get_le<std::uint32_t>(header + 12);
  h.num_sentences = get_le<std::uint64_t>(header + 16);
  h.total_tokens = get_le<std::uint64_t>(header + 24);
  if (h.hidden_dim == 0) fail(FormatDiag::kBadDimensions, "hidden_dim is 0");
  if (h.num_sentences == 0) fail(FormatDiag::kEmpty, "no sentences");
  if (h.total_tokens < h.num_sentences) {
    fail(FormatDiag::kBadOffsets,
         "total_tokens " + std::to_string(h.total_tokens) +
             " is smaller than num_sentences " +
             std::to_string(h.num_sentences));
  }
  // Exact expected length: header + offsets + data.
  const auto offsets_bytes =
      checked_mul(checked_add(h.num_sentences, 1), 8);
  const auto data_bytes =
      checked_mul(checked_mul(h.total_tokens, h.hidden_dim), 4);
  const auto expected = checked_add(
      checked_add(kXembHeaderSize, offsets_bytes), data_bytes);
  if (!expected || *expected > src.size()) {
    fail(FormatDiag::kTruncatedData,
         "declared " + std::to_string(h.num_sentences) + " sentences, " +
             std::to_string(h.total_tokens) + " tokens of dim " +
             std::to_string(h.hidden_dim) + " exceed file length " +
             std::to_string(src.size()));
  }
  if (*expected < src.size()) {
    fail(FormatDiag::kTrailingBytes,
         std::to_string(src.size() - *expected) +
             " bytes after the declared payload");
  }
  return h;
}

void check_offsets(std::span<const std::uint64_t> offsets,
                   std::uint64_t total_tokens) {
  if (offsets.size() < 2) fail(FormatDiag::kEmpty, "no sentences");
  if (offsets.front() != 0) {
    fail(FormatDiag::kBadOffsets,
         "offsets[0] = " + std::to_string(offsets.front()) + ", expected 0");
  }
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    if (offsets[i + 1] < offsets[i]) {
      fail(FormatDiag::kBadOffsets,
           "offsets not nondecreasing at index " + std::to_string(i + 1));
    }
    if (offsets[i + 1] == offsets[i]) {
      fail(FormatDiag::kBadOffsets,
           "sentence " + std::to_string(i) + " has no tokens");
    }
  }
  if (offsets.back() != total_tokens) {
    fail(FormatDiag::kBadOffsets,
         "offsets end at " + std::to_string(offsets.back()) +
             " but total_tokens is " + std::to_string(total_tokens));
  }
}

TokenEmbeddingSet decode_xemb(ByteSource& src) {
  const XembHeader h = parse_xemb_header(src);
  TokenEmbeddingSet set;
  set.hidden_dim = h.hidden_dim;
  set.offsets.resize(h.num_sentences + 1);
  std::vector<char> raw(set.offsets.size() * 8);
  src.read(raw.data(), raw.size());
  for (std::size_t i = 0; i < set.offsets.size(); ++i) {
    set.offsets[i] = get_le<std::uint64_t>(raw.data() + 8 * i);
  }
  check_offsets(set.offsets, h.total_tokens);
  set.data.resize(h.total_tokens * h.hidden_dim);
  src.read(set.data.data(), set.data.size() * sizeof(float));
  floats_from_le(set.data.data(), set.data.size());
  check_finite(set.data.data(), set.data.size(), "token");
  return set;
}

SentenceMatrix decode_xmat(ByteSource& src) {
  if (src.size() < kXmatHeaderSize) {
    if (src.size() >= 4) {
      char partial[4];
      src.read(partial, 4);
      if (std::memcmp(partial, "XMAT", 4) != 0) {
        fail(FormatDiag::kBadMagic, "expected 'XMAT'");
      }
    }
    fail(FormatDiag::kTruncatedHeader,
         "file has " + std::to_string(src.size()) + " bytes");
  }
  char header[kXmatHeaderSize];
  src.read(header, sizeof header);
  check_magic_version_dtype(header, "XMAT");
  const auto rows = get_le<std::uint64_t>(header + 12);
  const auto cols = get_le<std::uint32_t>(header + 20);
  const auto pooling = static_cast<unsigned char>(header[24]);
  if (pooling > 2) {
    fail(FormatDiag::kBadPooling, "pooling code " + std::to_string(pooling));
  }
  if (header[25] != 0 || header[26] != 0 || header[27] != 0) {
    fail(FormatDiag::kBadReserved, "reserved bytes must be zero");
  }
  if (rows == 0) fail(FormatDiag::kEmpty, "empty matrix");
  if (cols == 0) fail(FormatDiag::kBadDimensions, "cols is 0");
  const auto data_bytes = checked_mul(checked_mul(rows, cols), 4);
  if (!data_bytes || *data_bytes > src.remaining()) {
    fail(FormatDiag::kTruncatedData,
         "declared " + std::to_string(rows) + "x" + std::to_string(cols) +
             " matrix exceeds file length " + std::to_string(src.size()));
  }
  if (*data_bytes < src.remaining()) {
    fail(FormatDiag::kTrailingBytes,
         std::to_string(src.remaining() - *data_bytes) +
             " bytes after the declared payload");
  }
  if (rows > static_cast<std::uint64_t>(
                 std::numeric_limits<Eigen::Index>::max())) {
    fail(FormatDiag::kBadDimensions, "row count too large");
  }
  SentenceMatrix m;
  m.pooling = static_cast<PoolingKind>(pooling);
  m.values.resize(static_cast<Eigen::Index>(rows), cols);
  src.read(m.values.data(), *data_bytes);
  floats_from_le(m.values.data(), m.values.size());
  check_finite(m.values.data(), m.values.size(), "matrix");
  return m;
}

std::uint64_t file_size_or_throw(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  return size;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

template <typename Fn>
auto with_path_context(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(e.diag(), path.string() + ": " + e.what());
  }
}

}  // namespace

void TokenEmbeddingSet::validate() const {
  if (hidden_dim == 0) fail(FormatDiag::kBadDimensions, "hidden_dim is 0");
  check_offsets(offsets, offsets.empty() ? 0 : offsets.back());
  const auto expected = checked_mul(total_tokens(), hidden_dim);
  if (!expected || *expected != data.size()) {
    fail(FormatDiag::kBadDimensions,
         "data holds " + std::to_string(data.size()) + " values, expected " +
             std::to_string(total_tokens()) + " x " +
             std::to_string(hidden_dim));
  }
  check_finite(data.data(), data.size(), "token");
}

void SentenceMatrix::validate() const {
  if (values.rows() == 0) fail(FormatDiag::kEmpty, "empty matrix");
  if (values.cols() == 0) fail(FormatDiag::kBadDimensions, "cols is 0");
  if (static_cast<std::uint64_t>(values.cols()) >
      std::numeric_limits<std::uint32_t>::max()) {
    fail(FormatDiag::kBadDimensions, "too many columns");
  }
  check_finite(values.data(), static_cast<std::size_t>(values.size()),
               "matrix");
}

std::string encode_token_embeddings(const TokenEmbeddingSet& set) {
  set.validate();
  std::string out;
  out.reserve(kXembHeaderSize + set.offsets.size() * 8 +
              set.data.size() * 4);
  out.append("XEMB", 4);
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, kDtypeF32);
  put_le<std::uint32_t>(out, set.hidden_dim);
  put_le<std::uint64_t>(out, set.num_sentences());
  put_le<std::uint64_t>(out, set.total_tokens());
  for (auto off : set.offsets) put_le<std::uint64_t>(out, off);
  put_floats(out, set.data);
  return out;
}

TokenEmbeddingSet decode_token_embeddings(std::span<const char> bytes) {
  ByteSource src(bytes);
  return decode_xemb(src);
}

std::string encode_matrix(const SentenceMatrix& matrix) {
  matrix.validate();
  std::string out;
  out.reserve(kXmatHeaderSize +
              static_cast<std::size_t>(matrix.values.size()) * 4);
  out.append("XMAT", 4);
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, kDtypeF32);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.cols()));
  out.push_back(static_cast<char>(matrix.pooling));
  out.append(3, '\0');
  put_floats(out, {matrix.values.data(),
                   static_cast<std::size_t>(matrix.values.size())});
  return out;
}

SentenceMatrix decode_matrix(std::span<const char> bytes) {
  ByteSource src(bytes);
  return decode_xmat(src);
}

void write_token_embeddings(const TokenEmbeddingSet& set,
                            const std::filesystem::path& path) {
  atomic_write_file(path, encode_token_embeddings(set));
}

TokenEmbeddingSet read_token_embeddings(const std::filesystem::path& path) {
  return with_path_context(path, [&] {
    auto in = open_or_throw(path);
    ByteSource src(in, file_size_or_throw(path));
    return decode_xemb(src);
  });
}

XembHeader read_token_header(const std::filesystem::path& path) {
  return with_path_context(path, [&] {
    auto in = open_or_throw(path);
    ByteSource src(in, file_size_or_throw(path));
    return parse_xemb_header(src);
  });
}

void write_matrix(const SentenceMatrix& matrix,
                  const std::filesystem::path& path) {
  atomic_write_file(path, encode_matrix(matrix));
}

SentenceMatrix read_matrix(const std::filesystem::path& path) {
  return with_path_context(path, [&] {
    auto in = open_or_throw(path);
    ByteSource src(in, file_size_or_throw(path));
    return decode_xmat(src);
  });
}

}  // namespace xsim
