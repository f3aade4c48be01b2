#ifndef SECUREABC_BYTES_HPP
#define SECUREABC_BYTES_HPP

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace secureabc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Timestamp = std::int64_t;  // Unix seconds, UTC

// Error taxonomy shared by every module. The CLI maps kinds to stable
// exit codes; see tools/secureabc.cpp.
enum class ErrorKind {
  usage,
  bad_signature,
  revoked,
  expired,
  not_yet_valid,
  malformed_payload,
  capacity_exceeded,
  duplicate_issue,
  duplicate_tid,
  duplicate_token,
  decryption_failure,
  verifier_revoked,
  unknown_cid,
  unknown_tid,
  unknown_issuer,
  stale_list,
  stale_cache,
  protocol_violation,
  encoding,
  crypto,
  io,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

// Structural decode failure; carries the byte offset of the first bad byte.
class MalformedError : public Error {
public:
  MalformedError(std::size_t offset, const std::string& msg)
      : Error(ErrorKind::malformed_payload,
              msg + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

inline ByteView as_view(const Bytes& b) { return ByteView(b.data(), b.size()); }

inline ByteView str_view(const std::string& s) {
  return ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

inline Bytes to_bytes(const std::string& s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

// ---------------------------------------------------------------------------
// Big-endian integer packing (wire order for all fixed-width fields)
// ---------------------------------------------------------------------------

inline void put_u32_be(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u64_be(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

inline std::uint32_t get_u32_be(ByteView in) {
  return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) |
         (std::uint32_t{in[2]} << 8) | std::uint32_t{in[3]};
}

inline std::uint64_t get_u64_be(ByteView in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

inline Bytes u64_be_bytes(std::uint64_t v) {
  Bytes out;
  out.reserve(8);
  put_u64_be(out, v);
  return out;
}

// Doubles travel as the IEEE-754 bit pattern in big-endian byte order.
inline Bytes f64_be_bytes(double d) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(d));
  __builtin_memcpy(&bits, &d, sizeof(bits));
  return u64_be_bytes(bits);
}

inline double f64_from_be(ByteView in) {
  std::uint64_t bits = get_u64_be(in);
  double d;
  __builtin_memcpy(&d, &bits, sizeof(d));
  return d;
}

// ---------------------------------------------------------------------------
// Hex
// ---------------------------------------------------------------------------

inline std::string to_hex(ByteView data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

inline Bytes from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(ErrorKind::encoding, "odd hex length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorKind::encoding, "bad hex digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Base64 (standard alphabet, strict padding, no line breaks)
// ---------------------------------------------------------------------------

inline std::string base64_encode(ByteView data) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve(((data.size() + 2) / 3) * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    std::uint32_t v = (std::uint32_t{data[i]} << 16) |
                      (std::uint32_t{data[i + 1]} << 8) |
                      std::uint32_t{data[i + 2]};
    out.push_back(alphabet[(v >> 18) & 0x3f]);
    out.push_back(alphabet[(v >> 12) & 0x3f]);
    out.push_back(alphabet[(v >> 6) & 0x3f]);
    out.push_back(alphabet[v & 0x3f]);
  }
  std::size_t rem = data.size() - i;
  if (rem == 1) {
    std::uint32_t v = std::uint32_t{data[i]} << 16;
    out.push_back(alphabet[(v >> 18) & 0x3f]);
    out.push_back(alphabet[(v >> 12) & 0x3f]);
    out.push_back('=');
    out.push_back('=');
  } else if (rem == 2) {
    std::uint32_t v =
        (std::uint32_t{data[i]} << 16) | (std::uint32_t{data[i + 1]} << 8);
    out.push_back(alphabet[(v >> 18) & 0x3f]);
    out.push_back(alphabet[(v >> 12) & 0x3f]);
    out.push_back(alphabet[(v >> 6) & 0x3f]);
    out.push_back('=');
  }
  return out;
}

inline Bytes base64_decode(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) {
    throw Error(ErrorKind::encoding, "base64 length not a multiple of 4");
  }
  Bytes out;
  out.reserve((text.size() / 4) * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      char c = text[i + j];
      if (c == '=') {
        if (i + 4 != text.size() || j < 2) {
          throw Error(ErrorKind::encoding, "misplaced base64 padding");
        }
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw Error(ErrorKind::encoding, "misplaced base64 padding");
      int d = value(c);
      if (d < 0) throw Error(ErrorKind::encoding, "bad base64 character");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calendar helpers (proleptic Gregorian, UTC)
// ---------------------------------------------------------------------------

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yr + (m <= 2));
}

// "YYYY-MM-DD" for the UTC calendar day containing ts.
inline std::string utc_day(Timestamp ts) {
  std::int64_t days = ts / 86400;
  if (ts < 0 && ts % 86400 != 0) --days;
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return std::string(buf);
}

// Accepts raw Unix seconds, "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS" (UTC).
inline Timestamp parse_timestamp(const std::string& text) {
  int y, hh = 0, mm = 0, ss = 0;
  unsigned mo, dd;
  if (std::sscanf(text.c_str(), "%d-%u-%uT%d:%d:%d", &y, &mo, &dd, &hh, &mm,
                  &ss) >= 3) {
    if (mo < 1 || mo > 12 || dd < 1 || dd > 31 || hh < 0 || hh > 23 ||
        mm < 0 || mm > 59 || ss < 0 || ss > 60) {
      throw Error(ErrorKind::usage, "bad timestamp: " + text);
    }
    return days_from_civil(y, mo, dd) * 86400 + hh * 3600 + mm * 60 + ss;
  }
  try {
    std::size_t pos = 0;
    Timestamp ts = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return ts;
  } catch (const std::exception&) {
    throw Error(ErrorKind::usage, "bad timestamp: " + text);
  }
}

}  // namespace secureabc

#endif  // SECUREABC_BYTES_HPP
