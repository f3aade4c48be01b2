#ifndef SECUREABC_TLV_HPP
#define SECUREABC_TLV_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "secureabc/bytes.hpp"

namespace secureabc::tlv {

// Frozen tag table. Every record is a flat sequence of
// [tag: 1 byte][length: 4 bytes big-endian][value] fields with tags in
// strictly ascending order, except that the signature field (0x07), when
// present, is always the final field and is excluded from the signed byte
// range. The revocation-entry tag (0x12) is the only repeatable tag;
// repeated values must be sorted ascending with no duplicates.
enum Tag : std::uint8_t {
  kTagVersion = 0x01,
  kTagName = 0x02,
  kTagPhoto = 0x03,
  kTagValidFrom = 0x04,
  kTagValidUntil = 0x05,
  kTagCid = 0x06,
  kTagSignature = 0x07,
  kTagIssuerKeyId = 0x08,
  kTagListKind = 0x10,
  kTagIssuedAt = 0x11,
  kTagRevocationEntry = 0x12,
  kTagSubjectKey = 0x20,
  kTagSubjectRole = 0x21,
  kTagDpValue = 0x30,
  kTagDpK = 0x31,
  kTagDpEpsilon = 0x32,
  kTagShareV = 0x40,
  kTagEncShareW = 0x41,
  kTagInnerSignature = 0x42,
  kTagPrimeId = 0x43,
  kTagPeriod = 0x50,
  // Internal records (issuer journal, wallet bundle); never cross trust
  // boundaries but follow the same framing rules.
  kTagEventKind = 0x60,
  kTagPersonId = 0x61,
  kTagTestId = 0x62,
  kTagCommChannel = 0x63,
  kTagCommAddress = 0x64,
  kTagPhotoHash = 0x65,
  kTagRevokeReason = 0x66,
  kTagWalletCert = 0x70,
  kTagWalletRevList = 0x71,
  kTagFetchedAt = 0x72,
  kTagSessions = 0x73,
  kTagWalletRoot = 0x74,
};

constexpr std::size_t kHeaderBytes = 5;  // 1 tag + 4 length

class Writer {
public:
  void add(std::uint8_t tag, ByteView value) {
    if (closed_) {
      throw Error(ErrorKind::encoding, "field after signature");
    }
    if (tag == kTagSignature) {
      closed_ = true;
    } else if (last_tag_.has_value()) {
      bool repeat = tag == kTagRevocationEntry && tag == *last_tag_;
      if (tag <= *last_tag_ && !repeat) {
        throw Error(ErrorKind::encoding, "tags out of order");
      }
    }
    if (value.size() > 0xffffffffull) {
      throw Error(ErrorKind::encoding, "field too long");
    }
    out_.push_back(tag);
    put_u32_be(out_, static_cast<std::uint32_t>(value.size()));
    out_.insert(out_.end(), value.begin(), value.end());
    if (tag != kTagSignature) last_tag_ = tag;
  }

  void add_u8(std::uint8_t tag, std::uint8_t v) {
    const std::uint8_t b[1] = {v};
    add(tag, ByteView(b, 1));
  }

  void add_u64(std::uint8_t tag, std::uint64_t v) { add(tag, u64_be_bytes(v)); }

  void add_i64(std::uint8_t tag, std::int64_t v) {
    add_u64(tag, static_cast<std::uint64_t>(v));
  }

  void add_f64(std::uint8_t tag, double v) { add(tag, f64_be_bytes(v)); }

  void add_str(std::uint8_t tag, const std::string& s) { add(tag, str_view(s)); }

  const Bytes& bytes() const { return out_; }
  Bytes take() { return std::move(out_); }

private:
  Bytes out_;
  std::optional<std::uint8_t> last_tag_;
  bool closed_ = false;
};

struct Field {
  std::uint8_t tag;
  std::size_t offset;  // of the tag byte
  ByteView value;
};

// Sequential reader enforcing the structural canonical form: ascending
// tags (0x12 may repeat), signature last, in-bounds lengths, no trailing
// garbage. Value-level rules (field sizes, sorted entries) are enforced by
// the record decoders in model.hpp.
class Reader {
public:
  explicit Reader(ByteView data) : data_(data) {}

  bool done() const { return pos_ == data_.size(); }
  std::size_t offset() const { return pos_; }

  Field next() {
    if (seen_signature_) {
      throw MalformedError(pos_, "field after signature");
    }
    if (data_.size() - pos_ < kHeaderBytes) {
      throw MalformedError(pos_, "truncated field header");
    }
    std::size_t start = pos_;
    std::uint8_t tag = data_[pos_];
    std::uint32_t len = get_u32_be(data_.subspan(pos_ + 1, 4));
    pos_ += kHeaderBytes;
    if (len > data_.size() - pos_) {
      throw MalformedError(start, "length exceeds payload");
    }
    if (tag == kTagSignature) {
      seen_signature_ = true;
    } else if (last_tag_.has_value()) {
      bool repeat = tag == kTagRevocationEntry && tag == *last_tag_;
      if (tag <= *last_tag_ && !repeat) {
        throw MalformedError(start, "tags out of order");
      }
    }
    if (tag != kTagSignature) last_tag_ = tag;
    ByteView value = data_.subspan(pos_, len);
    pos_ += len;
    return Field{tag, start, value};
  }

  // Demands the next field to carry `tag`.
  Field expect(std::uint8_t tag) {
    std::size_t at = pos_;
    Field f = next();
    if (f.tag != tag) {
      throw MalformedError(at, "unexpected tag " + std::to_string(f.tag) +
                                   ", wanted " + std::to_string(tag));
    }
    return f;
  }

  Field expect_len(std::uint8_t tag, std::size_t len) {
    Field f = expect(tag);
    if (f.value.size() != len) {
      throw MalformedError(f.offset, "bad field length " +
                                         std::to_string(f.value.size()) +
                                         ", wanted " + std::to_string(len));
    }
    return f;
  }

  void expect_end() const {
    if (!done()) throw MalformedError(pos_, "trailing bytes");
  }

private:
  ByteView data_;
  std::size_t pos_ = 0;
  std::optional<std::uint8_t> last_tag_;
  bool seen_signature_ = false;
};

}  // namespace secureabc::tlv

#endif  // SECUREABC_TLV_HPP
