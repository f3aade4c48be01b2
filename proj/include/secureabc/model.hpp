#ifndef SECUREABC_MODEL_HPP
#define SECUREABC_MODEL_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "secureabc/bytes.hpp"
#include "secureabc/crypto.hpp"
#include "secureabc/tlv.hpp"

namespace secureabc::model {

// Maximum payload of a standard QR code (any symbol version).
constexpr std::size_t kQrCapacityBytes = 2953;
// Photo budget enforced at issue time; keeps the binary payload inside
// version-24 symbols with medium error correction, which read markedly
// faster than full-capacity codes.
constexpr std::size_t kPhotoBudgetBytes = 1800;
constexpr std::size_t kMaxPhotoBytes = 0xffff;  // serialization sanity cap
constexpr std::size_t kMaxNameBytes = 256;
constexpr std::size_t kCidBytes = 16;

using Cid = std::array<std::uint8_t, kCidBytes>;
using KeyId = std::array<std::uint8_t, crypto::kFingerprintBytes>;

inline std::string cid_hex(const Cid& cid) {
  return to_hex(ByteView(cid.data(), cid.size()));
}

inline Cid cid_from_hex(const std::string& hex) {
  Bytes raw = from_hex(hex);
  if (raw.size() != kCidBytes) {
    throw Error(ErrorKind::usage, "cid must be 16 bytes");
  }
  Cid cid{};
  std::copy(raw.begin(), raw.end(), cid.begin());
  return cid;
}

// ---------------------------------------------------------------------------
// Antibody certificate
// ---------------------------------------------------------------------------

struct Certificate {
  std::uint8_t version = 1;
  std::string name;          // UTF-8, 1..256 bytes
  Bytes photo;               // JPEG blob
  Timestamp valid_from = 0;
  Timestamp valid_until = 0;
  Cid cid{};
  KeyId issuer_key_id{};

  bool operator==(const Certificate&) const = default;
};

struct SignedCertificate {
  Certificate body;
  Bytes signature;

  bool operator==(const SignedCertificate&) const = default;
};

inline void validate_certificate(const Certificate& c) {
  if (c.version != 1) throw Error(ErrorKind::encoding, "unsupported version");
  if (c.name.empty()) throw Error(ErrorKind::encoding, "name empty");
  if (c.name.size() > kMaxNameBytes) {
    throw Error(ErrorKind::encoding, "name too long");
  }
  if (c.photo.size() < 2 || c.photo[0] != 0xff || c.photo[1] != 0xd8) {
    throw Error(ErrorKind::encoding, "photo not JPEG");
  }
  if (c.photo.size() > kMaxPhotoBytes) {
    throw Error(ErrorKind::encoding, "photo too large");
  }
  if (c.valid_from >= c.valid_until) {
    throw Error(ErrorKind::encoding, "valid_from not before valid_until");
  }
}

// Canonical signed byte range of a certificate.
inline Bytes encode_certificate_body(const Certificate& c) {
  validate_certificate(c);
  tlv::Writer w;
  w.add_u8(tlv::kTagVersion, c.version);
  w.add_str(tlv::kTagName, c.name);
  w.add(tlv::kTagPhoto, as_view(c.photo));
  w.add_i64(tlv::kTagValidFrom, c.valid_from);
  w.add_i64(tlv::kTagValidUntil, c.valid_until);
  w.add(tlv::kTagCid, ByteView(c.cid.data(), c.cid.size()));
  w.add(tlv::kTagIssuerKeyId,
        ByteView(c.issuer_key_id.data(), c.issuer_key_id.size()));
  return w.take();
}

inline Bytes encode_signed_certificate(const SignedCertificate& sc) {
  Bytes out = encode_certificate_body(sc.body);
  tlv::Writer w;
  w.add(tlv::kTagSignature, as_view(sc.signature));
  Bytes sig = w.take();
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

inline SignedCertificate decode_signed_certificate(ByteView data) {
  tlv::Reader r(data);
  SignedCertificate sc;
  auto version = r.expect_len(tlv::kTagVersion, 1);
  sc.body.version = version.value[0];
  if (sc.body.version != 1) {
    throw MalformedError(version.offset, "unsupported version");
  }
  auto name = r.expect(tlv::kTagName);
  if (name.value.empty()) throw MalformedError(name.offset, "name empty");
  if (name.value.size() > kMaxNameBytes) {
    throw MalformedError(name.offset, "name too long");
  }
  sc.body.name = to_string(name.value);
  auto photo = r.expect(tlv::kTagPhoto);
  if (photo.value.size() < 2 || photo.value[0] != 0xff ||
      photo.value[1] != 0xd8) {
    throw MalformedError(photo.offset, "photo not JPEG");
  }
  if (photo.value.size() > kMaxPhotoBytes) {
    throw MalformedError(photo.offset, "photo too large");
  }
  sc.body.photo.assign(photo.value.begin(), photo.value.end());
  auto from = r.expect_len(tlv::kTagValidFrom, 8);
  sc.body.valid_from = static_cast<Timestamp>(get_u64_be(from.value));
  auto until = r.expect_len(tlv::kTagValidUntil, 8);
  sc.body.valid_until = static_cast<Timestamp>(get_u64_be(until.value));
  if (sc.body.valid_from >= sc.body.valid_until) {
    throw MalformedError(until.offset, "valid_from not before valid_until");
  }
  auto cid = r.expect_len(tlv::kTagCid, kCidBytes);
  std::copy(cid.value.begin(), cid.value.end(), sc.body.cid.begin());
  auto key_id = r.expect_len(tlv::kTagIssuerKeyId, crypto::kFingerprintBytes);
  std::copy(key_id.value.begin(), key_id.value.end(),
            sc.body.issuer_key_id.begin());
  auto sig = r.expect_len(tlv::kTagSignature, crypto::kSignatureBytes);
  sc.signature.assign(sig.value.begin(), sig.value.end());
  r.expect_end();
  return sc;
}

// ---------------------------------------------------------------------------
// Revocation lists
// ---------------------------------------------------------------------------

enum class ListKind : std::uint8_t {
  certificate = 1,  // entries are 16-byte CIDs, signed by the issuer
  verifier = 2,     // entries are 8-byte key fingerprints, signed by root
};

struct RevocationList {
  ListKind kind = ListKind::certificate;
  Timestamp issued_at = 0;
  std::vector<Bytes> entries;  // sorted ascending, no duplicates
  Bytes signature;

  bool operator==(const RevocationList&) const = default;
};

inline std::size_t revocation_entry_bytes(ListKind kind) {
  return kind == ListKind::certificate ? kCidBytes : crypto::kFingerprintBytes;
}

inline Bytes revocation_list_body(const RevocationList& list) {
  if (list.kind != ListKind::certificate && list.kind != ListKind::verifier) {
    throw Error(ErrorKind::encoding, "unknown list_kind");
  }
  std::size_t entry_len = revocation_entry_bytes(list.kind);
  tlv::Writer w;
  w.add_u8(tlv::kTagListKind, static_cast<std::uint8_t>(list.kind));
  w.add_i64(tlv::kTagIssuedAt, list.issued_at);
  const Bytes* prev = nullptr;
  for (const Bytes& e : list.entries) {
    if (e.size() != entry_len) {
      throw Error(ErrorKind::encoding, "bad revocation entry length");
    }
    if (prev != nullptr && !(*prev < e)) {
      throw Error(ErrorKind::encoding, "revocation entries not sorted");
    }
    w.add(tlv::kTagRevocationEntry, as_view(e));
    prev = &e;
  }
  return w.take();
}

inline Bytes encode_revocation_list(const RevocationList& list) {
  Bytes out = revocation_list_body(list);
  tlv::Writer w;
  w.add(tlv::kTagSignature, as_view(list.signature));
  Bytes sig = w.take();
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

inline RevocationList decode_revocation_list(ByteView data) {
  tlv::Reader r(data);
  RevocationList list;
  auto kind = r.expect_len(tlv::kTagListKind, 1);
  if (kind.value[0] != 1 && kind.value[0] != 2) {
    throw MalformedError(kind.offset, "unknown list_kind");
  }
  list.kind = static_cast<ListKind>(kind.value[0]);
  list.issued_at =
      static_cast<Timestamp>(get_u64_be(r.expect_len(tlv::kTagIssuedAt, 8).value));
  std::size_t entry_len = revocation_entry_bytes(list.kind);
  for (;;) {
    if (r.done()) throw MalformedError(r.offset(), "missing signature");
    auto f = r.next();
    if (f.tag == tlv::kTagSignature) {
      if (f.value.size() != crypto::kSignatureBytes) {
        throw MalformedError(f.offset, "bad signature length");
      }
      list.signature.assign(f.value.begin(), f.value.end());
      break;
    }
    if (f.tag != tlv::kTagRevocationEntry) {
      throw MalformedError(f.offset, "unexpected tag");
    }
    if (f.value.size() != entry_len) {
      throw MalformedError(f.offset, "bad revocation entry length");
    }
    Bytes entry(f.value.begin(), f.value.end());
    if (!list.entries.empty() && !(list.entries.back() < entry)) {
      throw MalformedError(f.offset, "revocation entries not sorted");
    }
    list.entries.push_back(std::move(entry));
  }
  r.expect_end();
  return list;
}

inline bool revocation_contains(const RevocationList& list, ByteView entry) {
  Bytes probe(entry.begin(), entry.end());
  return std::binary_search(list.entries.begin(), list.entries.end(), probe);
}

// ---------------------------------------------------------------------------
// Verifier credentials (root-endorsed public keys presented during mutual
// authentication); same wire form as a key endorsement with role=verifier.
// ---------------------------------------------------------------------------

using VerifierCredential = crypto::KeyEndorsement;

inline VerifierCredential decode_verifier_credential(ByteView data) {
  return crypto::decode_endorsement(data);
}

// ---------------------------------------------------------------------------
// Health tokens
// ---------------------------------------------------------------------------

// Rejection reasons shared by both token verifiers.
enum class TokenReject {
  bad_signature,
  expired,
  not_yet_valid,
  duplicate_token,
};

inline const char* token_reject_name(TokenReject r) {
  switch (r) {
    case TokenReject::bad_signature: return "BadSignature";
    case TokenReject::expired: return "Expired";
    case TokenReject::not_yet_valid: return "NotYetValid";
    case TokenReject::duplicate_token: return "DuplicateToken";
  }
  return "?";
}

struct DpTokenRecord {
  std::uint64_t i_dp = 0;
  std::uint64_t k = 0;
  double epsilon = 0.0;
  Timestamp date_issue = 0;
  Timestamp date_end = 0;
  Bytes signature;

  // The signature bitstring doubles as a unique token identifier.
  const Bytes& token_id() const { return signature; }

  bool operator==(const DpTokenRecord&) const = default;
};

inline Bytes dp_token_body(const DpTokenRecord& t) {
  if (t.k < 2) throw Error(ErrorKind::encoding, "k below 2");
  if (t.i_dp >= t.k) throw Error(ErrorKind::encoding, "i_dp out of range");
  if (!(t.epsilon > 0.0)) throw Error(ErrorKind::encoding, "epsilon not positive");
  if (t.date_issue >= t.date_end) {
    throw Error(ErrorKind::encoding, "date_issue not before date_end");
  }
  tlv::Writer w;
  w.add_i64(tlv::kTagValidFrom, t.date_issue);
  w.add_i64(tlv::kTagValidUntil, t.date_end);
  w.add_u64(tlv::kTagDpValue, t.i_dp);
  w.add_u64(tlv::kTagDpK, t.k);
  w.add_f64(tlv::kTagDpEpsilon, t.epsilon);
  return w.take();
}

inline Bytes encode_dp_token(const DpTokenRecord& t) {
  Bytes out = dp_token_body(t);
  tlv::Writer w;
  w.add(tlv::kTagSignature, as_view(t.signature));
  Bytes sig = w.take();
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

inline DpTokenRecord decode_dp_token(ByteView data) {
  tlv::Reader r(data);
  DpTokenRecord t;
  t.date_issue =
      static_cast<Timestamp>(get_u64_be(r.expect_len(tlv::kTagValidFrom, 8).value));
  auto until = r.expect_len(tlv::kTagValidUntil, 8);
  t.date_end = static_cast<Timestamp>(get_u64_be(until.value));
  if (t.date_issue >= t.date_end) {
    throw MalformedError(until.offset, "date_issue not before date_end");
  }
  t.i_dp = get_u64_be(r.expect_len(tlv::kTagDpValue, 8).value);
  auto k = r.expect_len(tlv::kTagDpK, 8);
  t.k = get_u64_be(k.value);
  if (t.k < 2 || t.i_dp >= t.k) {
    throw MalformedError(k.offset, "i_dp out of range");
  }
  auto eps = r.expect_len(tlv::kTagDpEpsilon, 8);
  t.epsilon = f64_from_be(eps.value);
  if (!(t.epsilon > 0.0)) {
    throw MalformedError(eps.offset, "epsilon not positive");
  }
  auto sig = r.expect_len(tlv::kTagSignature, crypto::kSignatureBytes);
  t.signature.assign(sig.value.begin(), sig.value.end());
  r.expect_end();
  return t;
}

// Prime registry for secret-shared tokens; the id byte in the TLV pins the
// modulus of every share and accumulator.
constexpr std::uint64_t kDefaultPrime = (std::uint64_t{1} << 61) - 1;
constexpr std::uint8_t kDefaultPrimeId = 1;

inline std::uint64_t prime_from_id(std::uint8_t id) {
  if (id != kDefaultPrimeId) {
    throw Error(ErrorKind::encoding, "unknown prime id");
  }
  return kDefaultPrime;
}

struct SsTokenRecord {
  Timestamp date_issue = 0;
  Timestamp date_end = 0;
  std::uint64_t share_v = 0;      // verifier share, in the clear
  Bytes enc_share_w;              // helper share, encrypted to pk_W
  Bytes inner_signature;          // issuer signature over enc_share_w
  std::uint8_t prime_id = kDefaultPrimeId;
  Bytes signature;                // outer issuer signature over the body

  const Bytes& token_id() const { return signature; }

  bool operator==(const SsTokenRecord&) const = default;
};

inline Bytes ss_token_body(const SsTokenRecord& t) {
  if (t.date_issue >= t.date_end) {
    throw Error(ErrorKind::encoding, "date_issue not before date_end");
  }
  if (t.share_v >= prime_from_id(t.prime_id)) {
    throw Error(ErrorKind::encoding, "share_V not reduced");
  }
  if (t.enc_share_w.empty()) {
    throw Error(ErrorKind::encoding, "empty helper share");
  }
  if (t.inner_signature.size() != crypto::kSignatureBytes) {
    throw Error(ErrorKind::encoding, "bad inner signature length");
  }
  tlv::Writer w;
  w.add_i64(tlv::kTagValidFrom, t.date_issue);
  w.add_i64(tlv::kTagValidUntil, t.date_end);
  w.add_u64(tlv::kTagShareV, t.share_v);
  w.add(tlv::kTagEncShareW, as_view(t.enc_share_w));
  w.add(tlv::kTagInnerSignature, as_view(t.inner_signature));
  w.add_u8(tlv::kTagPrimeId, t.prime_id);
  return w.take();
}

inline Bytes encode_ss_token(const SsTokenRecord& t) {
  Bytes out = ss_token_body(t);
  tlv::Writer w;
  w.add(tlv::kTagSignature, as_view(t.signature));
  Bytes sig = w.take();
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

inline SsTokenRecord decode_ss_token(ByteView data) {
  tlv::Reader r(data);
  SsTokenRecord t;
  t.date_issue =
      static_cast<Timestamp>(get_u64_be(r.expect_len(tlv::kTagValidFrom, 8).value));
  auto until = r.expect_len(tlv::kTagValidUntil, 8);
  t.date_end = static_cast<Timestamp>(get_u64_be(until.value));
  if (t.date_issue >= t.date_end) {
    throw MalformedError(until.offset, "date_issue not before date_end");
  }
  auto share = r.expect_len(tlv::kTagShareV, 8);
  t.share_v = get_u64_be(share.value);
  auto enc = r.expect(tlv::kTagEncShareW);
  if (enc.value.empty()) throw MalformedError(enc.offset, "empty helper share");
  t.enc_share_w.assign(enc.value.begin(), enc.value.end());
  auto inner = r.expect_len(tlv::kTagInnerSignature, crypto::kSignatureBytes);
  t.inner_signature.assign(inner.value.begin(), inner.value.end());
  auto prime = r.expect_len(tlv::kTagPrimeId, 1);
  if (prime.value[0] != kDefaultPrimeId) {
    throw MalformedError(prime.offset, "unknown prime id");
  }
  t.prime_id = prime.value[0];
  if (t.share_v >= prime_from_id(t.prime_id)) {
    throw MalformedError(share.offset, "share_V not reduced");
  }
  auto sig = r.expect_len(tlv::kTagSignature, crypto::kSignatureBytes);
  t.signature.assign(sig.value.begin(), sig.value.end());
  r.expect_end();
  return t;
}

// Verifier-to-helper relay of one encrypted share.
struct ForwardMessage {
  Bytes enc_share_w;
  Bytes inner_signature;
  std::string period;  // "YYYY-MM-DD"

  bool operator==(const ForwardMessage&) const = default;
};

inline Bytes encode_forward_message(const ForwardMessage& m) {
  if (m.period.empty()) throw Error(ErrorKind::encoding, "empty period");
  tlv::Writer w;
  w.add(tlv::kTagEncShareW, as_view(m.enc_share_w));
  w.add(tlv::kTagInnerSignature, as_view(m.inner_signature));
  w.add_str(tlv::kTagPeriod, m.period);
  return w.take();
}

inline ForwardMessage decode_forward_message(ByteView data) {
  tlv::Reader r(data);
  ForwardMessage m;
  auto enc = r.expect(tlv::kTagEncShareW);
  if (enc.value.empty()) throw MalformedError(enc.offset, "empty helper share");
  m.enc_share_w.assign(enc.value.begin(), enc.value.end());
  auto inner = r.expect_len(tlv::kTagInnerSignature, crypto::kSignatureBytes);
  m.inner_signature.assign(inner.value.begin(), inner.value.end());
  auto period = r.expect(tlv::kTagPeriod);
  if (period.value.empty()) throw MalformedError(period.offset, "empty period");
  m.period = to_string(period.value);
  r.expect_end();
  return m;
}

// ---------------------------------------------------------------------------
// QR payloads
// ---------------------------------------------------------------------------

// Binary mode: the TLV bytes themselves. Text mode: base64 of the TLV bytes
// (for QR writers limited to printable payloads, at a 4/3 size cost). Both
// must fit the 2953-byte QR capacity.
inline Bytes qr_payload(ByteView record, bool text_mode) {
  if (!text_mode) {
    if (record.size() > kQrCapacityBytes) {
      throw Error(ErrorKind::capacity_exceeded,
                  "payload " + std::to_string(record.size()) +
                      " bytes exceeds QR capacity " +
                      std::to_string(kQrCapacityBytes));
    }
    return Bytes(record.begin(), record.end());
  }
  std::string text = base64_encode(record);
  if (text.size() > kQrCapacityBytes) {
    throw Error(ErrorKind::capacity_exceeded,
                "payload " + std::to_string(text.size()) +
                    " bytes (base64) exceeds QR capacity " +
                    std::to_string(kQrCapacityBytes));
  }
  return to_bytes(text);
}

}  // namespace secureabc::model

#endif  // SECUREABC_MODEL_HPP
