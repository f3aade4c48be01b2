#ifndef SECUREABC_CRYPTO_HPP
#define SECUREABC_CRYPTO_HPP

#include <array>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>

#include "secureabc/bytes.hpp"
#include "secureabc/rng.hpp"
#include "secureabc/tlv.hpp"

namespace secureabc::crypto {

// Signatures: ECDSA over NIST P-521, SHA-512 digest, deterministic nonces
// (HMAC-SHA512 construction), encoded as fixed-width r||s.
// Encryption: X25519 ephemeral ECDH + HKDF-SHA256 + AES-256-GCM.
constexpr std::size_t kFieldBytes = 66;  // ceil(521 / 8)
constexpr std::size_t kSignatureBytes = 2 * kFieldBytes;
constexpr std::size_t kSigPublicKeyBytes = 1 + 2 * kFieldBytes;  // 0x04 || X || Y
constexpr std::size_t kEncKeyBytes = 32;
constexpr std::size_t kGcmIvBytes = 12;
constexpr std::size_t kGcmTagBytes = 16;
constexpr std::size_t kSealOverheadBytes = kEncKeyBytes + kGcmTagBytes;
constexpr std::size_t kMaxPlaintextBytes = 1 << 20;
constexpr std::size_t kFingerprintBytes = 8;

struct SigKeyPair {
  Bytes public_key;   // uncompressed EC point, 133 bytes
  Bytes private_key;  // scalar, 66 bytes big-endian
};

struct EncKeyPair {
  Bytes public_key;   // raw X25519, 32 bytes
  Bytes private_key;  // raw X25519, 32 bytes
};

namespace detail {

struct BnDeleter { void operator()(BIGNUM* p) const { BN_free(p); } };
struct BnCtxDeleter { void operator()(BN_CTX* p) const { BN_CTX_free(p); } };
struct PointDeleter { void operator()(EC_POINT* p) const { EC_POINT_free(p); } };
struct PkeyDeleter { void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); } };
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter { void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); } };
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
struct EcdsaSigDeleter { void operator()(ECDSA_SIG* p) const { ECDSA_SIG_free(p); } };

using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtxPtr = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;
using EcdsaSigPtr = std::unique_ptr<ECDSA_SIG, EcdsaSigDeleter>;

[[noreturn]] inline void fail(const std::string& what) {
  throw Error(ErrorKind::crypto, what);
}

inline const EC_GROUP* p521() {
  static EC_GROUP* group = [] {
    EC_GROUP* g = EC_GROUP_new_by_curve_name(NID_secp521r1);
    if (g == nullptr) fail("P-521 group unavailable");
    return g;
  }();
  return group;
}

inline const BIGNUM* p521_order() { return EC_GROUP_get0_order(p521()); }

inline Bytes bn_to_fixed(const BIGNUM* v, std::size_t len) {
  Bytes out(len);
  if (BN_bn2binpad(v, out.data(), static_cast<int>(len)) < 0) {
    fail("scalar too large");
  }
  return out;
}

inline BnPtr bn_from(ByteView b) {
  BnPtr v(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
  if (!v) fail("bignum allocation");
  return v;
}

inline std::array<std::uint8_t, 64> hmac_sha512(ByteView key, ByteView data) {
  std::array<std::uint8_t, 64> out{};
  std::size_t outlen = 0;
  if (EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA512", nullptr, key.data(),
                key.size(), data.data(), data.size(), out.data(), out.size(),
                &outlen) == nullptr ||
      outlen != out.size()) {
    fail("HMAC failure");
  }
  return out;
}

// Deterministic nonce stream for ECDSA (the HMAC_DRBG construction from the
// deterministic-ECDSA standard, instantiated with SHA-512).
class NonceStream {
public:
  NonceStream(ByteView priv_fixed, ByteView digest) {
    v_.fill(0x01);
    k_.fill(0x00);
    // bits2octets(digest): the 512-bit digest is always below the 521-bit
    // group order, so reduction is the identity.
    BnPtr z = bn_from(digest);
    Bytes h = bn_to_fixed(z.get(), kFieldBytes);
    Bytes seed;
    seed.insert(seed.end(), priv_fixed.begin(), priv_fixed.end());
    seed.insert(seed.end(), h.begin(), h.end());
    update(ByteView(seed.data(), seed.size()), 0x00);
    update(ByteView(seed.data(), seed.size()), 0x01);
  }

  // Next candidate nonce in [1, n-1].
  BnPtr next() {
    for (;;) {
      Bytes t;
      t.reserve(kFieldBytes);
      while (t.size() < kFieldBytes) {
        v_ = hmac_sha512(view(k_), view(v_));
        t.insert(t.end(), v_.begin(), v_.end());
      }
      t.resize(kFieldBytes);
      BnPtr k = bn_from(as_view(t));
      // bits2int: 528 generated bits -> keep the leftmost 521.
      if (BN_rshift(k.get(), k.get(), 528 - 521) != 1) fail("rshift");
      if (!BN_is_zero(k.get()) && BN_cmp(k.get(), p521_order()) < 0) return k;
      bump();
    }
  }

  // Re-key after an unusable candidate (r == 0 or s == 0).
  void bump() { update(ByteView(), 0x00); }

private:
  static ByteView view(const std::array<std::uint8_t, 64>& a) {
    return ByteView(a.data(), a.size());
  }

  void update(ByteView seed, std::uint8_t sep) {
    Bytes data(v_.begin(), v_.end());
    data.push_back(sep);
    data.insert(data.end(), seed.begin(), seed.end());
    k_ = hmac_sha512(view(k_), as_view(data));
    v_ = hmac_sha512(view(k_), view(v_));
  }

  std::array<std::uint8_t, 64> v_{};
  std::array<std::uint8_t, 64> k_{};
};

inline std::array<std::uint8_t, 64> sha512(ByteView msg) {
  std::array<std::uint8_t, 64> digest{};
  unsigned int len = 0;
  if (EVP_Digest(msg.data(), msg.size(), digest.data(), &len, EVP_sha512(),
                 nullptr) != 1 ||
      len != digest.size()) {
    fail("SHA-512 failure");
  }
  return digest;
}

inline PkeyPtr sig_public_pkey(ByteView public_key) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
  if (!ctx || EVP_PKEY_fromdata_init(ctx.get()) != 1) fail("EC fromdata init");
  OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string(OSSL_PKEY_PARAM_GROUP_NAME,
                                       const_cast<char*>("P-521"), 0),
      OSSL_PARAM_construct_octet_string(OSSL_PKEY_PARAM_PUB_KEY,
                                        const_cast<std::uint8_t*>(
                                            public_key.data()),
                                        public_key.size()),
      OSSL_PARAM_construct_end(),
  };
  EVP_PKEY* raw = nullptr;
  if (EVP_PKEY_fromdata(ctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params) != 1 ||
      raw == nullptr) {
    fail("bad signature public key");
  }
  return PkeyPtr(raw);
}

inline Bytes x25519_public(ByteView private_key) {
  PkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr,
                                            private_key.data(),
                                            private_key.size()));
  if (!pkey) fail("bad encryption private key");
  Bytes pub(kEncKeyBytes);
  std::size_t len = pub.size();
  if (EVP_PKEY_get_raw_public_key(pkey.get(), pub.data(), &len) != 1 ||
      len != kEncKeyBytes) {
    fail("public key export");
  }
  return pub;
}

inline Bytes x25519_shared(ByteView private_key, ByteView peer_public) {
  PkeyPtr own(EVP_PKEY_new_raw_private_key(EVP_PKEY_X25519, nullptr,
                                           private_key.data(),
                                           private_key.size()));
  PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr,
                                           peer_public.data(),
                                           peer_public.size()));
  if (!own || !peer) fail("bad X25519 key");
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(own.get(), nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1) {
    fail("ECDH init");
  }
  Bytes shared(kEncKeyBytes);
  std::size_t len = shared.size();
  if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 ||
      len != kEncKeyBytes) {
    fail("ECDH derive");
  }
  return shared;
}

inline Bytes hkdf_sha256(ByteView ikm, ByteView info, std::size_t out_len) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(),
                                 static_cast<int>(ikm.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(),
                                  static_cast<int>(info.size())) != 1) {
    fail("HKDF init");
  }
  Bytes out(out_len);
  std::size_t len = out.size();
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != out_len) {
    fail("HKDF derive");
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Hashing and fingerprints
// ---------------------------------------------------------------------------

inline Bytes sha256(ByteView data) {
  Bytes digest(32);
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != 32) {
    detail::fail("SHA-256 failure");
  }
  return digest;
}

// Key identifier: first 8 bytes of SHA-256 of the public key bytes.
inline Bytes fingerprint(ByteView public_key) {
  Bytes digest = sha256(public_key);
  digest.resize(kFingerprintBytes);
  return digest;
}

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

inline SigKeyPair keygen_sign(Rng& rng) {
  const BIGNUM* n = detail::p521_order();
  detail::BnCtxPtr ctx(BN_CTX_new());
  if (!ctx) detail::fail("BN_CTX");
  for (;;) {
    Bytes cand = rng.bytes(kFieldBytes);
    cand[0] &= 0x01;  // trim to 521 bits
    detail::BnPtr d = detail::bn_from(as_view(cand));
    if (BN_is_zero(d.get()) || BN_cmp(d.get(), n) >= 0) continue;
    detail::PointPtr pub(EC_POINT_new(detail::p521()));
    if (!pub || EC_POINT_mul(detail::p521(), pub.get(), d.get(), nullptr,
                             nullptr, ctx.get()) != 1) {
      detail::fail("point multiply");
    }
    Bytes encoded(kSigPublicKeyBytes);
    std::size_t len = EC_POINT_point2oct(
        detail::p521(), pub.get(), POINT_CONVERSION_UNCOMPRESSED,
        encoded.data(), encoded.size(), ctx.get());
    if (len != kSigPublicKeyBytes) detail::fail("point encoding");
    return SigKeyPair{std::move(encoded),
                      detail::bn_to_fixed(d.get(), kFieldBytes)};
  }
}

inline Bytes sign(const Bytes& private_key, ByteView message) {
  if (message.empty()) throw Error(ErrorKind::usage, "empty message");
  if (private_key.size() != kFieldBytes) {
    throw Error(ErrorKind::crypto, "malformed signing key");
  }
  const BIGNUM* n = detail::p521_order();
  detail::BnPtr d = detail::bn_from(as_view(private_key));
  if (BN_is_zero(d.get()) || BN_cmp(d.get(), n) >= 0) {
    throw Error(ErrorKind::crypto, "malformed signing key");
  }

  auto digest = detail::sha512(message);
  detail::BnPtr z = detail::bn_from(ByteView(digest.data(), digest.size()));

  detail::BnCtxPtr ctx(BN_CTX_new());
  detail::BnPtr r(BN_new()), s(BN_new()), x(BN_new()), tmp(BN_new());
  if (!ctx || !r || !s || !x || !tmp) detail::fail("BN alloc");

  detail::NonceStream nonces(as_view(private_key),
                             ByteView(digest.data(), digest.size()));
  for (;;) {
    detail::BnPtr k = nonces.next();
    detail::PointPtr point(EC_POINT_new(detail::p521()));
    if (!point || EC_POINT_mul(detail::p521(), point.get(), k.get(), nullptr,
                               nullptr, ctx.get()) != 1 ||
        EC_POINT_get_affine_coordinates(detail::p521(), point.get(), x.get(),
                                        nullptr, ctx.get()) != 1) {
      detail::fail("nonce point");
    }
    if (BN_nnmod(r.get(), x.get(), n, ctx.get()) != 1) detail::fail("mod");
    if (BN_is_zero(r.get())) {
      nonces.bump();
      continue;
    }
    // s = k^-1 (z + r d) mod n
    detail::BnPtr kinv(BN_mod_inverse(nullptr, k.get(), n, ctx.get()));
    if (!kinv) detail::fail("nonce inverse");
    if (BN_mod_mul(tmp.get(), r.get(), d.get(), n, ctx.get()) != 1 ||
        BN_mod_add(tmp.get(), tmp.get(), z.get(), n, ctx.get()) != 1 ||
        BN_mod_mul(s.get(), kinv.get(), tmp.get(), n, ctx.get()) != 1) {
      detail::fail("signature arithmetic");
    }
    if (BN_is_zero(s.get())) {
      nonces.bump();
      continue;
    }
    Bytes out = detail::bn_to_fixed(r.get(), kFieldBytes);
    Bytes sb = detail::bn_to_fixed(s.get(), kFieldBytes);
    out.insert(out.end(), sb.begin(), sb.end());
    return out;
  }
}

// True iff `signature` is a valid r||s signature over `message` under
// `public_key`. Malformed inputs of any shape return false; never throws.
inline bool verify(const Bytes& public_key, ByteView message,
                   ByteView signature) noexcept {
  try {
    if (public_key.size() != kSigPublicKeyBytes || public_key[0] != 0x04 ||
        signature.size() != kSignatureBytes || message.empty()) {
      return false;
    }
    detail::BnPtr r = detail::bn_from(signature.first(kFieldBytes));
    detail::BnPtr s = detail::bn_from(signature.subspan(kFieldBytes));
    detail::EcdsaSigPtr sig(ECDSA_SIG_new());
    if (!sig) return false;
    // set0 takes ownership on success
    if (ECDSA_SIG_set0(sig.get(), r.get(), s.get()) != 1) return false;
    r.release();
    s.release();
    unsigned char* der = nullptr;
    int der_len = i2d_ECDSA_SIG(sig.get(), &der);
    if (der_len <= 0) return false;
    Bytes der_sig(der, der + der_len);
    OPENSSL_free(der);

    detail::PkeyPtr pkey = detail::sig_public_pkey(as_view(public_key));
    detail::MdCtxPtr md(EVP_MD_CTX_new());
    if (!md ||
        EVP_DigestVerifyInit(md.get(), nullptr, EVP_sha512(), nullptr,
                             pkey.get()) != 1) {
      return false;
    }
    return EVP_DigestVerify(md.get(), der_sig.data(), der_sig.size(),
                            message.data(), message.size()) == 1;
  } catch (...) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Public-key encryption (authenticated hybrid)
// ---------------------------------------------------------------------------

inline EncKeyPair keygen_enc(Rng& rng) {
  Bytes priv = rng.bytes(kEncKeyBytes);
  Bytes pub = detail::x25519_public(as_view(priv));
  return EncKeyPair{std::move(pub), std::move(priv)};
}

namespace detail {

inline Bytes session_key(ByteView shared, ByteView ephemeral_pub,
                         ByteView recipient_pub) {
  Bytes info = to_bytes("secureabc/hybrid/v1");
  info.insert(info.end(), ephemeral_pub.begin(), ephemeral_pub.end());
  info.insert(info.end(), recipient_pub.begin(), recipient_pub.end());
  return hkdf_sha256(shared, as_view(info), 32);
}

}  // namespace detail

// Ciphertext layout: ephemeral_pub(32) || AES-256-GCM body || tag(16).
// The GCM IV is zero: the key is fresh per message (ephemeral ECDH).
inline Bytes encrypt(const Bytes& public_key, ByteView plaintext, Rng& rng) {
  if (public_key.size() != kEncKeyBytes) {
    throw Error(ErrorKind::crypto, "malformed encryption public key");
  }
  if (plaintext.size() > kMaxPlaintextBytes) {
    throw Error(ErrorKind::capacity_exceeded, "plaintext exceeds limit");
  }
  Bytes eph_priv = rng.bytes(kEncKeyBytes);
  Bytes eph_pub = detail::x25519_public(as_view(eph_priv));
  Bytes shared = detail::x25519_shared(as_view(eph_priv), as_view(public_key));
  Bytes key = detail::session_key(as_view(shared), as_view(eph_pub),
                                  as_view(public_key));

  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  static const unsigned char iv[kGcmIvBytes] = {0};
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         iv) != 1) {
    detail::fail("GCM init");
  }
  Bytes out(eph_pub);
  out.resize(kEncKeyBytes + plaintext.size() + kGcmTagBytes);
  int len = 0;
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), out.data() + kEncKeyBytes, &len,
                        plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    detail::fail("GCM encrypt");
  }
  int fin = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kEncKeyBytes + len, &fin) !=
          1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagBytes,
                          out.data() + kEncKeyBytes + plaintext.size()) != 1) {
    detail::fail("GCM finalize");
  }
  return out;
}

inline Bytes decrypt(const Bytes& private_key, ByteView ciphertext) {
  if (private_key.size() != kEncKeyBytes) {
    throw Error(ErrorKind::crypto, "malformed encryption private key");
  }
  if (ciphertext.size() < kSealOverheadBytes) {
    throw Error(ErrorKind::decryption_failure, "ciphertext too short");
  }
  ByteView eph_pub = ciphertext.first(kEncKeyBytes);
  ByteView body = ciphertext.subspan(
      kEncKeyBytes, ciphertext.size() - kSealOverheadBytes);
  ByteView tag = ciphertext.last(kGcmTagBytes);

  Bytes shared, key;
  try {
    Bytes own_pub = detail::x25519_public(as_view(private_key));
    shared = detail::x25519_shared(as_view(private_key), eph_pub);
    key = detail::session_key(as_view(shared), eph_pub, as_view(own_pub));
  } catch (const Error&) {
    throw Error(ErrorKind::decryption_failure, "key agreement failed");
  }

  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  static const unsigned char iv[kGcmIvBytes] = {0};
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         iv) != 1) {
    detail::fail("GCM init");
  }
  Bytes out(body.size());
  int len = 0;
  if (!body.empty() &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, body.data(),
                        static_cast<int>(body.size())) != 1) {
    throw Error(ErrorKind::decryption_failure, "decryption failed");
  }
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagBytes,
                          const_cast<std::uint8_t*>(tag.data())) != 1) {
    detail::fail("GCM tag");
  }
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    throw Error(ErrorKind::decryption_failure, "authentication failed");
  }
  out.resize(static_cast<std::size_t>(len) + static_cast<std::size_t>(fin));
  return out;
}

// ---------------------------------------------------------------------------
// Root-of-trust key endorsements
// ---------------------------------------------------------------------------

enum class Role : std::uint8_t {
  issuer = 1,
  verifier = 2,
  helper = 3,
};

inline const char* role_name(Role r) {
  switch (r) {
    case Role::issuer: return "issuer";
    case Role::verifier: return "verifier";
    case Role::helper: return "helper";
  }
  return "?";
}

inline Role role_from_name(const std::string& s) {
  if (s == "issuer") return Role::issuer;
  if (s == "verifier") return Role::verifier;
  if (s == "helper") return Role::helper;
  throw Error(ErrorKind::usage, "unknown role: " + s);
}

struct KeyEndorsement {
  Bytes subject_key;
  Role role;
  Timestamp issued_at;
  Bytes signature;  // by the trust anchor, over the canonical body
};

inline Bytes endorsement_body(const KeyEndorsement& e) {
  tlv::Writer w;
  w.add_i64(tlv::kTagIssuedAt, e.issued_at);
  w.add(tlv::kTagSubjectKey, as_view(e.subject_key));
  w.add_u8(tlv::kTagSubjectRole, static_cast<std::uint8_t>(e.role));
  return w.take();
}

inline Bytes encode_endorsement(const KeyEndorsement& e) {
  Bytes out = endorsement_body(e);
  tlv::Writer w;
  w.add(tlv::kTagSignature, as_view(e.signature));
  Bytes sig = w.take();
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

inline KeyEndorsement decode_endorsement(ByteView data) {
  tlv::Reader r(data);
  KeyEndorsement e;
  e.issued_at =
      static_cast<Timestamp>(get_u64_be(r.expect_len(tlv::kTagIssuedAt, 8).value));
  auto key = r.expect(tlv::kTagSubjectKey);
  e.subject_key.assign(key.value.begin(), key.value.end());
  auto role = r.expect_len(tlv::kTagSubjectRole, 1);
  if (role.value[0] < 1 || role.value[0] > 3) {
    throw MalformedError(role.offset, "unknown role byte");
  }
  e.role = static_cast<Role>(role.value[0]);
  auto sig = r.expect_len(tlv::kTagSignature, kSignatureBytes);
  e.signature.assign(sig.value.begin(), sig.value.end());
  r.expect_end();
  return e;
}

inline KeyEndorsement endorse_key(const Bytes& root_private_key,
                                  const Bytes& subject_key, Role role,
                                  Timestamp issued_at) {
  KeyEndorsement e{subject_key, role, issued_at, {}};
  e.signature = sign(root_private_key, as_view(endorsement_body(e)));
  return e;
}

inline bool check_endorsement(const Bytes& root_public_key,
                              const KeyEndorsement& e) noexcept {
  try {
    return verify(root_public_key, as_view(endorsement_body(e)),
                  as_view(e.signature));
  } catch (...) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Key files ("PEM-like": framed text with role headers and base64 parts)
// ---------------------------------------------------------------------------

struct KeyFile {
  std::string kind;  // "sign" or "enc"
  std::string role;  // "root", "issuer", "verifier", "helper"
  Bytes public_key;
  Bytes private_key;  // empty in public-only files
};

inline void save_key_file(const std::string& path, const KeyFile& kf) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << "-----BEGIN SECUREABC KEY-----\n";
  out << "kind: " << kf.kind << "\n";
  out << "role: " << kf.role << "\n";
  out << "public: " << base64_encode(as_view(kf.public_key)) << "\n";
  if (!kf.private_key.empty()) {
    out << "private: " << base64_encode(as_view(kf.private_key)) << "\n";
  }
  out << "-----END SECUREABC KEY-----\n";
  if (!out.flush()) throw Error(ErrorKind::io, "cannot write " + path);
}

inline KeyFile load_key_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  KeyFile kf;
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "-----BEGIN SECUREABC KEY-----") {
      inside = true;
      continue;
    }
    if (line == "-----END SECUREABC KEY-----") break;
    if (!inside || line.empty()) continue;
    auto colon = line.find(": ");
    if (colon == std::string::npos) {
      throw Error(ErrorKind::io, "bad key file line in " + path);
    }
    std::string field = line.substr(0, colon);
    std::string value = line.substr(colon + 2);
    if (field == "kind") kf.kind = value;
    else if (field == "role") kf.role = value;
    else if (field == "public") kf.public_key = base64_decode(value);
    else if (field == "private") kf.private_key = base64_decode(value);
    else throw Error(ErrorKind::io, "unknown key file field: " + field);
  }
  if (!inside || kf.kind.empty() || kf.public_key.empty()) {
    throw Error(ErrorKind::io, "not a key file: " + path);
  }
  return kf;
}

}  // namespace secureabc::crypto

#endif  // SECUREABC_CRYPTO_HPP
