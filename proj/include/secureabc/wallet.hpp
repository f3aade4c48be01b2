#ifndef SECUREABC_WALLET_HPP
#define SECUREABC_WALLET_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "secureabc/bytes.hpp"
#include "secureabc/crypto.hpp"
#include "secureabc/model.hpp"
#include "secureabc/rng.hpp"

namespace secureabc::wallet {

enum class CheckOutcome {
  accept,
  bad_signature,     // credential does not verify under the trust anchor
  verifier_revoked,  // key fingerprint is on rev_V
};

inline const char* check_outcome_name(CheckOutcome o) {
  switch (o) {
    case CheckOutcome::accept: return "accept";
    case CheckOutcome::bad_signature: return "BadSignature";
    case CheckOutcome::verifier_revoked: return "VerifierRevoked";
  }
  return "?";
}

// Alice's side. Holds the credential, gates its release behind verifier
// validation (mutual authentication), and produces the encrypted app-auth
// response. The certificate plaintext never leaves the wallet except as the
// printable QR export the holder chooses to show.
class Wallet {
public:
  Wallet(model::SignedCertificate certificate, Bytes trusted_root)
      : certificate_(std::move(certificate)),
        trusted_root_(std::move(trusted_root)) {}

  static constexpr Timestamp kDefaultMaxCacheAge = 24 * 3600;
  static constexpr Timestamp kDefaultSessionTtl = 5 * 60;

  const model::SignedCertificate& certificate() const { return certificate_; }
  const Bytes& trusted_root() const { return trusted_root_; }

  // Compatibility mode: also accept verifier credentials endorsed by one of
  // these issuer keys instead of the root.
  void allow_issuer_signed_credentials(std::vector<Bytes> issuer_keys) {
    compat_issuer_keys_ = std::move(issuer_keys);
  }

  void set_max_cache_age(Timestamp seconds) { max_cache_age_ = seconds; }
  void set_session_ttl(Timestamp seconds) { session_ttl_ = seconds; }

  const std::optional<model::RevocationList>& verifier_revocations() const {
    return rev_v_cache_;
  }
  Timestamp fetched_at() const { return fetched_at_; }

  // Install a newer signed rev_V list. Rollback to an older list is refused.
  void refresh_verifier_revocations(const model::RevocationList& list,
                                    Timestamp now) {
    if (list.kind != model::ListKind::verifier) {
      throw Error(ErrorKind::usage, "not a verifier revocation list");
    }
    Bytes body = model::revocation_list_body(list);
    if (!crypto::verify(trusted_root_, as_view(body), as_view(list.signature))) {
      throw Error(ErrorKind::bad_signature, "rev_V signature invalid");
    }
    if (rev_v_cache_ && list.issued_at < rev_v_cache_->issued_at) {
      throw Error(ErrorKind::stale_list,
                  "rev_V list older than cached (" +
                      std::to_string(list.issued_at) + " < " +
                      std::to_string(rev_v_cache_->issued_at) + ")");
    }
    rev_v_cache_ = list;
    fetched_at_ = now;
  }

  // Mutual-authentication step: validate the verifier's endorsed key against
  // the cached rev_V before anything is released. An accept opens a session
  // for this credential's fingerprint.
  CheckOutcome check_verifier(const model::VerifierCredential& credential,
                              Timestamp now) {
    if (!rev_v_cache_) {
      throw Error(ErrorKind::stale_cache, "no verifier revocation list cached");
    }
    if (now - fetched_at_ > max_cache_age_) {
      throw Error(ErrorKind::stale_cache,
                  "verifier revocation list cached " +
                      std::to_string(now - fetched_at_) + " s ago");
    }
    if (!credential_trusted(credential)) return CheckOutcome::bad_signature;
    Bytes fp = crypto::fingerprint(as_view(credential.subject_key));
    if (model::revocation_contains(*rev_v_cache_, as_view(fp))) {
      return CheckOutcome::verifier_revoked;
    }
    sessions_[to_hex(as_view(fp))] = now + session_ttl_;
    return CheckOutcome::accept;
  }

  // cert'_A = enc_{pk_V}(TLV(cert_A)). Only valid inside a session opened by
  // check_verifier for the same credential.
  Bytes app_auth_response(const model::VerifierCredential& credential,
                          Timestamp now, Rng& rng) {
    Bytes fp = crypto::fingerprint(as_view(credential.subject_key));
    auto it = sessions_.find(to_hex(as_view(fp)));
    if (it == sessions_.end() || now > it->second) {
      throw Error(ErrorKind::protocol_violation,
                  "no verifier acceptance in this session");
    }
    Bytes payload = model::encode_signed_certificate(certificate_);
    Bytes ciphertext =
        crypto::encrypt(credential.subject_key, as_view(payload), rng);
    std::size_t text_len = ((ciphertext.size() + 2) / 3) * 4;
    if (text_len > model::kQrCapacityBytes) {
      throw Error(ErrorKind::capacity_exceeded,
                  "response " + std::to_string(text_len) +
                      " bytes (base64) exceeds QR capacity " +
                      std::to_string(model::kQrCapacityBytes));
    }
    return ciphertext;
  }

  // Static payload for printing (paper mode).
  Bytes export_qr(bool text_mode) const {
    return model::qr_payload(
        as_view(model::encode_signed_certificate(certificate_)), text_mode);
  }

  void drop_expired_sessions(Timestamp now) {
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now > it->second) it = sessions_.erase(it);
      else ++it;
    }
  }

  // ---- wallet file (TLV bundle) ----

  Bytes to_bundle() const {
    tlv::Writer w;
    w.add(tlv::kTagWalletCert,
          as_view(model::encode_signed_certificate(certificate_)));
    if (rev_v_cache_) {
      w.add(tlv::kTagWalletRevList,
            as_view(model::encode_revocation_list(*rev_v_cache_)));
    }
    w.add_i64(tlv::kTagFetchedAt, fetched_at_);
    Bytes sessions;
    for (const auto& [fp_hex, expiry] : sessions_) {
      Bytes fp = from_hex(fp_hex);
      sessions.insert(sessions.end(), fp.begin(), fp.end());
      put_u64_be(sessions, static_cast<std::uint64_t>(expiry));
    }
    w.add(tlv::kTagSessions, as_view(sessions));
    w.add(tlv::kTagWalletRoot, as_view(trusted_root_));
    return w.take();
  }

  static Wallet from_bundle(ByteView data) {
    tlv::Reader r(data);
    auto cert = r.expect(tlv::kTagWalletCert);
    model::SignedCertificate sc = model::decode_signed_certificate(cert.value);
    std::optional<model::RevocationList> cache;
    auto f = r.next();
    if (f.tag == tlv::kTagWalletRevList) {
      cache = model::decode_revocation_list(f.value);
      f = r.expect(tlv::kTagFetchedAt);
    } else if (f.tag != tlv::kTagFetchedAt) {
      throw MalformedError(f.offset, "unexpected tag in wallet bundle");
    }
    if (f.value.size() != 8) throw MalformedError(f.offset, "bad fetched_at");
    Timestamp fetched = static_cast<Timestamp>(get_u64_be(f.value));
    auto sessions = r.expect(tlv::kTagSessions);
    if (sessions.value.size() % (crypto::kFingerprintBytes + 8) != 0) {
      throw MalformedError(sessions.offset, "bad session table");
    }
    auto root = r.expect_len(tlv::kTagWalletRoot, crypto::kSigPublicKeyBytes);
    r.expect_end();

    Wallet w(std::move(sc), Bytes(root.value.begin(), root.value.end()));
    w.rev_v_cache_ = std::move(cache);
    w.fetched_at_ = fetched;
    for (std::size_t i = 0; i < sessions.value.size();
         i += crypto::kFingerprintBytes + 8) {
      ByteView fp = sessions.value.subspan(i, crypto::kFingerprintBytes);
      Timestamp expiry = static_cast<Timestamp>(
          get_u64_be(sessions.value.subspan(i + crypto::kFingerprintBytes, 8)));
      w.sessions_[to_hex(fp)] = expiry;
    }
    return w;
  }

private:
  bool credential_trusted(const model::VerifierCredential& credential) const {
    if (credential.role != crypto::Role::verifier) return false;
    if (crypto::check_endorsement(trusted_root_, credential)) return true;
    for (const Bytes& pk : compat_issuer_keys_) {
      if (crypto::check_endorsement(pk, credential)) return true;
    }
    return false;
  }

  model::SignedCertificate certificate_;
  Bytes trusted_root_;
  std::vector<Bytes> compat_issuer_keys_;
  std::optional<model::RevocationList> rev_v_cache_;
  Timestamp fetched_at_ = 0;
  Timestamp max_cache_age_ = kDefaultMaxCacheAge;
  Timestamp session_ttl_ = kDefaultSessionTtl;
  std::map<std::string, Timestamp> sessions_;  // fingerprint hex -> expiry
};

}  // namespace secureabc::wallet

#endif  // SECUREABC_WALLET_HPP
