#ifndef SECUREABC_VERIFIER_HPP
#define SECUREABC_VERIFIER_HPP

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "secureabc/bytes.hpp"
#include "secureabc/crypto.hpp"
#include "secureabc/model.hpp"

namespace secureabc::verifier {

enum class RejectReason {
  malformed_payload,
  bad_signature,
  unknown_issuer,
  revoked,
  expired,
  not_yet_valid,
  decryption_failure,
};

inline const char* reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::malformed_payload: return "MalformedPayload";
    case RejectReason::bad_signature: return "BadSignature";
    case RejectReason::unknown_issuer: return "UnknownIssuer";
    case RejectReason::revoked: return "Revoked";
    case RejectReason::expired: return "Expired";
    case RejectReason::not_yet_valid: return "NotYetValid";
    case RejectReason::decryption_failure: return "DecryptionFailure";
  }
  return "?";
}

struct VerificationResult {
  bool accepted = false;
  RejectReason reason = RejectReason::malformed_payload;
  std::string detail;
  // Display attributes; populated only on accept.
  std::string name;
  Bytes photo;
  model::Cid cid{};
  Timestamp valid_until = 0;

  static VerificationResult reject(RejectReason r, std::string detail = "") {
    VerificationResult v;
    v.accepted = false;
    v.reason = r;
    v.detail = std::move(detail);
    return v;
  }
};

// Verity's side: endorsed issuer keys, the certificate revocation cache and
// the accept/reject decision for both authentication modes. Verification is
// offline; only refresh touches the outside world.
class Verifier {
public:
  explicit Verifier(Bytes trusted_root) : trusted_root_(std::move(trusted_root)) {}

  // Issuer keys are admitted only with a root endorsement for the issuer role.
  void add_issuer_key(const crypto::KeyEndorsement& endorsement) {
    if (endorsement.role != crypto::Role::issuer ||
        !crypto::check_endorsement(trusted_root_, endorsement)) {
      throw Error(ErrorKind::bad_signature, "issuer key endorsement invalid");
    }
    issuer_keys_.push_back(endorsement.subject_key);
    issuer_key_ids_.push_back(
        to_hex(as_view(crypto::fingerprint(as_view(endorsement.subject_key)))));
  }

  void set_enc_keys(crypto::EncKeyPair keys) { enc_keys_ = std::move(keys); }
  void set_credential(model::VerifierCredential credential) {
    credential_ = std::move(credential);
  }
  const std::optional<model::VerifierCredential>& credential() const {
    return credential_;
  }
  const std::optional<crypto::EncKeyPair>& enc_keys() const { return enc_keys_; }

  // Optional tolerance for clock disagreement in date checks; default strict.
  void set_clock_skew(Timestamp seconds) { skew_ = seconds; }

  const std::optional<model::RevocationList>& revocation_cache() const {
    return rev_cache_;
  }

  void refresh_revocations(const model::RevocationList& list) {
    if (list.kind != model::ListKind::certificate) {
      throw Error(ErrorKind::usage, "not a certificate revocation list");
    }
    Bytes body = model::revocation_list_body(list);
    bool signed_by_issuer = false;
    for (const Bytes& pk : issuer_keys_) {
      if (crypto::verify(pk, as_view(body), as_view(list.signature))) {
        signed_by_issuer = true;
        break;
      }
    }
    if (!signed_by_issuer) {
      throw Error(ErrorKind::bad_signature,
                  "revocation list not signed by a trusted issuer");
    }
    if (rev_cache_ && list.issued_at < rev_cache_->issued_at) {
      throw Error(ErrorKind::stale_list,
                  "revocation list older than cached (" +
                      std::to_string(list.issued_at) + " < " +
                      std::to_string(rev_cache_->issued_at) + ")");
    }
    rev_cache_ = list;
    revoked_cids_.clear();
    for (const Bytes& e : list.entries) revoked_cids_.insert(to_hex(as_view(e)));
  }

  // Fixed check order: decode, signature (incl. issuer-key lookup),
  // revocation, dates. The reject names the first failing check.
  VerificationResult verify_paper(ByteView payload, Timestamp now) const {
    if (!rev_cache_) {
      throw Error(ErrorKind::usage, "no revocation cache loaded");
    }
    model::SignedCertificate sc;
    try {
      sc = model::decode_signed_certificate(payload);
    } catch (const Error& e) {
      return VerificationResult::reject(RejectReason::malformed_payload,
                                        e.what());
    }

    const Bytes* issuer_key = nullptr;
    std::string want_id =
        to_hex(ByteView(sc.body.issuer_key_id.data(), sc.body.issuer_key_id.size()));
    for (std::size_t i = 0; i < issuer_keys_.size(); ++i) {
      if (issuer_key_ids_[i] == want_id) {
        issuer_key = &issuer_keys_[i];
        break;
      }
    }
    if (issuer_key == nullptr) {
      return VerificationResult::reject(RejectReason::unknown_issuer,
                                        "issuer key id " + want_id);
    }
    // Signed range: everything before the trailing signature field.
    ByteView signed_range = payload.first(
        payload.size() - tlv::kHeaderBytes - crypto::kSignatureBytes);
    if (!crypto::verify(*issuer_key, signed_range, as_view(sc.signature))) {
      return VerificationResult::reject(RejectReason::bad_signature);
    }

    if (revoked_cids_.count(model::cid_hex(sc.body.cid)) != 0) {
      return VerificationResult::reject(RejectReason::revoked,
                                        model::cid_hex(sc.body.cid));
    }

    if (now < sc.body.valid_from - skew_) {
      return VerificationResult::reject(RejectReason::not_yet_valid);
    }
    if (now > sc.body.valid_until + skew_) {
      return VerificationResult::reject(RejectReason::expired);
    }

    VerificationResult v;
    v.accepted = true;
    v.name = sc.body.name;
    v.photo = sc.body.photo;
    v.cid = sc.body.cid;
    v.valid_until = sc.body.valid_until;
    return v;
  }

  // App mode: decrypt cert'_A with sk_V, then proceed exactly as paper mode.
  VerificationResult verify_app(ByteView ciphertext, Timestamp now) const {
    if (!enc_keys_) {
      throw Error(ErrorKind::usage, "no encryption key configured");
    }
    Bytes payload;
    try {
      payload = crypto::decrypt(enc_keys_->private_key, ciphertext);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::decryption_failure) {
        return VerificationResult::reject(RejectReason::decryption_failure,
                                          e.what());
      }
      throw;
    }
    return verify_paper(as_view(payload), now);
  }

private:
  Bytes trusted_root_;
  std::vector<Bytes> issuer_keys_;
  std::vector<std::string> issuer_key_ids_;  // fingerprints, hex
  std::optional<model::RevocationList> rev_cache_;
  std::unordered_set<std::string> revoked_cids_;
  std::optional<crypto::EncKeyPair> enc_keys_;
  std::optional<model::VerifierCredential> credential_;
  Timestamp skew_ = 0;
};

}  // namespace secureabc::verifier

#endif  // SECUREABC_VERIFIER_HPP
