#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "secureabc/wallet.hpp"

using namespace secureabc;

namespace {

constexpr Timestamp kNow = 1590000000;

struct Fixture {
  crypto::SigKeyPair root;
  crypto::SigKeyPair issuer_keys;
  crypto::EncKeyPair verifier_enc;
  model::VerifierCredential credential;
  model::SignedCertificate cert;
  Rng rng{40};

  Fixture() {
    root = testutil::root_keys();
    issuer_keys = testutil::issuer_keys();
    verifier_enc = crypto::keygen_enc(rng);
    credential = crypto::endorse_key(root.private_key, verifier_enc.public_key,
                                     crypto::Role::verifier, kNow - 100);
    cert = testutil::signed_certificate(rng, issuer_keys);
  }

  model::RevocationList rev_v(Timestamp issued_at,
                              std::vector<Bytes> entries = {},
                              const Bytes* signer = nullptr) {
    model::RevocationList list;
    list.kind = model::ListKind::verifier;
    list.issued_at = issued_at;
    std::sort(entries.begin(), entries.end());
    list.entries = std::move(entries);
    const Bytes& key = signer != nullptr ? *signer : root.private_key;
    list.signature =
        crypto::sign(key, as_view(model::revocation_list_body(list)));
    return list;
  }

  wallet::Wallet fresh_wallet() {
    wallet::Wallet w(cert, root.public_key);
    w.refresh_verifier_revocations(rev_v(kNow - 3600), kNow - 3600);
    return w;
  }
};

}  // namespace

TEST_CASE_METHOD(Fixture, "rev_V refresh accepts newer lists only") {
  wallet::Wallet w(cert, root.public_key);
  w.refresh_verifier_revocations(rev_v(kNow), kNow);
  REQUIRE(w.verifier_revocations()->issued_at == kNow);

  // Same issued_at is allowed; older is rollback and refused.
  REQUIRE_NOTHROW(w.refresh_verifier_revocations(rev_v(kNow), kNow + 1));
  try {
    w.refresh_verifier_revocations(rev_v(kNow - 5), kNow + 2);
    FAIL("expected StaleList");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::stale_list);
  }
  REQUIRE(w.verifier_revocations()->issued_at == kNow);

  SECTION("wrong list kind") {
    model::RevocationList cert_list;
    cert_list.kind = model::ListKind::certificate;
    cert_list.issued_at = kNow + 10;
    cert_list.signature = crypto::sign(
        root.private_key, as_view(model::revocation_list_body(cert_list)));
    REQUIRE_THROWS_AS(w.refresh_verifier_revocations(cert_list, kNow + 10),
                      Error);
  }

  SECTION("bad signature") {
    model::RevocationList forged = rev_v(kNow + 10, {}, &issuer_keys.private_key);
    try {
      w.refresh_verifier_revocations(forged, kNow + 10);
      FAIL("expected BadSignature");
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::bad_signature);
    }
  }
}

TEST_CASE_METHOD(Fixture, "check_verifier accepts endorsed, unrevoked keys") {
  wallet::Wallet w = fresh_wallet();
  REQUIRE(w.check_verifier(credential, kNow) == wallet::CheckOutcome::accept);
}

TEST_CASE_METHOD(Fixture, "check_verifier rejects revoked verifiers") {
  wallet::Wallet w(cert, root.public_key);
  Bytes fp = crypto::fingerprint(as_view(verifier_enc.public_key));
  w.refresh_verifier_revocations(rev_v(kNow, {fp}), kNow);
  REQUIRE(w.check_verifier(credential, kNow) ==
          wallet::CheckOutcome::verifier_revoked);
}

TEST_CASE_METHOD(Fixture, "check_verifier rejects self-signed credentials") {
  wallet::Wallet w = fresh_wallet();
  Rng r2(41);
  crypto::SigKeyPair rogue = crypto::keygen_sign(r2);
  crypto::EncKeyPair rogue_enc = crypto::keygen_enc(r2);
  model::VerifierCredential selfsigned = crypto::endorse_key(
      rogue.private_key, rogue_enc.public_key, crypto::Role::verifier, kNow);
  REQUIRE(w.check_verifier(selfsigned, kNow) ==
          wallet::CheckOutcome::bad_signature);

  // A helper-role endorsement is not a verifier credential.
  model::VerifierCredential wrong_role = crypto::endorse_key(
      root.private_key, rogue_enc.public_key, crypto::Role::helper, kNow);
  REQUIRE(w.check_verifier(wrong_role, kNow) ==
          wallet::CheckOutcome::bad_signature);
}

TEST_CASE_METHOD(Fixture, "stale or missing rev_V cache blocks checking") {
  wallet::Wallet no_cache(cert, root.public_key);
  try {
    no_cache.check_verifier(credential, kNow);
    FAIL("expected StaleCache");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::stale_cache);
  }

  wallet::Wallet w(cert, root.public_key);
  w.refresh_verifier_revocations(rev_v(kNow - 200000), kNow - 200000);
  try {
    w.check_verifier(credential, kNow);  // cache is ~55 h old
    FAIL("expected StaleCache");
  } catch (const Error& e) {
    REQUIRE(e.kind() == ErrorKind::stale_cache);
  }
}

TEST_CASE_METHOD(Fixture, "issuer-signed credentials need the compat flag") {
  model::VerifierCredential issuer_signed = crypto::endorse_key(
      issuer_keys.private_key, verifier_enc.public_key, crypto::Role::verifier,
      kNow);
  wallet::Wallet w = fresh_wallet();
  REQUIRE(w.check_verifier(issuer_signed, kNow) ==
          wallet::CheckOutcome::bad_signature);
  w.allow_issuer_signed_credentials({issuer_keys.public_key});
  REQUIRE(w.check_verifier(issuer_signed, kNow) ==
          wallet::CheckOutcome::accept);
}

TEST_CASE_METHOD(Fixture, "responses only follow an in-session acceptance") {
  wallet::Wallet w = fresh_wallet();

  SECTION("respond without check is a protocol violation") {
    try {
      w.app_auth_response(credential, kNow, rng);
      FAIL("expected ProtocolViolation");
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::protocol_violation);
    }
  }

  SECTION("respond after accept decrypts only under the verifier key") {
    REQUIRE(w.check_verifier(credential, kNow) == wallet::CheckOutcome::accept);
    Bytes ct = w.app_auth_response(credential, kNow + 10, rng);
    Bytes payload = crypto::decrypt(verifier_enc.private_key, as_view(ct));
    REQUIRE(model::decode_signed_certificate(as_view(payload)) == cert);

    Bytes ct2 = w.app_auth_response(credential, kNow + 20, rng);
    REQUIRE(ct2 != ct);  // randomized encryption
  }

  SECTION("sessions expire after five minutes") {
    REQUIRE(w.check_verifier(credential, kNow) == wallet::CheckOutcome::accept);
    REQUIRE_NOTHROW(w.app_auth_response(credential, kNow + 299, rng));
    REQUIRE_THROWS_AS(w.app_auth_response(credential, kNow + 301, rng), Error);
  }

  SECTION("an acceptance for one verifier does not open another's session") {
    Rng r2(42);
    crypto::EncKeyPair other_enc = crypto::keygen_enc(r2);
    model::VerifierCredential other = crypto::endorse_key(
        root.private_key, other_enc.public_key, crypto::Role::verifier, kNow);
    REQUIRE(w.check_verifier(credential, kNow) == wallet::CheckOutcome::accept);
    REQUIRE_THROWS_AS(w.app_auth_response(other, kNow, rng), Error);
  }
}

TEST_CASE_METHOD(Fixture, "release gating holds across random op sequences") {
  // Credentials: [0] honest, [1] revoked, [2] self-signed.
  Rng seq_rng(43);
  crypto::EncKeyPair revoked_enc = crypto::keygen_enc(seq_rng);
  model::VerifierCredential revoked_cred = crypto::endorse_key(
      root.private_key, revoked_enc.public_key, crypto::Role::verifier, kNow);
  crypto::SigKeyPair rogue = crypto::keygen_sign(seq_rng);
  crypto::EncKeyPair rogue_enc = crypto::keygen_enc(seq_rng);
  model::VerifierCredential rogue_cred = crypto::endorse_key(
      rogue.private_key, rogue_enc.public_key, crypto::Role::verifier, kNow);

  wallet::Wallet w(cert, root.public_key);
  Bytes revoked_fp = crypto::fingerprint(as_view(revoked_enc.public_key));
  w.refresh_verifier_revocations(rev_v(kNow, {revoked_fp}), kNow);

  const model::VerifierCredential* creds[3] = {&credential, &revoked_cred,
                                               &rogue_cred};
  const Bytes* privs[3] = {&verifier_enc.private_key, &revoked_enc.private_key,
                           &rogue_enc.private_key};
  bool accepted[3] = {false, false, false};
  Timestamp t = kNow;

  for (int step = 0; step < 300; ++step) {
    std::uint64_t pick = seq_rng.uniform_below(3);
    t += seq_rng.uniform_below(60);
    if (seq_rng.uniform_below(2) == 0) {
      wallet::CheckOutcome outcome = w.check_verifier(*creds[pick], t);
      bool ok = outcome == wallet::CheckOutcome::accept;
      REQUIRE(ok == (pick == 0));
      if (ok) accepted[pick] = true;
    } else {
      try {
        Bytes ct = w.app_auth_response(*creds[pick], t, seq_rng);
        // A ciphertext was released: only ever for the honest verifier,
        // and only decryptable with that verifier's private key.
        REQUIRE(pick == 0);
        REQUIRE(accepted[0]);
        Bytes plain = crypto::decrypt(*privs[0], as_view(ct));
        REQUIRE(model::decode_signed_certificate(as_view(plain)) == cert);
        for (int other = 1; other < 3; ++other) {
          REQUIRE_THROWS_AS(crypto::decrypt(*privs[other], as_view(ct)), Error);
        }
      } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::protocol_violation);
      }
    }
  }
}

TEST_CASE_METHOD(Fixture, "wallet bundles round-trip") {
  wallet::Wallet w = fresh_wallet();
  REQUIRE(w.check_verifier(credential, kNow) == wallet::CheckOutcome::accept);
  Bytes bundle = w.to_bundle();
  wallet::Wallet back = wallet::Wallet::from_bundle(as_view(bundle));
  REQUIRE(back.certificate() == cert);
  REQUIRE(back.trusted_root() == root.public_key);
  REQUIRE(back.verifier_revocations()->issued_at ==
          w.verifier_revocations()->issued_at);
  // The open session survives the round-trip.
  REQUIRE_NOTHROW(back.app_auth_response(credential, kNow + 10, rng));
  REQUIRE(back.to_bundle() == bundle);
}
