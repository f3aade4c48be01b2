#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "secureabc/ss.hpp"

using namespace secureabc;

namespace {

constexpr Timestamp kNow = 1590000000;

struct Fixture {
  crypto::SigKeyPair issuer_keys = testutil::issuer_keys();
  crypto::EncKeyPair helper_enc;
  ss::SsParams params{model::kDefaultPrime, 3};
  Rng rng{70};

  Fixture() { helper_enc = crypto::keygen_enc(rng); }

  ss::SsIssue issue(std::uint64_t i_true, Timestamp from = kNow,
                    Timestamp until = kNow + 7 * 86400) {
    return ss::issue_ss_token(issuer_keys.private_key, helper_enc.public_key,
                              i_true, params, from, until, rng);
  }
};

}  // namespace

TEST_CASE("share arithmetic reconstructs the secret") {
  const std::uint64_t p = model::kDefaultPrime;
  // Forced example: i_true = 5 with share_V = 3 gives share_W = 2.
  REQUIRE(ss::complement_share(5, 3, p) == 2);
  REQUIRE(ss::add_mod(3, 2, p) == 5);
  // Wrap-around case: share_V > i_true.
  REQUIRE(ss::add_mod(7, ss::complement_share(5, 7, p), p) == 5);
}

TEST_CASE("random splits always reconstruct, including zero") {
  ss::SsParams params{model::kDefaultPrime, 4};
  Rng rng(71);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t i_true = rng.uniform_below(params.k);
    auto [v, w] = ss::split_shares(i_true, params, rng);
    REQUIRE(v < params.p);
    REQUIRE(w < params.p);
    REQUIRE(ss::add_mod(v, w, params.p) == i_true);
  }
  auto [v0, w0] = ss::split_shares(0, params, rng);
  REQUIRE(ss::add_mod(v0, w0, params.p) == 0);

  REQUIRE_THROWS_AS(ss::split_shares(4, params, rng), Error);
}

TEST_CASE("share_V is uniform regardless of the secret (p = 31)") {
  ss::SsParams small{31, 31};
  const std::uint64_t n = 100000;
  // chi-square critical value, df = 30, alpha = 0.01.
  const double critical = 50.8921813115;

  // One-sided view: the verifier-share distribution is the same whatever
  // the underlying i_true vector is.
  int seed = 72;
  for (std::uint64_t i_true : {std::uint64_t{1}, std::uint64_t{17}}) {
    Rng rng(seed++);
    std::vector<std::uint64_t> counts(31, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
      counts[ss::split_shares(i_true, small, rng).first] += 1;
    }
    REQUIRE(testutil::chi_square_uniform(counts, n) < critical);
  }
}

TEST_CASE_METHOD(Fixture, "issued tokens flow through both accumulators") {
  ss::VerifierAggregator verifier_agg(issuer_keys.public_key);
  ss::HelperAggregator helper_agg(issuer_keys.public_key,
                                  helper_enc.private_key);

  ss::SsIssue a = issue(2);
  ss::SsIssue b = issue(1);

  auto out_a = verifier_agg.ingest(a.token, kNow + 5);
  auto out_b = verifier_agg.ingest(b.token, kNow + 6);
  REQUIRE(out_a.accepted);
  REQUIRE(out_b.accepted);
  helper_agg.ingest(out_a.forward);
  helper_agg.ingest(out_b.forward);

  std::string period = utc_day(kNow + 5);
  const ss::Accumulator* v = verifier_agg.accumulator(period);
  const ss::Accumulator* w = helper_agg.accumulator(period);
  REQUIRE(v != nullptr);
  REQUIRE(w != nullptr);
  REQUIRE(v->count == 2);
  REQUIRE(w->count == 2);
  REQUIRE(ss::aggregate(*v, *w, params.p) == 3);
}

TEST_CASE_METHOD(Fixture, "hand-built shares accumulate verbatim") {
  // Tokens with share_V forced to 3 and 4: j_V ends at 7.
  ss::VerifierAggregator agg(issuer_keys.public_key);
  for (std::uint64_t share_v : {std::uint64_t{3}, std::uint64_t{4}}) {
    model::SsTokenRecord t;
    t.date_issue = kNow;
    t.date_end = kNow + 86400;
    t.share_v = share_v;
    t.enc_share_w = crypto::encrypt(helper_enc.public_key,
                                    as_view(u64_be_bytes(0)), rng);
    t.inner_signature =
        crypto::sign(issuer_keys.private_key, as_view(t.enc_share_w));
    t.prime_id = model::kDefaultPrimeId;
    t.signature = crypto::sign(issuer_keys.private_key,
                               as_view(model::ss_token_body(t)));
    REQUIRE(agg.ingest(t, kNow + 1).accepted);
  }
  REQUIRE(agg.accumulator(utc_day(kNow + 1))->value == 7);
}

TEST_CASE_METHOD(Fixture, "replay changes neither accumulator") {
  ss::VerifierAggregator verifier_agg(issuer_keys.public_key);
  ss::HelperAggregator helper_agg(issuer_keys.public_key,
                                  helper_enc.private_key);
  ss::SsIssue a = issue(2);

  auto first = verifier_agg.ingest(a.token, kNow + 5);
  REQUIRE(first.accepted);
  helper_agg.ingest(first.forward);
  std::string period = utc_day(kNow + 5);
  std::uint64_t jv = verifier_agg.accumulator(period)->value;
  std::uint64_t jw = helper_agg.accumulator(period)->value;

  auto replay = verifier_agg.ingest(a.token, kNow + 50);
  REQUIRE_FALSE(replay.accepted);
  REQUIRE(replay.reason == model::TokenReject::duplicate_token);
  REQUIRE(verifier_agg.accumulator(period)->value == jv);
  REQUIRE(verifier_agg.accumulator(period)->count == 1);
  REQUIRE(helper_agg.accumulator(period)->value == jw);
}

TEST_CASE_METHOD(Fixture, "tampered tokens are rejected at the right stage") {
  ss::VerifierAggregator verifier_agg(issuer_keys.public_key);
  ss::HelperAggregator helper_agg(issuer_keys.public_key,
                                  helper_enc.private_key);
  ss::SsIssue a = issue(1);

  SECTION("outer signature flip: verifier rejects, nothing forwarded") {
    model::SsTokenRecord bad = a.token;
    bad.signature[3] ^= 1;
    auto out = verifier_agg.ingest(bad, kNow + 5);
    REQUIRE_FALSE(out.accepted);
    REQUIRE(out.reason == model::TokenReject::bad_signature);
    REQUIRE(verifier_agg.accumulator(utc_day(kNow + 5)) == nullptr);
  }

  SECTION("share_V flip breaks the outer signature") {
    model::SsTokenRecord bad = a.token;
    bad.share_v ^= 1;
    REQUIRE(verifier_agg.ingest(bad, kNow + 5).reason ==
            model::TokenReject::bad_signature);
  }

  SECTION("expired tokens are rejected, nothing forwarded") {
    auto out = verifier_agg.ingest(a.token, a.token.date_end + 1);
    REQUIRE_FALSE(out.accepted);
    REQUIRE(out.reason == model::TokenReject::expired);
  }

  SECTION("inner signature flip: helper rejects") {
    auto out = verifier_agg.ingest(a.token, kNow + 5);
    REQUIRE(out.accepted);
    model::ForwardMessage bad = out.forward;
    bad.inner_signature[5] ^= 1;
    try {
      helper_agg.ingest(bad);
      FAIL("expected BadSignature");
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::bad_signature);
    }
  }

  SECTION("unsigned ciphertext: helper rejects before decrypting") {
    Bytes rogue_ct =
        crypto::encrypt(helper_enc.public_key, as_view(u64_be_bytes(999)), rng);
    model::ForwardMessage bad{rogue_ct, Bytes(crypto::kSignatureBytes, 0),
                              utc_day(kNow)};
    REQUIRE_THROWS_AS(helper_agg.ingest(bad), Error);
  }

  SECTION("share encrypted to the wrong helper: DecryptionFailure") {
    Rng r2(73);
    crypto::EncKeyPair other = crypto::keygen_enc(r2);
    Bytes ct =
        crypto::encrypt(other.public_key, as_view(u64_be_bytes(1)), rng);
    model::ForwardMessage bad{
        ct, crypto::sign(issuer_keys.private_key, as_view(ct)), utc_day(kNow)};
    try {
      helper_agg.ingest(bad);
      FAIL("expected DecryptionFailure");
    } catch (const Error& e) {
      REQUIRE(e.kind() == ErrorKind::decryption_failure);
    }
  }
}

TEST_CASE_METHOD(Fixture, "aggregation is exact against a plaintext oracle") {
  ss::VerifierAggregator verifier_agg(issuer_keys.public_key);
  ss::HelperAggregator helper_agg(issuer_keys.public_key,
                                  helper_enc.private_key);
  std::uint64_t oracle = 0;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t i_true = rng.uniform_below(3);
    ss::SsIssue tok = issue(i_true);
    auto out = verifier_agg.ingest(tok.token, kNow + 10 + i);
    REQUIRE(out.accepted);
    helper_agg.ingest(out.forward);
    oracle += i_true;
  }
  std::string period = utc_day(kNow + 10);
  REQUIRE(ss::aggregate(*verifier_agg.accumulator(period),
                        *helper_agg.accumulator(period),
                        params.p) == oracle);
  REQUIRE(verifier_agg.accumulator(period)->count ==
          helper_agg.accumulator(period)->count);
}

TEST_CASE("aggregate of empty accumulators is zero; period mismatch errors") {
  ss::Accumulator v, w;
  v.period = w.period = "2020-05-01";
  REQUIRE(ss::aggregate(v, w, model::kDefaultPrime) == 0);
  w.period = "2020-05-02";
  REQUIRE_THROWS_AS(ss::aggregate(v, w, model::kDefaultPrime), Error);
}

TEST_CASE("tokens cannot be minted for unregistered primes") {
  Rng rng(74);
  crypto::EncKeyPair helper = crypto::keygen_enc(rng);
  ss::SsParams small{31, 3};
  REQUIRE_THROWS_AS(
      ss::issue_ss_token(testutil::issuer_keys().private_key,
                         helper.public_key, 1, small, kNow, kNow + 10, rng),
      Error);
}
