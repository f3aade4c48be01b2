#ifndef SECUREABC_SS_HPP
#define SECUREABC_SS_HPP

#include <functional>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>

#include "secureabc/bytes.hpp"
#include "secureabc/crypto.hpp"
#include "secureabc/model.hpp"
#include "secureabc/rng.hpp"

namespace secureabc::ss {

// Additive two-party secret sharing over Z_p. The verifier sees one uniform
// share in the clear; the helper's share travels encrypted to pk_W and
// signed by the issuer. Accumulating shares modulo p and summing the two
// published accumulators yields the exact plaintext total.
struct SsParams {
  std::uint64_t p = model::kDefaultPrime;  // caller supplies a prime
  std::uint64_t k = 2;                     // risk values are {0, ..., k-1}

  void validate() const {
    if (p < 2 || p > model::kDefaultPrime) {
      throw Error(ErrorKind::usage, "bad prime modulus");
    }
    if (k < 1 || k > p) throw Error(ErrorKind::usage, "bad risk domain");
  }

  // Only registered primes may appear on the wire.
  std::uint8_t prime_id() const {
    if (p != model::kDefaultPrime) {
      throw Error(ErrorKind::usage, "prime has no registered wire id");
    }
    return model::kDefaultPrimeId;
  }
};

inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b,
                             std::uint64_t p) {
  return (a + b) % p;  // p < 2^61, no overflow in 64 bits
}

// (i_true - share_v) mod p
inline std::uint64_t complement_share(std::uint64_t i_true,
                                      std::uint64_t share_v, std::uint64_t p) {
  return (i_true + p - share_v) % p;
}

// share_V uniform in [0, p); share_W = (i_true - share_V) mod p.
inline std::pair<std::uint64_t, std::uint64_t> split_shares(
    std::uint64_t i_true, const SsParams& params, Rng& rng) {
  params.validate();
  if (i_true >= params.k) {
    throw Error(ErrorKind::usage, "i_true out of domain");
  }
  std::uint64_t share_v = rng.uniform_below(params.p);
  return {share_v, complement_share(i_true, share_v, params.p)};
}

struct SsIssue {
  model::SsTokenRecord token;
  std::uint64_t i_true;  // the holder still learns her true result
};

inline SsIssue issue_ss_token(const Bytes& issuer_private_key,
                              const Bytes& helper_public_key,
                              std::uint64_t i_true, const SsParams& params,
                              Timestamp date_issue, Timestamp date_end,
                              Rng& rng) {
  auto [share_v, share_w] = split_shares(i_true, params, rng);
  model::SsTokenRecord t;
  t.date_issue = date_issue;
  t.date_end = date_end;
  t.share_v = share_v;
  t.enc_share_w =
      crypto::encrypt(helper_public_key, as_view(u64_be_bytes(share_w)), rng);
  t.inner_signature =
      crypto::sign(issuer_private_key, as_view(t.enc_share_w));
  t.prime_id = params.prime_id();
  t.signature =
      crypto::sign(issuer_private_key, as_view(model::ss_token_body(t)));
  return SsIssue{std::move(t), i_true};
}

// Running modular sum of shares for one reporting period.
struct Accumulator {
  std::string period;
  std::uint64_t value = 0;
  std::uint64_t count = 0;  // tokens absorbed
};

// Verity's accumulator: checks the outer signature and dates, suppresses
// replays per period, folds share_V into j_V and emits the forward message
// that carries the helper share onward.
class VerifierAggregator {
public:
  using PeriodFn = std::function<std::string(Timestamp)>;

  struct PeriodState {
    Accumulator acc;
    std::unordered_set<std::string> seen_ids;
  };

  struct Outcome {
    bool accepted = false;
    model::TokenReject reason = model::TokenReject::bad_signature;
    model::ForwardMessage forward;  // meaningful only when accepted
  };

  explicit VerifierAggregator(Bytes issuer_public_key,
                              PeriodFn period_fn = nullptr)
      : issuer_public_key_(std::move(issuer_public_key)),
        period_fn_(period_fn ? std::move(period_fn)
                             : PeriodFn([](Timestamp t) { return utc_day(t); })) {}

  Outcome ingest(const model::SsTokenRecord& token, Timestamp now) {
    Outcome out;
    if (!crypto::verify(issuer_public_key_, as_view(model::ss_token_body(token)),
                        as_view(token.signature))) {
      out.reason = model::TokenReject::bad_signature;
      return out;
    }
    if (now < token.date_issue) {
      out.reason = model::TokenReject::not_yet_valid;
      return out;
    }
    if (now > token.date_end) {
      out.reason = model::TokenReject::expired;
      return out;
    }
    std::string period = period_fn_(now);
    PeriodState& state = period_state(period);
    std::string id = to_hex(as_view(token.token_id()));
    if (!state.seen_ids.insert(id).second) {
      out.reason = model::TokenReject::duplicate_token;
      return out;
    }
    std::uint64_t p = model::prime_from_id(token.prime_id);
    state.acc.value = add_mod(state.acc.value, token.share_v, p);
    state.acc.count += 1;
    out.accepted = true;
    out.forward =
        model::ForwardMessage{token.enc_share_w, token.inner_signature, period};
    return out;
  }

  const Accumulator* accumulator(const std::string& period) const {
    auto it = periods_.find(period);
    return it == periods_.end() ? nullptr : &it->second.acc;
  }

  const std::map<std::string, PeriodState>& periods() const { return periods_; }

  void restore_period(const std::string& period, std::uint64_t value,
                      std::uint64_t count,
                      std::unordered_set<std::string> seen_ids) {
    PeriodState& s = period_state(period);
    s.acc.value = value;
    s.acc.count = count;
    s.seen_ids = std::move(seen_ids);
  }

private:
  PeriodState& period_state(const std::string& period) {
    auto [it, inserted] = periods_.try_emplace(period);
    if (inserted) it->second.acc.period = period;
    return it->second;
  }

  Bytes issuer_public_key_;
  PeriodFn period_fn_;
  std::map<std::string, PeriodState> periods_;
};

// W's side: verifies the issuer's inner signature on the ciphertext before
// decrypting, so adversarial inputs cannot corrupt the sum.
class HelperAggregator {
public:
  HelperAggregator(Bytes issuer_public_key, Bytes enc_private_key)
      : issuer_public_key_(std::move(issuer_public_key)),
        enc_private_key_(std::move(enc_private_key)) {}

  void ingest(const model::ForwardMessage& msg) {
    if (!crypto::verify(issuer_public_key_, as_view(msg.enc_share_w),
                        as_view(msg.inner_signature))) {
      throw Error(ErrorKind::bad_signature, "inner signature invalid");
    }
    Bytes plain = crypto::decrypt(enc_private_key_, as_view(msg.enc_share_w));
    if (plain.size() != 8) {
      throw Error(ErrorKind::malformed_payload, "helper share not 8 bytes");
    }
    std::uint64_t share_w = get_u64_be(as_view(plain));
    if (share_w >= model::kDefaultPrime) {
      throw Error(ErrorKind::malformed_payload, "helper share not reduced");
    }
    Accumulator& acc = period_acc(msg.period);
    acc.value = add_mod(acc.value, share_w, model::kDefaultPrime);
    acc.count += 1;
  }

  const Accumulator* accumulator(const std::string& period) const {
    auto it = periods_.find(period);
    return it == periods_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, Accumulator>& periods() const { return periods_; }

  void restore_period(const std::string& period, std::uint64_t value,
                      std::uint64_t count) {
    Accumulator& acc = period_acc(period);
    acc.value = value;
    acc.count = count;
  }

private:
  Accumulator& period_acc(const std::string& period) {
    auto [it, inserted] = periods_.try_emplace(period);
    if (inserted) it->second.period = period;
    return it->second;
  }

  Bytes issuer_public_key_;
  Bytes enc_private_key_;
  std::map<std::string, Accumulator> periods_;
};

// (j_V + j_W) mod p = sum of i_true over every absorbed token, exactly,
// provided both accumulators cover the same period.
inline std::uint64_t aggregate(const Accumulator& v, const Accumulator& w,
                               std::uint64_t p) {
  if (v.period != w.period) {
    throw Error(ErrorKind::usage, "accumulator periods differ: " + v.period +
                                      " vs " + w.period);
  }
  return add_mod(v.value, w.value, p);
}

}  // namespace secureabc::ss

#endif  // SECUREABC_SS_HPP
