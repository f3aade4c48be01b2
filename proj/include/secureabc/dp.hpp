#ifndef SECUREABC_DP_HPP
#define SECUREABC_DP_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "secureabc/bytes.hpp"
#include "secureabc/crypto.hpp"
#include "secureabc/model.hpp"
#include "secureabc/rng.hpp"

namespace secureabc::dp {

// k-ary randomized response: keep the true value with probability
// (e^eps - 1)/(e^eps + k - 1), otherwise answer uniformly at random (which
// may repeat the true value). Overall P(output = input) = e^eps/(e^eps+k-1),
// and the mechanism satisfies eps-LDP with equality.
struct DpParams {
  std::uint64_t k = 2;
  double epsilon = 0.0;

  void validate() const {
    if (k < 2) throw Error(ErrorKind::usage, "k must be at least 2");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw Error(ErrorKind::usage, "epsilon must be positive and finite");
    }
  }

  // (e^eps - 1)/(e^eps + k - 1); expm1 keeps precision for tiny epsilon.
  double keep_probability() const {
    return std::expm1(epsilon) /
           (std::exp(epsilon) + static_cast<double>(k) - 1.0);
  }

  // P(output = i | input = i) = e^eps/(e^eps + k - 1)
  double truth_probability() const {
    double e = std::exp(epsilon);
    return e / (e + static_cast<double>(k) - 1.0);
  }

  // P(output = j | input = i), j != i: 1/(e^eps + k - 1)
  double noise_probability() const {
    return 1.0 / (std::exp(epsilon) + static_cast<double>(k) - 1.0);
  }
};

inline double response_pmf(const DpParams& params, std::uint64_t input,
                           std::uint64_t output) {
  params.validate();
  if (input >= params.k || output >= params.k) {
    throw Error(ErrorKind::usage, "value out of domain");
  }
  return input == output ? params.truth_probability()
                         : params.noise_probability();
}

inline std::uint64_t randomize_response(std::uint64_t i_true,
                                        const DpParams& params, Rng& rng) {
  params.validate();
  if (i_true >= params.k) {
    throw Error(ErrorKind::usage, "i_true out of domain");
  }
  if (rng.uniform_unit() < params.keep_probability()) return i_true;
  return rng.uniform_below(params.k);
}

struct DpIssue {
  model::DpTokenRecord token;
  std::uint64_t i_true;  // the holder still learns her true result
};

inline DpIssue issue_dp_token(const Bytes& issuer_private_key,
                              std::uint64_t i_true, const DpParams& params,
                              Timestamp date_issue, Timestamp date_end,
                              Rng& rng) {
  model::DpTokenRecord t;
  t.i_dp = randomize_response(i_true, params, rng);
  t.k = params.k;
  t.epsilon = params.epsilon;
  t.date_issue = date_issue;
  t.date_end = date_end;
  t.signature =
      crypto::sign(issuer_private_key, as_view(model::dp_token_body(t)));
  return DpIssue{std::move(t), i_true};
}

inline bool verify_dp_token_signature(const Bytes& issuer_public_key,
                                      const model::DpTokenRecord& t) {
  return crypto::verify(issuer_public_key, as_view(model::dp_token_body(t)),
                        as_view(t.signature));
}

// Observed counts of each randomized level within one reporting period.
struct RiskHistogram {
  std::string period;
  std::vector<std::uint64_t> counts;
  std::uint64_t n = 0;  // = sum(counts)
};

// Per-period aggregation with replay suppression keyed on the token
// signature. Reporting periods default to UTC calendar days; pass a custom
// period function for other windows (weeks, shifts).
class Aggregator {
public:
  using PeriodFn = std::function<std::string(Timestamp)>;

  struct PeriodState {
    std::vector<std::uint64_t> counts;
    std::unordered_set<std::string> seen_ids;  // token signatures, hex
  };

  struct Outcome {
    bool accepted = false;
    model::TokenReject reason = model::TokenReject::bad_signature;
    std::uint64_t i_dp = 0;
  };

  Aggregator(Bytes issuer_public_key, DpParams params,
             PeriodFn period_fn = nullptr)
      : issuer_public_key_(std::move(issuer_public_key)),
        params_(params),
        period_fn_(period_fn ? std::move(period_fn)
                             : PeriodFn([](Timestamp t) { return utc_day(t); })) {
    params_.validate();
  }

  const DpParams& params() const { return params_; }

  std::string period_of(Timestamp now) const { return period_fn_(now); }

  Outcome verify_token(const model::DpTokenRecord& token, Timestamp now) {
    if (token.k != params_.k || token.epsilon != params_.epsilon) {
      throw Error(ErrorKind::usage, "token parameters do not match aggregator");
    }
    Outcome out;
    if (!verify_dp_token_signature(issuer_public_key_, token)) {
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
    PeriodState& state = period_state(period_fn_(now));
    std::string id = to_hex(as_view(token.token_id()));
    if (!state.seen_ids.insert(id).second) {
      out.reason = model::TokenReject::duplicate_token;
      return out;
    }
    state.counts[token.i_dp] += 1;
    out.accepted = true;
    out.i_dp = token.i_dp;
    return out;
  }

  RiskHistogram histogram(const std::string& period) const {
    RiskHistogram h;
    h.period = period;
    auto it = periods_.find(period);
    if (it == periods_.end()) {
      h.counts.assign(params_.k, 0);
      return h;
    }
    h.counts = it->second.counts;
    for (std::uint64_t c : h.counts) h.n += c;
    return h;
  }

  const std::map<std::string, PeriodState>& periods() const { return periods_; }

  // For reloading persisted state.
  void restore_period(const std::string& period,
                      std::vector<std::uint64_t> counts,
                      std::unordered_set<std::string> seen_ids) {
    if (counts.size() != params_.k) {
      throw Error(ErrorKind::usage, "restored counts have wrong arity");
    }
    PeriodState& s = period_state(period);
    s.counts = std::move(counts);
    s.seen_ids = std::move(seen_ids);
  }

private:
  PeriodState& period_state(const std::string& period) {
    auto [it, inserted] = periods_.try_emplace(period);
    if (inserted) it->second.counts.assign(params_.k, 0);
    return it->second;
  }

  Bytes issuer_public_key_;
  DpParams params_;
  PeriodFn period_fn_;
  std::map<std::string, PeriodState> periods_;
};

enum class DebiasMode {
  paper_eq1,  // f_hat = ((e^eps+k-1)/(e^eps-1)) * (f_tilde - 1/k)
  unbiased,   // f_hat = ((e^eps+k-1)/(e^eps-1)) * (f_tilde - 1/(e^eps+k-1))
};

inline DebiasMode debias_mode_from_name(const std::string& s) {
  if (s == "paper" || s == "paper_eq1") return DebiasMode::paper_eq1;
  if (s == "unbiased") return DebiasMode::unbiased;
  throw Error(ErrorKind::usage, "unknown debias mode: " + s);
}

// Invert the randomized-response channel on observed frequencies.
//
// The two modes differ in the subtracted baseline. For this mechanism the
// per-cell report probability is q + (p - q) * f_i with p = e^eps/(e^eps+k-1)
// and q = 1/(e^eps+k-1), so subtracting q (unbiased mode) recovers f exactly
// in expectation, while subtracting 1/k converges to f - 1/k per component.
// Both are provided; estimates are returned unclipped.
inline std::vector<double> debias(const RiskHistogram& hist,
                                  const DpParams& params, DebiasMode mode) {
  params.validate();
  if (hist.n == 0) throw Error(ErrorKind::usage, "empty histogram");
  if (hist.counts.size() != params.k) {
    throw Error(ErrorKind::usage, "histogram arity does not match k");
  }
  double e = std::exp(params.epsilon);
  double kd = static_cast<double>(params.k);
  double scale = (e + kd - 1.0) / std::expm1(params.epsilon);
  double baseline =
      mode == DebiasMode::paper_eq1 ? 1.0 / kd : 1.0 / (e + kd - 1.0);
  std::vector<double> out(params.k);
  for (std::size_t i = 0; i < params.k; ++i) {
    double f_tilde =
        static_cast<double>(hist.counts[i]) / static_cast<double>(hist.n);
    out[i] = scale * (f_tilde - baseline);
  }
  return out;
}

// Convenience variant with estimates clamped into [0, 1].
inline std::vector<double> debias_clipped(const RiskHistogram& hist,
                                          const DpParams& params,
                                          DebiasMode mode) {
  std::vector<double> out = debias(hist, params, mode);
  for (double& v : out) v = std::min(1.0, std::max(0.0, v));
  return out;
}

}  // namespace secureabc::dp

#endif  // SECUREABC_DP_HPP
