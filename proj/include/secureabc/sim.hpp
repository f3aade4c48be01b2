#ifndef SECUREABC_SIM_HPP
#define SECUREABC_SIM_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "secureabc/bytes.hpp"
#include "secureabc/crypto.hpp"
#include "secureabc/dp.hpp"
#include "secureabc/issuer.hpp"
#include "secureabc/model.hpp"
#include "secureabc/rng.hpp"
#include "secureabc/ss.hpp"
#include "secureabc/verifier.hpp"
#include "secureabc/wallet.hpp"

namespace secureabc::sim {

// ---------------------------------------------------------------------------
// Randomized-response error curves
// ---------------------------------------------------------------------------

struct ErrorCurveConfig {
  std::vector<double> epsilons;
  std::uint64_t k = 2;
  std::vector<std::uint64_t> n_values;
  std::uint64_t trials = 200;
  std::vector<double> true_distribution;  // empty = uniform over k
  std::uint64_t seed = 0;

  void validate() const {
    if (epsilons.empty() || n_values.empty()) {
      throw Error(ErrorKind::usage, "empty epsilon or n grid");
    }
    if (trials < 1) throw Error(ErrorKind::usage, "trials below 1");
    if (k < 2) throw Error(ErrorKind::usage, "k must be at least 2");
    for (std::size_t i = 1; i < n_values.size(); ++i) {
      if (n_values[i] <= n_values[i - 1]) {
        throw Error(ErrorKind::usage, "n_values must be ascending");
      }
    }
    if (!true_distribution.empty()) {
      if (true_distribution.size() != k) {
        throw Error(ErrorKind::usage, "true_distribution arity mismatch");
      }
      double sum = 0;
      for (double p : true_distribution) {
        if (p < 0) throw Error(ErrorKind::usage, "negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorKind::usage, "true_distribution does not sum to 1");
      }
    }
  }
};

struct ErrorCurveRow {
  double epsilon;
  std::uint64_t n;
  std::uint64_t trials;
  double mean_abs_error;
};

namespace detail {

inline std::uint64_t sample_from(const std::vector<double>& cdf, Rng& rng) {
  double u = rng.uniform_unit();
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    if (u < cdf[i]) return i;
  }
  return cdf.size() - 1;
}

}  // namespace detail

// One trial: draw n true values, push each through randomized response,
// debias the observed frequencies (unbiased mode) and record the mean
// absolute component error |f_hat - f|. Rows report the mean over trials.
// Each trial derives its own seed, so trial order (or parallel evaluation)
// cannot change results.
inline std::vector<ErrorCurveRow> run_error_curve(const ErrorCurveConfig& cfg) {
  cfg.validate();
  std::vector<double> truth = cfg.true_distribution;
  if (truth.empty()) truth.assign(cfg.k, 1.0 / static_cast<double>(cfg.k));
  std::vector<double> cdf(truth.size());
  double acc = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    acc += truth[i];
    cdf[i] = acc;
  }

  std::vector<ErrorCurveRow> rows;
  for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
    dp::DpParams params{cfg.k, cfg.epsilons[ei]};
    params.validate();
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
      std::uint64_t n = cfg.n_values[ni];
      double total_err = 0;
      for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        std::uint64_t stream =
            (static_cast<std::uint64_t>(ei) * 1000003u + ni) * 1000003u + t;
        Rng rng(Rng::mix(cfg.seed, stream));
        std::vector<std::uint64_t> counts(cfg.k, 0);
        for (std::uint64_t s = 0; s < n; ++s) {
          std::uint64_t i_true = detail::sample_from(cdf, rng);
          counts[dp::randomize_response(i_true, params, rng)] += 1;
        }
        dp::RiskHistogram hist{"trial", counts, n};
        std::vector<double> est =
            dp::debias(hist, params, dp::DebiasMode::unbiased);
        double err = 0;
        for (std::size_t i = 0; i < est.size(); ++i) {
          err += std::abs(est[i] - truth[i]);
        }
        total_err += err / static_cast<double>(cfg.k);
      }
      rows.push_back(ErrorCurveRow{cfg.epsilons[ei], n, cfg.trials,
                                   total_err / static_cast<double>(cfg.trials)});
    }
  }
  return rows;
}

inline std::string error_curve_csv(const std::vector<ErrorCurveRow>& rows) {
  std::string out = "epsilon,n,trials,mean_abs_error\n";
  char buf[128];
  for (const ErrorCurveRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%llu,%llu,%.9g\n", r.epsilon,
                  static_cast<unsigned long long>(r.n),
                  static_cast<unsigned long long>(r.trials), r.mean_abs_error);
    out += buf;
  }
  return out;
}

// Least-squares slope of log(err) against log(n); about -1/2 for this
// mechanism.
inline double log_log_slope(const std::vector<ErrorCurveRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = rows.size();
  if (n < 2) throw Error(ErrorKind::usage, "need at least 2 points");
  for (const ErrorCurveRow& r : rows) {
    double x = std::log(static_cast<double>(r.n));
    double y = std::log(r.mean_abs_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double nd = static_cast<double>(n);
  return (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// End-to-end protocol scenarios
// ---------------------------------------------------------------------------

struct ScenarioConfig {
  std::uint64_t population = 100;  // cap on issued certificates
  double issue_rate = 10.0;        // events per simulated day
  double auth_rate = 20.0;
  double revoke_rate = 1.0;
  std::uint64_t days = 10;
  std::uint64_t seed = 0;
  // Plumbing knobs (defaults mirror a plausible deployment).
  bool immediate_refresh = false;  // publish+refresh after every revoke
  std::uint64_t risk_levels = 3;
  double epsilon = 1.0986122886681098;  // log 3
  int cert_validity_days = 90;

  void validate() const {
    if (issue_rate < 0 || auth_rate < 0 || revoke_rate < 0) {
      throw Error(ErrorKind::usage, "rates must be non-negative");
    }
    if (days < 1) throw Error(ErrorKind::usage, "days below 1");
  }
};

struct ScenarioReport {
  std::uint64_t issued = 0;
  std::uint64_t revocations = 0;
  std::uint64_t auth_attempts = 0;
  std::uint64_t auth_accepted = 0;
  std::map<std::string, std::uint64_t> rejected_by_reason;
  // Auths accepted while the issuer had already flipped the revocation bit
  // but the verifier cache had not yet caught up.
  std::uint64_t wrongly_accepted = 0;
  std::uint64_t dp_accepted = 0;
  std::uint64_t dp_duplicates = 0;
  std::uint64_t ss_accepted = 0;
  std::uint64_t ss_duplicates = 0;
  std::uint64_t ss_total = 0;     // sum of per-period aggregates
  std::uint64_t ss_expected = 0;  // plaintext oracle over accepted tokens
  bool ss_exact = false;
  std::vector<double> dp_true_freq;
  std::vector<double> dp_estimate;
  double dp_max_abs_error = 0.0;
};

namespace detail {

inline std::uint64_t poisson(double rate, Rng& rng) {
  if (rate <= 0) return 0;
  double limit = std::exp(-rate);
  std::uint64_t count = 0;
  double prod = 1.0;
  for (;;) {
    prod *= rng.uniform_unit();
    if (prod <= limit) return count;
    ++count;
  }
}

}  // namespace detail

// Drives issuer / holder wallets / verifier / token aggregators through a
// seeded event stream of issues, authentications and revocations.
inline ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  constexpr Timestamp kEpoch = 1600000000;  // scenario day 0

  crypto::SigKeyPair root = crypto::keygen_sign(rng);
  crypto::SigKeyPair issuer_key = crypto::keygen_sign(rng);
  crypto::KeyEndorsement issuer_endorsement = crypto::endorse_key(
      root.private_key, issuer_key.public_key, crypto::Role::issuer, kEpoch);
  crypto::EncKeyPair verifier_enc = crypto::keygen_enc(rng);
  model::VerifierCredential verifier_credential = crypto::endorse_key(
      root.private_key, verifier_enc.public_key, crypto::Role::verifier, kEpoch);
  crypto::EncKeyPair helper_enc = crypto::keygen_enc(rng);

  issuer::Issuer harry(issuer_key);
  verifier::Verifier verity(root.public_key);
  verity.add_issuer_key(issuer_endorsement);
  verity.set_enc_keys(verifier_enc);
  verity.set_credential(verifier_credential);

  dp::DpParams dp_params{cfg.risk_levels, cfg.epsilon};
  dp::Aggregator dp_agg(issuer_key.public_key, dp_params);
  ss::SsParams ss_params{model::kDefaultPrime, cfg.risk_levels};
  ss::VerifierAggregator ss_verifier(issuer_key.public_key);
  ss::HelperAggregator ss_helper(issuer_key.public_key, helper_enc.private_key);

  struct Holder {
    wallet::Wallet wallet;
    model::Cid cid;
    std::uint64_t i_true;
    model::DpTokenRecord dp_token;
    model::SsTokenRecord ss_token;
  };
  std::vector<Holder> holders;

  // rev_V stays empty throughout; holders still refresh it to keep their
  // caches fresh enough for mutual authentication.
  auto rev_v_for = [&](Timestamp now) {
    model::RevocationList list;
    list.kind = model::ListKind::verifier;
    list.issued_at = now;
    list.signature = crypto::sign(
        root.private_key, as_view(model::revocation_list_body(list)));
    return list;
  };

  ScenarioReport report;
  std::vector<std::uint64_t> dp_truth_counts(cfg.risk_levels, 0);
  Timestamp token_end = kEpoch + static_cast<Timestamp>(cfg.days + 1) * 86400;

  auto refresh_verifier = [&](Timestamp now) {
    verity.refresh_revocations(harry.publish_revocation_list(now));
  };

  for (std::uint64_t day = 0; day < cfg.days; ++day) {
    Timestamp day_start = kEpoch + static_cast<Timestamp>(day) * 86400;
    refresh_verifier(day_start);
    model::RevocationList rev_v = rev_v_for(day_start);

    std::uint64_t issues = detail::poisson(cfg.issue_rate, rng);
    std::uint64_t auths = detail::poisson(cfg.auth_rate, rng);
    std::uint64_t revokes = detail::poisson(cfg.revoke_rate, rng);

    // Interleave the day's events; revocations landing between auths are
    // what creates the propagation-lag window this harness measures.
    enum : std::uint8_t { kIssue = 0, kAuth = 1, kRevoke = 2 };
    std::vector<std::uint8_t> schedule;
    schedule.insert(schedule.end(), issues, kIssue);
    schedule.insert(schedule.end(), auths, kAuth);
    schedule.insert(schedule.end(), revokes, kRevoke);
    for (std::size_t i = schedule.size(); i > 1; --i) {
      std::swap(schedule[i - 1], schedule[rng.uniform_below(i)]);
    }
    std::uint64_t events = schedule.size();
    Timestamp event_time = day_start;

    for (std::uint64_t ev = 0; ev < events; ++ev) {
      event_time = day_start + 1 + (ev * 86000) / (events + 1);
      if (schedule[ev] == kIssue) {
        if (holders.size() >= cfg.population) continue;
        std::string person = "P" + std::to_string(holders.size());
        std::uint64_t i_true = rng.uniform_below(cfg.risk_levels);
        Bytes photo = {0xff, 0xd8};
        Bytes tail = rng.bytes(200);
        photo.insert(photo.end(), tail.begin(), tail.end());
        model::SignedCertificate cert = harry.issue_certificate(
            person, "T" + person, "Holder " + person, photo,
            issuer::CommChannel::email, person + "@example.org",
            cfg.cert_validity_days, event_time, rng);
        dp::DpIssue dp_issue = dp::issue_dp_token(
            issuer_key.private_key, i_true, dp_params, event_time, token_end,
            rng);
        ss::SsIssue ss_issue = ss::issue_ss_token(
            issuer_key.private_key, helper_enc.public_key, i_true, ss_params,
            event_time, token_end, rng);
        wallet::Wallet w(cert, root.public_key);
        w.refresh_verifier_revocations(rev_v, event_time);
        holders.push_back(Holder{std::move(w), cert.body.cid, i_true,
                                 std::move(dp_issue.token),
                                 std::move(ss_issue.token)});
        report.issued += 1;
      } else if (schedule[ev] == kAuth) {
        if (holders.empty()) continue;
        Holder& h = holders[rng.uniform_below(holders.size())];
        report.auth_attempts += 1;
        bool app_mode = (rng.next_u64() & 1) != 0;
        verifier::VerificationResult result;
        if (app_mode) {
          if (event_time - h.wallet.fetched_at() > 12 * 3600) {
            h.wallet.refresh_verifier_revocations(rev_v, event_time);
          }
          wallet::CheckOutcome check =
              h.wallet.check_verifier(verifier_credential, event_time);
          if (check != wallet::CheckOutcome::accept) {
            throw Error(ErrorKind::protocol_violation,
                        "scenario verifier unexpectedly rejected");
          }
          Bytes ciphertext =
              h.wallet.app_auth_response(verifier_credential, event_time, rng);
          result = verity.verify_app(as_view(ciphertext), event_time);
        } else {
          Bytes payload = h.wallet.export_qr(false);
          result = verity.verify_paper(as_view(payload), event_time);
        }
        if (result.accepted) {
          report.auth_accepted += 1;
          const issuer::IssuerRecord* rec = harry.find_by_cid(h.cid);
          if (rec != nullptr && rec->revoked) report.wrongly_accepted += 1;
        } else {
          report.rejected_by_reason[verifier::reason_name(result.reason)] += 1;
        }
        // Health tokens ride along with each visit.
        dp::Aggregator::Outcome dp_out =
            dp_agg.verify_token(h.dp_token, event_time);
        if (dp_out.accepted) {
          report.dp_accepted += 1;
          dp_truth_counts[h.i_true] += 1;
        } else if (dp_out.reason == model::TokenReject::duplicate_token) {
          report.dp_duplicates += 1;
        }
        ss::VerifierAggregator::Outcome ss_out =
            ss_verifier.ingest(h.ss_token, event_time);
        if (ss_out.accepted) {
          ss_helper.ingest(ss_out.forward);
          report.ss_accepted += 1;
          report.ss_expected += h.i_true;
        } else if (ss_out.reason == model::TokenReject::duplicate_token) {
          report.ss_duplicates += 1;
        }
      } else {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < holders.size(); ++i) {
          const issuer::IssuerRecord* rec = harry.find_by_cid(holders[i].cid);
          if (rec != nullptr && !rec->revoked) candidates.push_back(i);
        }
        if (candidates.empty()) continue;
        std::size_t pick = candidates[rng.uniform_below(candidates.size())];
        harry.revoke_by_cid(holders[pick].cid, issuer::RevokeReason::loss);
        report.revocations += 1;
        if (cfg.immediate_refresh) refresh_verifier(event_time);
      }
    }
  }

  for (const auto& [period, state] : ss_verifier.periods()) {
    const ss::Accumulator* w = ss_helper.accumulator(period);
    ss::Accumulator empty;
    empty.period = period;
    report.ss_total +=
        ss::aggregate(state.acc, w != nullptr ? *w : empty, model::kDefaultPrime);
  }
  report.ss_exact = report.ss_total == report.ss_expected;

  std::vector<std::uint64_t> dp_counts(cfg.risk_levels, 0);
  std::uint64_t dp_n = 0;
  for (const auto& [period, state] : dp_agg.periods()) {
    for (std::size_t i = 0; i < state.counts.size(); ++i) {
      dp_counts[i] += state.counts[i];
      dp_n += state.counts[i];
    }
  }
  if (dp_n > 0) {
    dp::RiskHistogram hist{"all", dp_counts, dp_n};
    report.dp_estimate = dp::debias(hist, dp_params, dp::DebiasMode::unbiased);
    report.dp_true_freq.resize(cfg.risk_levels);
    for (std::size_t i = 0; i < dp_truth_counts.size(); ++i) {
      report.dp_true_freq[i] =
          static_cast<double>(dp_truth_counts[i]) / static_cast<double>(dp_n);
      report.dp_max_abs_error =
          std::max(report.dp_max_abs_error,
                   std::abs(report.dp_estimate[i] - report.dp_true_freq[i]));
    }
  }
  return report;
}

}  // namespace secureabc::sim

#endif  // SECUREABC_SIM_HPP
