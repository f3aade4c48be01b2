// secureabc: one binary for every protocol role (root, issuer, holder,
// verifier, helper, simulator), operating over the file formats described in
// the README. Every randomized command accepts --seed and every
// time-dependent command accepts --now, so whole pipelines are reproducible.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "secureabc/crypto.hpp"
#include "secureabc/dp.hpp"
#include "secureabc/issuer.hpp"
#include "secureabc/model.hpp"
#include "secureabc/rng.hpp"
#include "secureabc/sim.hpp"
#include "secureabc/ss.hpp"
#include "secureabc/verifier.hpp"
#include "secureabc/wallet.hpp"

using namespace secureabc;
using json = nlohmann::ordered_json;

namespace {

int g_exit = 0;

// Stable exit codes: 0 accept/success, 1 usage error, 2 BadSignature,
// 3 Revoked, 4 Expired/NotYetValid, 5 MalformedPayload, 6 CapacityExceeded,
// 7 DuplicateIssue/DuplicateToken, 8 DecryptionFailure, 9 VerifierRevoked.
int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::bad_signature:
    case ErrorKind::unknown_issuer:
      return 2;
    case ErrorKind::revoked:
      return 3;
    case ErrorKind::expired:
    case ErrorKind::not_yet_valid:
      return 4;
    case ErrorKind::malformed_payload:
      return 5;
    case ErrorKind::capacity_exceeded:
      return 6;
    case ErrorKind::duplicate_issue:
    case ErrorKind::duplicate_tid:
    case ErrorKind::duplicate_token:
      return 7;
    case ErrorKind::decryption_failure:
      return 8;
    case ErrorKind::verifier_revoked:
      return 9;
    default:
      return 1;
  }
}

int reject_code(verifier::RejectReason r) {
  switch (r) {
    case verifier::RejectReason::malformed_payload: return 5;
    case verifier::RejectReason::bad_signature: return 2;
    case verifier::RejectReason::unknown_issuer: return 2;
    case verifier::RejectReason::revoked: return 3;
    case verifier::RejectReason::expired: return 4;
    case verifier::RejectReason::not_yet_valid: return 4;
    case verifier::RejectReason::decryption_failure: return 8;
  }
  return 1;
}

int token_reject_code(model::TokenReject r) {
  switch (r) {
    case model::TokenReject::bad_signature: return 2;
    case model::TokenReject::expired: return 4;
    case model::TokenReject::not_yet_valid: return 4;
    case model::TokenReject::duplicate_token: return 7;
  }
  return 1;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  return Bytes(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out.flush()) throw Error(ErrorKind::io, "cannot write " + path);
}

std::string read_text(const std::string& path) {
  Bytes raw = read_file(path);
  std::string text(raw.begin(), raw.end());
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
    text.pop_back();
  }
  return text;
}

Rng make_rng(std::int64_t seed) {
  return seed >= 0 ? Rng(static_cast<std::uint64_t>(seed)) : Rng::from_entropy();
}

// Serializes CLI invocations that mutate the issuer journal.
class FileLock {
public:
  explicit FileLock(const std::string& path) {
    fd_ = ::open((path + ".lock").c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ >= 0) ::flock(fd_, LOCK_EX);
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

private:
  int fd_ = -1;
};

crypto::KeyFile load_private_key(const std::string& path,
                                 const std::string& kind) {
  crypto::KeyFile kf = crypto::load_key_file(path);
  if (kf.kind != kind) {
    throw Error(ErrorKind::usage, path + " is not a " + kind + " key");
  }
  if (kf.private_key.empty()) {
    throw Error(ErrorKind::usage, path + " holds no private key");
  }
  return kf;
}

Bytes load_public_key(const std::string& path, const std::string& kind) {
  crypto::KeyFile kf = crypto::load_key_file(path);
  if (kf.kind != kind) {
    throw Error(ErrorKind::usage, path + " is not a " + kind + " key");
  }
  return kf.public_key;
}

void emit(bool json_mode, const json& out, const std::string& human) {
  if (json_mode) {
    std::printf("%s\n", out.dump().c_str());
  } else if (!human.empty()) {
    std::printf("%s\n", human.c_str());
  }
}

issuer::Issuer open_issuer(const std::string& key_path,
                           const std::string& journal,
                           const std::string& outbox) {
  crypto::KeyFile kf = load_private_key(key_path, "sign");
  return issuer::Issuer(crypto::SigKeyPair{kf.public_key, kf.private_key},
                        journal, outbox);
}

wallet::Wallet load_wallet(const std::string& path) {
  return wallet::Wallet::from_bundle(as_view(read_file(path)));
}

void save_wallet(const std::string& path, const wallet::Wallet& w) {
  write_file(path, as_view(w.to_bundle()));
}

// ---------------------------------------------------------------------------
// DP aggregator state file (JSON)
// ---------------------------------------------------------------------------

dp::Aggregator load_dp_state(const std::string& path, const Bytes& issuer_pub,
                             const dp::DpParams& fallback) {
  std::ifstream in(path);
  if (!in) return dp::Aggregator(issuer_pub, fallback);
  json state = json::parse(in);
  dp::DpParams params{state.at("k").get<std::uint64_t>(),
                      state.at("epsilon").get<double>()};
  dp::Aggregator agg(issuer_pub, params);
  for (auto& [period, entry] : state.at("periods").items()) {
    std::vector<std::uint64_t> counts =
        entry.at("counts").get<std::vector<std::uint64_t>>();
    std::unordered_set<std::string> seen;
    for (auto& id : entry.at("seen")) seen.insert(id.get<std::string>());
    agg.restore_period(period, std::move(counts), std::move(seen));
  }
  return agg;
}

void save_dp_state(const std::string& path, const dp::Aggregator& agg) {
  json state;
  state["k"] = agg.params().k;
  state["epsilon"] = agg.params().epsilon;
  json periods = json::object();
  for (const auto& [period, ps] : agg.periods()) {
    std::vector<std::string> seen(ps.seen_ids.begin(), ps.seen_ids.end());
    std::sort(seen.begin(), seen.end());
    periods[period] = {{"counts", ps.counts}, {"seen", seen}};
  }
  state["periods"] = periods;
  std::string text = state.dump(2);
  write_file(path, str_view(text));
}

// ---------------------------------------------------------------------------
// SS accumulator state files (JSON)
// ---------------------------------------------------------------------------

ss::VerifierAggregator load_ssv_state(const std::string& path,
                                      const Bytes& issuer_pub) {
  ss::VerifierAggregator agg(issuer_pub);
  std::ifstream in(path);
  if (!in) return agg;
  json state = json::parse(in);
  for (auto& [period, entry] : state.at("periods").items()) {
    std::unordered_set<std::string> seen;
    for (auto& id : entry.at("seen")) seen.insert(id.get<std::string>());
    agg.restore_period(period, entry.at("value").get<std::uint64_t>(),
                       entry.at("count").get<std::uint64_t>(), std::move(seen));
  }
  return agg;
}

void save_ssv_state(const std::string& path,
                    const ss::VerifierAggregator& agg) {
  json periods = json::object();
  for (const auto& [period, ps] : agg.periods()) {
    std::vector<std::string> seen(ps.seen_ids.begin(), ps.seen_ids.end());
    std::sort(seen.begin(), seen.end());
    periods[period] = {
        {"value", ps.acc.value}, {"count", ps.acc.count}, {"seen", seen}};
  }
  json state = {{"periods", periods}};
  std::string text = state.dump(2);
  write_file(path, str_view(text));
}

ss::HelperAggregator load_ssh_state(const std::string& path,
                                    const Bytes& issuer_pub,
                                    const Bytes& enc_priv,
                                    std::uint64_t& cursor) {
  ss::HelperAggregator agg(issuer_pub, enc_priv);
  cursor = 0;
  std::ifstream in(path);
  if (!in) return agg;
  json state = json::parse(in);
  cursor = state.value("cursor", std::uint64_t{0});
  for (auto& [period, entry] : state.at("periods").items()) {
    agg.restore_period(period, entry.at("value").get<std::uint64_t>(),
                       entry.at("count").get<std::uint64_t>());
  }
  return agg;
}

void save_ssh_state(const std::string& path, const ss::HelperAggregator& agg,
                    std::uint64_t cursor) {
  json periods = json::object();
  for (const auto& [period, acc] : agg.periods()) {
    periods[period] = {{"value", acc.value}, {"count", acc.count}};
  }
  json state = {{"cursor", cursor}, {"periods", periods}};
  std::string text = state.dump(2);
  write_file(path, str_view(text));
}

std::string hex_of(const Bytes& b) { return to_hex(as_view(b)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SecureABC antibody-certificate and health-token toolkit"};
  app.require_subcommand(1);

  // Shared option storage. Values persist until the chosen callback runs.
  struct {
    std::string kind = "sign", role, out, public_out;
    std::int64_t seed = -1;
    bool json = false;
  } keygen_opts;

  struct {
    std::string root_key, subject_key, role, now, out;
    bool json = false;
  } endorse_opts;

  auto* keygen = app.add_subcommand("keygen", "generate a key pair");
  keygen->add_option("--kind", keygen_opts.kind, "sign or enc")
      ->check(CLI::IsMember({"sign", "enc"}));
  keygen->add_option("--role", keygen_opts.role, "root|issuer|verifier|helper")
      ->required();
  keygen->add_option("--out", keygen_opts.out)->required();
  keygen->add_option("--public-out", keygen_opts.public_out,
                     "also write a public-only key file");
  keygen->add_option("--seed", keygen_opts.seed);
  keygen->add_flag("--json", keygen_opts.json);
  keygen->callback([&] {
    Rng rng = make_rng(keygen_opts.seed);
    crypto::KeyFile kf;
    kf.kind = keygen_opts.kind;
    kf.role = keygen_opts.role;
    if (keygen_opts.kind == "sign") {
      crypto::SigKeyPair kp = crypto::keygen_sign(rng);
      kf.public_key = kp.public_key;
      kf.private_key = kp.private_key;
    } else {
      crypto::EncKeyPair kp = crypto::keygen_enc(rng);
      kf.public_key = kp.public_key;
      kf.private_key = kp.private_key;
    }
    crypto::save_key_file(keygen_opts.out, kf);
    if (!keygen_opts.public_out.empty()) {
      crypto::KeyFile pub = kf;
      pub.private_key.clear();
      crypto::save_key_file(keygen_opts.public_out, pub);
    }
    Bytes fp = crypto::fingerprint(as_view(kf.public_key));
    emit(keygen_opts.json,
         {{"out", keygen_opts.out}, {"fingerprint", hex_of(fp)}},
         "wrote " + keygen_opts.out + " (fingerprint " + hex_of(fp) + ")");
  });

  auto* endorse = app.add_subcommand("endorse", "root-sign a subject key");
  bool endorse_json = false;
  endorse->add_option("--root-key", endorse_opts.root_key)->required();
  endorse->add_option("--subject-key", endorse_opts.subject_key)->required();
  endorse->add_option("--role", endorse_opts.role)->required();
  endorse->add_option("--now", endorse_opts.now)->required();
  endorse->add_option("--out", endorse_opts.out)->required();
  endorse->add_flag("--json", endorse_json);
  endorse->callback([&] {
    crypto::KeyFile root = load_private_key(endorse_opts.root_key, "sign");
    crypto::KeyFile subject = crypto::load_key_file(endorse_opts.subject_key);
    crypto::KeyEndorsement e = crypto::endorse_key(
        root.private_key, subject.public_key,
        crypto::role_from_name(endorse_opts.role),
        parse_timestamp(endorse_opts.now));
    write_file(endorse_opts.out, as_view(crypto::encode_endorsement(e)));
    Bytes fp = crypto::fingerprint(as_view(subject.public_key));
    emit(endorse_json,
         {{"out", endorse_opts.out},
          {"role", endorse_opts.role},
          {"subject_fingerprint", hex_of(fp)}},
         "endorsed " + hex_of(fp) + " as " + endorse_opts.role);
  });

  // ---- issuer commands ----

  struct {
    std::string key, journal, outbox, person, tid, name, photo, comm = "email",
                address, now, out;
    int days = 30;
    std::int64_t seed = -1;
    bool json = false;
  } issue_opts;
  auto* issue = app.add_subcommand("issue", "issue a signed certificate");
  issue->add_option("--key", issue_opts.key)->required();
  issue->add_option("--journal", issue_opts.journal)->required();
  issue->add_option("--outbox", issue_opts.outbox);
  issue->add_option("--person", issue_opts.person)->required();
  issue->add_option("--tid", issue_opts.tid)->required();
  issue->add_option("--name", issue_opts.name)->required();
  issue->add_option("--photo", issue_opts.photo)->required();
  issue->add_option("--comm", issue_opts.comm)
      ->check(CLI::IsMember({"sms", "email", "post"}));
  issue->add_option("--address", issue_opts.address);
  issue->add_option("--days", issue_opts.days);
  issue->add_option("--now", issue_opts.now)->required();
  issue->add_option("--out", issue_opts.out)->required();
  issue->add_option("--seed", issue_opts.seed);
  issue->add_flag("--json", issue_opts.json);
  issue->callback([&] {
    FileLock lock(issue_opts.journal);
    issuer::Issuer harry =
        open_issuer(issue_opts.key, issue_opts.journal, issue_opts.outbox);
    Rng rng = make_rng(issue_opts.seed);
    model::SignedCertificate sc = harry.issue_certificate(
        issue_opts.person, issue_opts.tid, issue_opts.name,
        read_file(issue_opts.photo), issuer::comm_from_name(issue_opts.comm),
        issue_opts.address, issue_opts.days, parse_timestamp(issue_opts.now),
        rng);
    Bytes wire = model::encode_signed_certificate(sc);
    model::qr_payload(as_view(wire), false);  // enforce binary capacity
    write_file(issue_opts.out, as_view(wire));
    emit(issue_opts.json,
         {{"out", issue_opts.out},
          {"cid", model::cid_hex(sc.body.cid)},
          {"payload_bytes", wire.size()},
          {"valid_until", sc.body.valid_until}},
         "issued " + model::cid_hex(sc.body.cid) + " (" +
             std::to_string(wire.size()) + " payload bytes)");
  });

  struct {
    std::string key, journal, cid, reason = "loss", tid;
    bool json = false;
  } revoke_opts;
  auto* revoke = app.add_subcommand("revoke", "revoke a certificate by CID");
  revoke->add_option("--key", revoke_opts.key)->required();
  revoke->add_option("--journal", revoke_opts.journal)->required();
  revoke->add_option("--cid", revoke_opts.cid)->required();
  revoke->add_option("--reason", revoke_opts.reason)
      ->check(CLI::IsMember({"loss", "error", "misuse"}));
  revoke->add_flag("--json", revoke_opts.json);
  revoke->callback([&] {
    FileLock lock(revoke_opts.journal);
    issuer::Issuer harry = open_issuer(revoke_opts.key, revoke_opts.journal, "");
    harry.revoke_by_cid(model::cid_from_hex(revoke_opts.cid),
                        issuer::reason_from_name(revoke_opts.reason));
    emit(revoke_opts.json, {{"revoked", revoke_opts.cid}},
         "revoked " + revoke_opts.cid);
  });

  auto* revoke_tid = app.add_subcommand("revoke-tid",
                                        "revoke a certificate by test id");
  revoke_tid->add_option("--key", revoke_opts.key)->required();
  revoke_tid->add_option("--journal", revoke_opts.journal)->required();
  revoke_tid->add_option("--tid", revoke_opts.tid)->required();
  revoke_tid->add_flag("--json", revoke_opts.json);
  revoke_tid->callback([&] {
    FileLock lock(revoke_opts.journal);
    issuer::Issuer harry = open_issuer(revoke_opts.key, revoke_opts.journal, "");
    model::Cid cid = harry.revoke_by_tid(revoke_opts.tid);
    emit(revoke_opts.json,
         {{"tid", revoke_opts.tid}, {"revoked", model::cid_hex(cid)}},
         "revoked " + model::cid_hex(cid));
  });

  struct {
    std::string key, journal, now, out;
    bool json = false;
  } pub_opts;
  auto* publish = app.add_subcommand("publish-rev",
                                     "publish the signed revocation list");
  publish->add_option("--key", pub_opts.key)->required();
  publish->add_option("--journal", pub_opts.journal)->required();
  publish->add_option("--now", pub_opts.now)->required();
  publish->add_option("--out", pub_opts.out)->required();
  publish->add_flag("--json", pub_opts.json);
  publish->callback([&] {
    FileLock lock(pub_opts.journal);
    issuer::Issuer harry = open_issuer(pub_opts.key, pub_opts.journal, "");
    model::RevocationList list =
        harry.publish_revocation_list(parse_timestamp(pub_opts.now));
    write_file(pub_opts.out, as_view(model::encode_revocation_list(list)));
    emit(pub_opts.json,
         {{"out", pub_opts.out}, {"entries", list.entries.size()}},
         "published " + std::to_string(list.entries.size()) + " entries");
  });

  struct {
    std::string root_key, now, out;
    std::vector<std::string> fingerprints;
    std::vector<std::string> key_files;
    bool json = false;
  } revv_opts;
  auto* publish_revv = app.add_subcommand(
      "publish-revv", "publish the signed verifier revocation list (root)");
  publish_revv->add_option("--root-key", revv_opts.root_key)->required();
  publish_revv->add_option("--now", revv_opts.now)->required();
  publish_revv->add_option("--out", revv_opts.out)->required();
  publish_revv->add_option("--revoke", revv_opts.fingerprints,
                           "8-byte key fingerprint (hex), repeatable");
  publish_revv->add_option("--revoke-key", revv_opts.key_files,
                           "key file whose fingerprint to revoke, repeatable");
  publish_revv->add_flag("--json", revv_opts.json);
  publish_revv->callback([&] {
    crypto::KeyFile root = load_private_key(revv_opts.root_key, "sign");
    model::RevocationList list;
    list.kind = model::ListKind::verifier;
    list.issued_at = parse_timestamp(revv_opts.now);
    for (const std::string& hex : revv_opts.fingerprints) {
      Bytes fp = from_hex(hex);
      if (fp.size() != crypto::kFingerprintBytes) {
        throw Error(ErrorKind::usage, "fingerprint must be 8 bytes: " + hex);
      }
      list.entries.push_back(fp);
    }
    for (const std::string& path : revv_opts.key_files) {
      crypto::KeyFile kf = crypto::load_key_file(path);
      list.entries.push_back(crypto::fingerprint(as_view(kf.public_key)));
    }
    std::sort(list.entries.begin(), list.entries.end());
    list.entries.erase(std::unique(list.entries.begin(), list.entries.end()),
                       list.entries.end());
    list.signature = crypto::sign(root.private_key,
                                  as_view(model::revocation_list_body(list)));
    write_file(revv_opts.out, as_view(model::encode_revocation_list(list)));
    emit(revv_opts.json,
         {{"out", revv_opts.out}, {"entries", list.entries.size()}},
         "published " + std::to_string(list.entries.size()) +
             " revoked verifiers");
  });

  // ---- holder commands ----

  auto* holder = app.add_subcommand("holder", "wallet operations");
  holder->require_subcommand(1);

  struct {
    std::string wallet, cert, root;
    bool json = false;
  } hinit_opts;
  auto* hinit = holder->add_subcommand("init", "create a wallet file");
  hinit->add_option("--wallet", hinit_opts.wallet)->required();
  hinit->add_option("--cert", hinit_opts.cert)->required();
  hinit->add_option("--root", hinit_opts.root)->required();
  hinit->add_flag("--json", hinit_opts.json);
  hinit->callback([&] {
    model::SignedCertificate sc =
        model::decode_signed_certificate(as_view(read_file(hinit_opts.cert)));
    wallet::Wallet w(sc, load_public_key(hinit_opts.root, "sign"));
    save_wallet(hinit_opts.wallet, w);
    emit(hinit_opts.json, {{"wallet", hinit_opts.wallet}},
         "wallet written to " + hinit_opts.wallet);
  });

  struct {
    std::string wallet, list, now;
    bool json = false;
  } hrefresh_opts;
  auto* hrefresh =
      holder->add_subcommand("refresh-revV", "install a newer rev_V list");
  hrefresh->add_option("--wallet", hrefresh_opts.wallet)->required();
  hrefresh->add_option("--list", hrefresh_opts.list)->required();
  hrefresh->add_option("--now", hrefresh_opts.now)->required();
  hrefresh->add_flag("--json", hrefresh_opts.json);
  hrefresh->callback([&] {
    wallet::Wallet w = load_wallet(hrefresh_opts.wallet);
    model::RevocationList list =
        model::decode_revocation_list(as_view(read_file(hrefresh_opts.list)));
    w.refresh_verifier_revocations(list, parse_timestamp(hrefresh_opts.now));
    save_wallet(hrefresh_opts.wallet, w);
    emit(hrefresh_opts.json, {{"entries", list.entries.size()}},
         "rev_V updated (" + std::to_string(list.entries.size()) + " entries)");
  });

  struct {
    std::string wallet, credential, now;
    std::vector<std::string> compat_issuer_keys;
    std::int64_t max_age = wallet::Wallet::kDefaultMaxCacheAge;
    bool json = false;
  } hcheck_opts;
  auto* hcheck = holder->add_subcommand(
      "check-verifier", "validate a verifier credential before responding");
  hcheck->add_option("--wallet", hcheck_opts.wallet)->required();
  hcheck->add_option("--credential", hcheck_opts.credential)->required();
  hcheck->add_option("--now", hcheck_opts.now)->required();
  hcheck->add_option("--max-age", hcheck_opts.max_age,
                     "max rev_V cache age in seconds");
  hcheck->add_option("--accept-issuer-signed", hcheck_opts.compat_issuer_keys,
                     "issuer key file; accept credentials endorsed by it");
  hcheck->add_flag("--json", hcheck_opts.json);
  hcheck->callback([&] {
    wallet::Wallet w = load_wallet(hcheck_opts.wallet);
    w.set_max_cache_age(hcheck_opts.max_age);
    if (!hcheck_opts.compat_issuer_keys.empty()) {
      std::vector<Bytes> keys;
      for (const std::string& path : hcheck_opts.compat_issuer_keys) {
        keys.push_back(load_public_key(path, "sign"));
      }
      w.allow_issuer_signed_credentials(std::move(keys));
    }
    model::VerifierCredential cred = model::decode_verifier_credential(
        as_view(read_file(hcheck_opts.credential)));
    wallet::CheckOutcome outcome =
        w.check_verifier(cred, parse_timestamp(hcheck_opts.now));
    save_wallet(hcheck_opts.wallet, w);
    emit(hcheck_opts.json,
         {{"outcome", wallet::check_outcome_name(outcome)}},
         std::string(wallet::check_outcome_name(outcome)));
    if (outcome == wallet::CheckOutcome::bad_signature) g_exit = 2;
    if (outcome == wallet::CheckOutcome::verifier_revoked) g_exit = 9;
  });

  struct {
    std::string wallet, credential, now, out;
    std::int64_t seed = -1;
    bool json = false;
  } hrespond_opts;
  auto* hrespond = holder->add_subcommand(
      "respond", "produce the encrypted app-auth response");
  hrespond->add_option("--wallet", hrespond_opts.wallet)->required();
  hrespond->add_option("--credential", hrespond_opts.credential)->required();
  hrespond->add_option("--now", hrespond_opts.now)->required();
  hrespond->add_option("--out", hrespond_opts.out)->required();
  hrespond->add_option("--seed", hrespond_opts.seed);
  hrespond->add_flag("--json", hrespond_opts.json);
  hrespond->callback([&] {
    wallet::Wallet w = load_wallet(hrespond_opts.wallet);
    model::VerifierCredential cred = model::decode_verifier_credential(
        as_view(read_file(hrespond_opts.credential)));
    Rng rng = make_rng(hrespond_opts.seed);
    Bytes ct =
        w.app_auth_response(cred, parse_timestamp(hrespond_opts.now), rng);
    write_file(hrespond_opts.out, as_view(ct));
    emit(hrespond_opts.json,
         {{"out", hrespond_opts.out}, {"bytes", ct.size()}},
         "response written (" + std::to_string(ct.size()) + " bytes)");
  });

  struct {
    std::string wallet, out;
    bool text = false;
    bool json = false;
  } hexport_opts;
  auto* hexport =
      holder->add_subcommand("export-qr", "export the printable QR payload");
  hexport->add_option("--wallet", hexport_opts.wallet)->required();
  hexport->add_option("--out", hexport_opts.out)->required();
  hexport->add_flag("--text", hexport_opts.text, "base64 text payload");
  hexport->add_flag("--json", hexport_opts.json);
  hexport->callback([&] {
    wallet::Wallet w = load_wallet(hexport_opts.wallet);
    Bytes payload = w.export_qr(hexport_opts.text);
    write_file(hexport_opts.out, as_view(payload));
    emit(hexport_opts.json,
         {{"out", hexport_opts.out},
          {"bytes", payload.size()},
          {"mode", hexport_opts.text ? "text" : "binary"}},
         "payload written (" + std::to_string(payload.size()) + " bytes)");
  });

  // ---- verifier: certificate verification ----

  struct {
    std::string payload, ciphertext, revlist, now, root, enc_key, photo_out;
    std::vector<std::string> issuer_creds;
    std::int64_t skew = 0;
    bool text = false;
    bool json = false;
  } verify_opts;
  auto* verify = app.add_subcommand("verify", "verify a presented certificate");
  verify->add_option("--payload", verify_opts.payload,
                     "paper-mode payload file");
  verify->add_option("--ciphertext", verify_opts.ciphertext,
                     "app-mode encrypted payload file");
  verify->add_option("--revlist", verify_opts.revlist)->required();
  verify->add_option("--now", verify_opts.now)->required();
  verify->add_option("--root", verify_opts.root)->required();
  verify->add_option("--issuer-cred", verify_opts.issuer_creds,
                     "issuer key endorsement file, repeatable")
      ->required();
  verify->add_option("--enc-key", verify_opts.enc_key,
                     "verifier encryption key (app mode)");
  verify->add_option("--photo-out", verify_opts.photo_out);
  verify->add_option("--skew", verify_opts.skew, "clock skew tolerance (s)");
  verify->add_flag("--text", verify_opts.text, "payload file is base64 text");
  verify->add_flag("--json", verify_opts.json);
  verify->callback([&] {
    if (verify_opts.payload.empty() == verify_opts.ciphertext.empty()) {
      throw Error(ErrorKind::usage,
                  "exactly one of --payload / --ciphertext required");
    }
    verifier::Verifier verity(load_public_key(verify_opts.root, "sign"));
    for (const std::string& path : verify_opts.issuer_creds) {
      verity.add_issuer_key(
          crypto::decode_endorsement(as_view(read_file(path))));
    }
    verity.refresh_revocations(
        model::decode_revocation_list(as_view(read_file(verify_opts.revlist))));
    verity.set_clock_skew(verify_opts.skew);
    Timestamp now = parse_timestamp(verify_opts.now);

    verifier::VerificationResult result;
    if (!verify_opts.payload.empty()) {
      Bytes payload = verify_opts.text
                          ? base64_decode(read_text(verify_opts.payload))
                          : read_file(verify_opts.payload);
      result = verity.verify_paper(as_view(payload), now);
    } else {
      if (verify_opts.enc_key.empty()) {
        throw Error(ErrorKind::usage, "--ciphertext requires --enc-key");
      }
      crypto::KeyFile kf = load_private_key(verify_opts.enc_key, "enc");
      verity.set_enc_keys(crypto::EncKeyPair{kf.public_key, kf.private_key});
      result = verity.verify_app(as_view(read_file(verify_opts.ciphertext)), now);
    }

    if (result.accepted) {
      if (!verify_opts.photo_out.empty()) {
        write_file(verify_opts.photo_out, as_view(result.photo));
      }
      emit(verify_opts.json,
           {{"verdict", "accept"},
            {"name", result.name},
            {"cid", model::cid_hex(result.cid)},
            {"valid_until", result.valid_until}},
           "accept name=" + result.name +
               " cid=" + model::cid_hex(result.cid) +
               " valid_until=" + std::to_string(result.valid_until));
    } else {
      emit(verify_opts.json,
           {{"verdict", "reject"},
            {"reason", verifier::reason_name(result.reason)},
            {"detail", result.detail}},
           std::string("reject ") + verifier::reason_name(result.reason));
      g_exit = reject_code(result.reason);
    }
  });

  // ---- health tokens ----

  auto* token = app.add_subcommand("token", "health-token operations");
  token->require_subcommand(1);

  struct {
    std::string key, now, out;
    std::uint64_t i_true = 0, k = 2;
    double epsilon = 1.0986122886681098;
    int days = 7;
    std::int64_t seed = -1;
    bool json = false;
  } tdp_opts;
  auto* tissue_dp =
      token->add_subcommand("issue-dp", "issue a randomized health token");
  tissue_dp->add_option("--key", tdp_opts.key)->required();
  tissue_dp->add_option("--i-true", tdp_opts.i_true)->required();
  tissue_dp->add_option("--k", tdp_opts.k);
  tissue_dp->add_option("--epsilon", tdp_opts.epsilon);
  tissue_dp->add_option("--now", tdp_opts.now)->required();
  tissue_dp->add_option("--days", tdp_opts.days);
  tissue_dp->add_option("--out", tdp_opts.out)->required();
  tissue_dp->add_option("--seed", tdp_opts.seed);
  tissue_dp->add_flag("--json", tdp_opts.json);
  tissue_dp->callback([&] {
    crypto::KeyFile kf = load_private_key(tdp_opts.key, "sign");
    Rng rng = make_rng(tdp_opts.seed);
    Timestamp now = parse_timestamp(tdp_opts.now);
    dp::DpIssue issued = dp::issue_dp_token(
        kf.private_key, tdp_opts.i_true, {tdp_opts.k, tdp_opts.epsilon}, now,
        now + static_cast<Timestamp>(tdp_opts.days) * 86400, rng);
    write_file(tdp_opts.out, as_view(model::encode_dp_token(issued.token)));
    emit(tdp_opts.json,
         {{"out", tdp_opts.out},
          {"i_true", issued.i_true},
          {"i_dp", issued.token.i_dp}},
         "token written, i_true=" + std::to_string(issued.i_true) +
             " i_dp=" + std::to_string(issued.token.i_dp));
  });

  struct {
    std::string token_file, issuer_pub, state, now;
    bool json = false;
  } vdp_opts;
  auto* tverify_dp =
      token->add_subcommand("verify-dp", "verify and count a health token");
  tverify_dp->add_option("--token", vdp_opts.token_file)->required();
  tverify_dp->add_option("--issuer-pub", vdp_opts.issuer_pub)->required();
  tverify_dp->add_option("--state", vdp_opts.state)->required();
  tverify_dp->add_option("--now", vdp_opts.now)->required();
  tverify_dp->add_flag("--json", vdp_opts.json);
  tverify_dp->callback([&] {
    model::DpTokenRecord tok =
        model::decode_dp_token(as_view(read_file(vdp_opts.token_file)));
    Bytes issuer_pub = load_public_key(vdp_opts.issuer_pub, "sign");
    dp::Aggregator agg =
        load_dp_state(vdp_opts.state, issuer_pub, {tok.k, tok.epsilon});
    dp::Aggregator::Outcome out =
        agg.verify_token(tok, parse_timestamp(vdp_opts.now));
    save_dp_state(vdp_opts.state, agg);
    if (out.accepted) {
      emit(vdp_opts.json, {{"outcome", "accept"}, {"i_dp", out.i_dp}},
           "accept i_dp=" + std::to_string(out.i_dp));
    } else {
      emit(vdp_opts.json,
           {{"outcome", "reject"},
            {"reason", model::token_reject_name(out.reason)}},
           std::string("reject ") + model::token_reject_name(out.reason));
      g_exit = token_reject_code(out.reason);
    }
  });

  struct {
    std::string state, mode = "unbiased", period, csv;
    bool json = false;
  } rdp_opts;
  auto* treport_dp =
      token->add_subcommand("report-dp", "debiased per-period frequencies");
  treport_dp->add_option("--state", rdp_opts.state)->required();
  treport_dp->add_option("--mode", rdp_opts.mode)
      ->check(CLI::IsMember({"paper", "paper_eq1", "unbiased"}));
  treport_dp->add_option("--period", rdp_opts.period, "restrict to one period");
  treport_dp->add_option("--csv", rdp_opts.csv, "write CSV here (default stdout)");
  treport_dp->add_flag("--json", rdp_opts.json);
  treport_dp->callback([&] {
    std::ifstream in(rdp_opts.state);
    if (!in) throw Error(ErrorKind::io, "cannot read " + rdp_opts.state);
    json state = json::parse(in);
    dp::DpParams params{state.at("k").get<std::uint64_t>(),
                        state.at("epsilon").get<double>()};
    dp::DebiasMode mode = dp::debias_mode_from_name(rdp_opts.mode);
    std::string csv = "period,level,count,f_tilde,f_hat\n";
    json periods_out = json::object();
    for (auto& [period, entry] : state.at("periods").items()) {
      if (!rdp_opts.period.empty() && period != rdp_opts.period) continue;
      std::vector<std::uint64_t> counts =
          entry.at("counts").get<std::vector<std::uint64_t>>();
      std::uint64_t n = 0;
      for (std::uint64_t c : counts) n += c;
      if (n == 0) continue;
      dp::RiskHistogram hist{period, counts, n};
      std::vector<double> f_hat = dp::debias(hist, params, mode);
      json rows = json::array();
      char buf[160];
      for (std::size_t level = 0; level < counts.size(); ++level) {
        double f_tilde = static_cast<double>(counts[level]) / n;
        std::snprintf(buf, sizeof(buf), "%s,%zu,%llu,%.9g,%.9g\n",
                      period.c_str(), level,
                      static_cast<unsigned long long>(counts[level]), f_tilde,
                      f_hat[level]);
        csv += buf;
        rows.push_back({{"level", level},
                        {"count", counts[level]},
                        {"f_tilde", f_tilde},
                        {"f_hat", f_hat[level]}});
      }
      periods_out[period] = rows;
    }
    if (!rdp_opts.csv.empty()) {
      write_file(rdp_opts.csv, str_view(csv));
    }
    if (rdp_opts.json) {
      emit(true, {{"mode", rdp_opts.mode}, {"periods", periods_out}}, "");
    } else if (rdp_opts.csv.empty()) {
      std::printf("%s", csv.c_str());
    }
  });

  struct {
    std::string key, helper_pub, now, out;
    std::uint64_t i_true = 0, k = 2;
    int days = 7;
    std::int64_t seed = -1;
    bool json = false;
  } tss_opts;
  auto* tissue_ss =
      token->add_subcommand("issue-ss", "issue a secret-shared health token");
  tissue_ss->add_option("--key", tss_opts.key)->required();
  tissue_ss->add_option("--helper-pub", tss_opts.helper_pub)->required();
  tissue_ss->add_option("--i-true", tss_opts.i_true)->required();
  tissue_ss->add_option("--k", tss_opts.k);
  tissue_ss->add_option("--now", tss_opts.now)->required();
  tissue_ss->add_option("--days", tss_opts.days);
  tissue_ss->add_option("--out", tss_opts.out)->required();
  tissue_ss->add_option("--seed", tss_opts.seed);
  tissue_ss->add_flag("--json", tss_opts.json);
  tissue_ss->callback([&] {
    crypto::KeyFile kf = load_private_key(tss_opts.key, "sign");
    Bytes helper_pub = load_public_key(tss_opts.helper_pub, "enc");
    Rng rng = make_rng(tss_opts.seed);
    Timestamp now = parse_timestamp(tss_opts.now);
    ss::SsIssue issued = ss::issue_ss_token(
        kf.private_key, helper_pub, tss_opts.i_true,
        {model::kDefaultPrime, tss_opts.k}, now,
        now + static_cast<Timestamp>(tss_opts.days) * 86400, rng);
    write_file(tss_opts.out, as_view(model::encode_ss_token(issued.token)));
    emit(tss_opts.json, {{"out", tss_opts.out}, {"i_true", issued.i_true}},
         "token written, i_true=" + std::to_string(issued.i_true));
  });

  // ---- verifier/helper: secret-share ingestion ----

  auto* verifier_cmd = app.add_subcommand("verifier", "verifier-side token ops");
  verifier_cmd->require_subcommand(1);

  struct {
    std::string token_file, issuer_pub, state, now, forward;
    bool json = false;
  } vss_opts;
  auto* vingest = verifier_cmd->add_subcommand(
      "ingest-ss", "absorb share_V and forward the helper share");
  vingest->add_option("--token", vss_opts.token_file)->required();
  vingest->add_option("--issuer-pub", vss_opts.issuer_pub)->required();
  vingest->add_option("--state", vss_opts.state)->required();
  vingest->add_option("--now", vss_opts.now)->required();
  vingest->add_option("--forward", vss_opts.forward,
                      "append the forward message to this file")
      ->required();
  vingest->add_flag("--json", vss_opts.json);
  vingest->callback([&] {
    model::SsTokenRecord tok =
        model::decode_ss_token(as_view(read_file(vss_opts.token_file)));
    Bytes issuer_pub = load_public_key(vss_opts.issuer_pub, "sign");
    ss::VerifierAggregator agg = load_ssv_state(vss_opts.state, issuer_pub);
    ss::VerifierAggregator::Outcome out =
        agg.ingest(tok, parse_timestamp(vss_opts.now));
    save_ssv_state(vss_opts.state, agg);
    if (out.accepted) {
      std::ofstream fw(vss_opts.forward, std::ios::app);
      if (!fw) throw Error(ErrorKind::io, "cannot append " + vss_opts.forward);
      fw << base64_encode(as_view(model::encode_forward_message(out.forward)))
         << "\n";
      emit(vss_opts.json,
           {{"outcome", "accept"}, {"period", out.forward.period}},
           "accepted into period " + out.forward.period);
    } else {
      emit(vss_opts.json,
           {{"outcome", "reject"},
            {"reason", model::token_reject_name(out.reason)}},
           std::string("reject ") + model::token_reject_name(out.reason));
      g_exit = token_reject_code(out.reason);
    }
  });

  auto* helper_cmd = app.add_subcommand("helper", "helper-side token ops");
  helper_cmd->require_subcommand(1);

  struct {
    std::string msgs, key, issuer_pub, state;
    bool json = false;
  } hss_opts;
  auto* hingest = helper_cmd->add_subcommand(
      "ingest-ss", "decrypt forwarded shares into the helper accumulator");
  hingest->add_option("--msgs", hss_opts.msgs)->required();
  hingest->add_option("--key", hss_opts.key)->required();
  hingest->add_option("--issuer-pub", hss_opts.issuer_pub)->required();
  hingest->add_option("--state", hss_opts.state)->required();
  hingest->add_flag("--json", hss_opts.json);
  hingest->callback([&] {
    crypto::KeyFile kf = load_private_key(hss_opts.key, "enc");
    Bytes issuer_pub = load_public_key(hss_opts.issuer_pub, "sign");
    std::uint64_t cursor = 0;
    ss::HelperAggregator agg =
        load_ssh_state(hss_opts.state, issuer_pub, kf.private_key, cursor);
    std::ifstream in(hss_opts.msgs);
    if (!in) throw Error(ErrorKind::io, "cannot read " + hss_opts.msgs);
    std::string line;
    std::uint64_t lineno = 0, ingested = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno <= cursor || line.empty()) continue;
      agg.ingest(model::decode_forward_message(as_view(base64_decode(line))));
      ++ingested;
    }
    save_ssh_state(hss_opts.state, agg, lineno);
    emit(hss_opts.json, {{"ingested", ingested}},
         "ingested " + std::to_string(ingested) + " shares");
  });

  struct {
    std::string verifier_state, helper_state, period;
    bool json = false;
  } agg_opts;
  auto* aggregate =
      app.add_subcommand("aggregate-ss", "combine published accumulators");
  aggregate->add_option("--verifier-state", agg_opts.verifier_state)->required();
  aggregate->add_option("--helper-state", agg_opts.helper_state)->required();
  aggregate->add_option("--period", agg_opts.period)->required();
  aggregate->add_flag("--json", agg_opts.json);
  aggregate->callback([&] {
    auto read_state = [](const std::string& path) {
      std::ifstream in(path);
      if (!in) throw Error(ErrorKind::io, "cannot read " + path);
      return json::parse(in);
    };
    json vs = read_state(agg_opts.verifier_state);
    json hs = read_state(agg_opts.helper_state);
    ss::Accumulator v, w;
    v.period = w.period = agg_opts.period;
    if (vs.at("periods").contains(agg_opts.period)) {
      v.value = vs["periods"][agg_opts.period]["value"].get<std::uint64_t>();
      v.count = vs["periods"][agg_opts.period]["count"].get<std::uint64_t>();
    }
    if (hs.at("periods").contains(agg_opts.period)) {
      w.value = hs["periods"][agg_opts.period]["value"].get<std::uint64_t>();
      w.count = hs["periods"][agg_opts.period]["count"].get<std::uint64_t>();
    }
    std::uint64_t total = ss::aggregate(v, w, model::kDefaultPrime);
    emit(agg_opts.json,
         {{"period", agg_opts.period},
          {"total", total},
          {"verifier_count", v.count},
          {"helper_count", w.count}},
         "period " + agg_opts.period + " total " + std::to_string(total) +
             " (" + std::to_string(v.count) + " tokens)");
  });

  // ---- simulations ----

  auto* sim_cmd = app.add_subcommand("sim", "deterministic simulations");
  sim_cmd->require_subcommand(1);

  struct {
    std::vector<double> epsilons;
    std::vector<std::uint64_t> n_values;
    std::vector<double> dist;
    std::uint64_t k = 2, trials = 200, seed = 1;
    std::string csv;
    bool json = false;
  } curve_opts;
  auto* curve = sim_cmd->add_subcommand(
      "error-curve", "mean absolute debiasing error vs population size");
  curve->add_option("--epsilon", curve_opts.epsilons, "repeatable");
  curve->add_option("--n", curve_opts.n_values, "repeatable, ascending");
  curve->add_option("--dist", curve_opts.dist, "true distribution, k values");
  curve->add_option("--k", curve_opts.k);
  curve->add_option("--trials", curve_opts.trials);
  curve->add_option("--seed", curve_opts.seed);
  curve->add_option("--csv", curve_opts.csv, "output file (default stdout)");
  curve->add_flag("--json", curve_opts.json);
  curve->callback([&] {
    sim::ErrorCurveConfig cfg;
    cfg.epsilons = curve_opts.epsilons.empty()
                       ? std::vector<double>{std::log(5.0 / 3.0), std::log(3.0),
                                             std::log(7.0)}
                       : curve_opts.epsilons;
    cfg.n_values = curve_opts.n_values.empty()
                       ? std::vector<std::uint64_t>{100, 300, 1000, 3000, 10000}
                       : curve_opts.n_values;
    cfg.k = curve_opts.k;
    cfg.trials = curve_opts.trials;
    cfg.seed = curve_opts.seed;
    cfg.true_distribution = curve_opts.dist;
    std::vector<sim::ErrorCurveRow> rows = sim::run_error_curve(cfg);
    std::string csv = sim::error_curve_csv(rows);
    if (!curve_opts.csv.empty()) write_file(curve_opts.csv, str_view(csv));
    if (curve_opts.json) {
      json out = json::array();
      for (const auto& r : rows) {
        out.push_back({{"epsilon", r.epsilon},
                       {"n", r.n},
                       {"trials", r.trials},
                       {"mean_abs_error", r.mean_abs_error}});
      }
      emit(true, {{"rows", out}}, "");
    } else if (curve_opts.csv.empty()) {
      std::printf("%s", csv.c_str());
    }
  });

  struct {
    sim::ScenarioConfig cfg;
    std::string json_out = "-";
  } scen_opts;
  auto* scen = sim_cmd->add_subcommand(
      "scenario", "end-to-end issue/auth/revocation churn with tokens");
  scen->add_option("--population", scen_opts.cfg.population);
  scen->add_option("--days", scen_opts.cfg.days);
  scen->add_option("--issue-rate", scen_opts.cfg.issue_rate);
  scen->add_option("--auth-rate", scen_opts.cfg.auth_rate);
  scen->add_option("--revoke-rate", scen_opts.cfg.revoke_rate);
  scen->add_option("--seed", scen_opts.cfg.seed);
  scen->add_option("--risk-levels", scen_opts.cfg.risk_levels);
  scen->add_option("--epsilon", scen_opts.cfg.epsilon);
  scen->add_flag("--immediate-refresh", scen_opts.cfg.immediate_refresh);
  scen->add_option("--json", scen_opts.json_out,
                   "report file, '-' for stdout");
  scen->callback([&] {
    sim::ScenarioReport rep = sim::run_scenario(scen_opts.cfg);
    json out;
    out["issued"] = rep.issued;
    out["revocations"] = rep.revocations;
    out["auth_attempts"] = rep.auth_attempts;
    out["auth_accepted"] = rep.auth_accepted;
    out["rejected_by_reason"] = rep.rejected_by_reason;
    out["wrongly_accepted"] = rep.wrongly_accepted;
    out["dp"] = {{"accepted", rep.dp_accepted},
                 {"duplicates_rejected", rep.dp_duplicates},
                 {"true_freq", rep.dp_true_freq},
                 {"estimate", rep.dp_estimate},
                 {"max_abs_error", rep.dp_max_abs_error}};
    out["ss"] = {{"accepted", rep.ss_accepted},
                 {"duplicates_rejected", rep.ss_duplicates},
                 {"total", rep.ss_total},
                 {"expected", rep.ss_expected},
                 {"exact", rep.ss_exact}};
    std::string text = out.dump(2);
    text.push_back('\n');
    if (scen_opts.json_out == "-") {
      std::printf("%s", text.c_str());
    } else {
      write_file(scen_opts.json_out, str_view(text));
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return g_exit;
}
