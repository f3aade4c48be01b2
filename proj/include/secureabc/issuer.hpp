#ifndef SECUREABC_ISSUER_HPP
#define SECUREABC_ISSUER_HPP

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "secureabc/bytes.hpp"
#include "secureabc/crypto.hpp"
#include "secureabc/model.hpp"
#include "secureabc/rng.hpp"
#include "secureabc/tlv.hpp"

namespace secureabc::issuer {

enum class CommChannel : std::uint8_t { sms = 1, email = 2, post = 3 };

inline const char* comm_name(CommChannel c) {
  switch (c) {
    case CommChannel::sms: return "sms";
    case CommChannel::email: return "email";
    case CommChannel::post: return "post";
  }
  return "?";
}

inline CommChannel comm_from_name(const std::string& s) {
  if (s == "sms") return CommChannel::sms;
  if (s == "email") return CommChannel::email;
  if (s == "post") return CommChannel::post;
  throw Error(ErrorKind::usage, "unknown comm channel: " + s);
}

enum class RevokeReason : std::uint8_t { loss = 1, error = 2, misuse = 3 };

inline const char* reason_name(RevokeReason r) {
  switch (r) {
    case RevokeReason::loss: return "loss";
    case RevokeReason::error: return "error";
    case RevokeReason::misuse: return "misuse";
  }
  return "?";
}

inline RevokeReason reason_from_name(const std::string& s) {
  if (s == "loss") return RevokeReason::loss;
  if (s == "error") return RevokeReason::error;
  if (s == "misuse") return RevokeReason::misuse;
  throw Error(ErrorKind::usage, "unknown revocation reason: " + s);
}

struct IssuerRecord {
  std::string person_id;
  std::string tid;
  model::Cid cid{};
  bool revoked = false;  // b_CID
  Timestamp valid_from = 0;
  Timestamp valid_until = 0;
  CommChannel comm = CommChannel::email;
  std::string address;
  Bytes photo_hash;  // SHA-256; the photo itself is not retained
};

// Harry's side: the private test-record store with uniqueness-checked
// issuance and revocation-list publication. State is an append-only journal
// of events replayed at startup; every mutation is persisted before the
// operation returns. Pass empty paths for a purely in-memory store
// (simulations, tests).
class Issuer {
public:
  Issuer(crypto::SigKeyPair key, std::string journal_path = "",
         std::string outbox_path = "")
      : key_(std::move(key)),
        key_id_(crypto::fingerprint(as_view(key_.public_key))),
        journal_path_(std::move(journal_path)),
        outbox_path_(std::move(outbox_path)) {
    if (!journal_path_.empty()) replay_journal();
  }

  const Bytes& public_key() const { return key_.public_key; }

  model::KeyId key_id() const {
    model::KeyId id{};
    std::copy(key_id_.begin(), key_id_.end(), id.begin());
    return id;
  }

  model::SignedCertificate issue_certificate(
      const std::string& person_id, const std::string& tid,
      const std::string& name, const Bytes& photo, CommChannel comm,
      const std::string& address, int validity_days, Timestamp now, Rng& rng) {
    if (person_id.empty()) throw Error(ErrorKind::usage, "empty person_id");
    if (tid.empty()) throw Error(ErrorKind::usage, "empty tid");
    if (validity_days < 1) {
      throw Error(ErrorKind::usage, "validity_days below 1");
    }
    if (photo.size() > model::kPhotoBudgetBytes) {
      throw Error(ErrorKind::capacity_exceeded,
                  "photo " + std::to_string(photo.size()) +
                      " bytes exceeds budget " +
                      std::to_string(model::kPhotoBudgetBytes));
    }
    if (by_tid_.count(tid) != 0) {
      throw Error(ErrorKind::duplicate_tid, "tid already recorded: " + tid);
    }
    if (auto it = by_person_.find(person_id); it != by_person_.end()) {
      for (std::size_t idx : it->second) {
        const IssuerRecord& r = records_[idx];
        if (!r.revoked && r.valid_until > now) {
          throw Error(ErrorKind::duplicate_issue,
                      "person already holds a valid certificate");
        }
      }
    }

    IssuerRecord rec;
    rec.person_id = person_id;
    rec.tid = tid;
    do {
      Bytes cid = rng.bytes(model::kCidBytes);
      std::copy(cid.begin(), cid.end(), rec.cid.begin());
    } while (by_cid_.count(model::cid_hex(rec.cid)) != 0);
    rec.valid_from = now;
    rec.valid_until = now + static_cast<Timestamp>(validity_days) * 86400;
    rec.comm = comm;
    rec.address = address;
    rec.photo_hash = crypto::sha256(as_view(photo));

    model::SignedCertificate sc;
    sc.body.version = 1;
    sc.body.name = name;
    sc.body.photo = photo;
    sc.body.valid_from = rec.valid_from;
    sc.body.valid_until = rec.valid_until;
    sc.body.cid = rec.cid;
    sc.body.issuer_key_id = key_id();
    Bytes body = model::encode_certificate_body(sc.body);  // validates
    sc.signature = crypto::sign(key_.private_key, as_view(body));

    append_event(issue_event(rec));
    apply_issue(rec);
    send_message(rec, "certificate issued, cid " + model::cid_hex(rec.cid));
    return sc;
  }

  void revoke_by_cid(const model::Cid& cid, RevokeReason reason) {
    auto it = by_cid_.find(model::cid_hex(cid));
    if (it == by_cid_.end()) {
      throw Error(ErrorKind::unknown_cid, "unknown cid " + model::cid_hex(cid));
    }
    IssuerRecord& rec = records_[it->second];
    if (rec.revoked) return;  // idempotent
    append_event(revoke_event(cid, reason));
    rec.revoked = true;
    send_message(rec, std::string("certificate revoked (") +
                          reason_name(reason) + "), cid " +
                          model::cid_hex(cid));
  }

  model::Cid revoke_by_tid(const std::string& tid) {
    auto it = by_tid_.find(tid);
    if (it == by_tid_.end()) {
      throw Error(ErrorKind::unknown_tid, "unknown tid " + tid);
    }
    model::Cid cid = records_[it->second].cid;
    revoke_by_cid(cid, RevokeReason::error);
    return cid;
  }

  // Signed list of every revoked CID whose certificate has not yet expired;
  // revoked entries drop off once valid_until passes (expired certificates
  // already fail date checks).
  model::RevocationList publish_revocation_list(Timestamp now) const {
    model::RevocationList list;
    list.kind = model::ListKind::certificate;
    list.issued_at = now;
    for (const IssuerRecord& r : records_) {
      if (r.revoked && r.valid_until >= now) {
        list.entries.emplace_back(r.cid.begin(), r.cid.end());
      }
    }
    std::sort(list.entries.begin(), list.entries.end());
    list.signature =
        crypto::sign(key_.private_key, as_view(model::revocation_list_body(list)));
    return list;
  }

  const std::vector<IssuerRecord>& records() const { return records_; }

  const IssuerRecord* find_by_cid(const model::Cid& cid) const {
    auto it = by_cid_.find(model::cid_hex(cid));
    return it == by_cid_.end() ? nullptr : &records_[it->second];
  }

private:
  enum : std::uint8_t { kEventIssue = 1, kEventRevoke = 2 };

  Bytes issue_event(const IssuerRecord& r) const {
    tlv::Writer w;
    w.add_i64(tlv::kTagValidFrom, r.valid_from);
    w.add_i64(tlv::kTagValidUntil, r.valid_until);
    w.add(tlv::kTagCid, ByteView(r.cid.data(), r.cid.size()));
    w.add_u8(tlv::kTagEventKind, kEventIssue);
    w.add_str(tlv::kTagPersonId, r.person_id);
    w.add_str(tlv::kTagTestId, r.tid);
    w.add_u8(tlv::kTagCommChannel, static_cast<std::uint8_t>(r.comm));
    w.add_str(tlv::kTagCommAddress, r.address);
    w.add(tlv::kTagPhotoHash, as_view(r.photo_hash));
    return w.take();
  }

  static Bytes revoke_event(const model::Cid& cid, RevokeReason reason) {
    tlv::Writer w;
    w.add(tlv::kTagCid, ByteView(cid.data(), cid.size()));
    w.add_u8(tlv::kTagEventKind, kEventRevoke);
    w.add_u8(tlv::kTagRevokeReason, static_cast<std::uint8_t>(reason));
    return w.take();
  }

  void apply_issue(const IssuerRecord& rec) {
    records_.push_back(rec);
    std::size_t idx = records_.size() - 1;
    by_person_[rec.person_id].push_back(idx);
    by_tid_[rec.tid] = idx;
    by_cid_[model::cid_hex(rec.cid)] = idx;
  }

  void apply_event(ByteView event) {
    tlv::Reader r(event);
    IssuerRecord rec;
    model::Cid cid{};
    auto first = r.next();
    if (first.tag == tlv::kTagValidFrom) {
      rec.valid_from = static_cast<Timestamp>(get_u64_be(first.value));
      rec.valid_until = static_cast<Timestamp>(
          get_u64_be(r.expect_len(tlv::kTagValidUntil, 8).value));
      auto c = r.expect_len(tlv::kTagCid, model::kCidBytes);
      std::copy(c.value.begin(), c.value.end(), rec.cid.begin());
      auto kind = r.expect_len(tlv::kTagEventKind, 1);
      if (kind.value[0] != kEventIssue) {
        throw MalformedError(kind.offset, "bad journal event");
      }
      rec.person_id = to_string(r.expect(tlv::kTagPersonId).value);
      rec.tid = to_string(r.expect(tlv::kTagTestId).value);
      rec.comm =
          static_cast<CommChannel>(r.expect_len(tlv::kTagCommChannel, 1).value[0]);
      rec.address = to_string(r.expect(tlv::kTagCommAddress).value);
      auto hash = r.expect_len(tlv::kTagPhotoHash, 32);
      rec.photo_hash.assign(hash.value.begin(), hash.value.end());
      r.expect_end();
      apply_issue(rec);
    } else if (first.tag == tlv::kTagCid) {
      if (first.value.size() != model::kCidBytes) {
        throw MalformedError(first.offset, "bad journal cid");
      }
      std::copy(first.value.begin(), first.value.end(), cid.begin());
      auto kind = r.expect_len(tlv::kTagEventKind, 1);
      if (kind.value[0] != kEventRevoke) {
        throw MalformedError(kind.offset, "bad journal event");
      }
      r.expect_len(tlv::kTagRevokeReason, 1);
      r.expect_end();
      auto it = by_cid_.find(model::cid_hex(cid));
      if (it == by_cid_.end()) {
        throw Error(ErrorKind::io, "journal revokes unknown cid");
      }
      records_[it->second].revoked = true;
    } else {
      throw MalformedError(first.offset, "bad journal event");
    }
  }

  void replay_journal() {
    std::ifstream in(journal_path_);
    if (!in) return;  // fresh store
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        Bytes event = base64_decode(line);
        apply_event(as_view(event));
      } catch (const Error& e) {
        throw Error(ErrorKind::io, "journal line " + std::to_string(lineno) +
                                       ": " + e.what());
      }
    }
  }

  void append_event(const Bytes& event) {
    if (journal_path_.empty()) return;
    std::ofstream out(journal_path_, std::ios::app);
    if (!out) throw Error(ErrorKind::io, "cannot open journal " + journal_path_);
    out << base64_encode(as_view(event)) << "\n";
    if (!out.flush()) {
      throw Error(ErrorKind::io, "cannot append to journal " + journal_path_);
    }
  }

  // Status updates over comm_A are modeled as an outbox file.
  void send_message(const IssuerRecord& rec, const std::string& text) {
    if (outbox_path_.empty()) return;
    std::ofstream out(outbox_path_, std::ios::app);
    if (!out) return;
    out << comm_name(rec.comm) << "\t" << rec.address << "\t" << text << "\n";
  }

  crypto::SigKeyPair key_;
  Bytes key_id_;
  std::string journal_path_;
  std::string outbox_path_;
  std::vector<IssuerRecord> records_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_person_;
  std::unordered_map<std::string, std::size_t> by_tid_;
  std::unordered_map<std::string, std::size_t> by_cid_;
};

}  // namespace secureabc::issuer

#endif  // SECUREABC_ISSUER_HPP
