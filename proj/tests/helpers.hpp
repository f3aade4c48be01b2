#ifndef SECUREABC_TESTS_HELPERS_HPP
#define SECUREABC_TESTS_HELPERS_HPP

#include <string>

#include "secureabc/crypto.hpp"
#include "secureabc/model.hpp"
#include "secureabc/rng.hpp"

namespace testutil {

using namespace secureabc;

// P-521 keygen is a few milliseconds; share fixed keys across tests that do
// not care about key identity.
inline const crypto::SigKeyPair& issuer_keys() {
  static crypto::SigKeyPair kp = [] {
    Rng rng(0x15511e5);
    return crypto::keygen_sign(rng);
  }();
  return kp;
}

inline const crypto::SigKeyPair& root_keys() {
  static crypto::SigKeyPair kp = [] {
    Rng rng(0x1007);
    return crypto::keygen_sign(rng);
  }();
  return kp;
}

inline Bytes jpeg_photo(Rng& rng, std::size_t size) {
  Bytes photo = {0xff, 0xd8};
  if (size > 2) {
    Bytes tail = rng.bytes(size - 2);
    photo.insert(photo.end(), tail.begin(), tail.end());
  }
  photo.resize(size < 2 ? 2 : size);
  return photo;
}

inline model::Certificate random_certificate(Rng& rng) {
  model::Certificate c;
  c.version = 1;
  std::size_t name_len = 1 + rng.uniform_below(64);
  c.name.clear();
  for (std::size_t i = 0; i < name_len; ++i) {
    c.name.push_back(static_cast<char>('a' + rng.uniform_below(26)));
  }
  c.photo = jpeg_photo(rng, 2 + rng.uniform_below(400));
  c.valid_from = static_cast<Timestamp>(rng.uniform_below(1u << 30));
  c.valid_until = c.valid_from + 1 + static_cast<Timestamp>(rng.uniform_below(1u << 24));
  rng.fill(c.cid.data(), c.cid.size());
  rng.fill(c.issuer_key_id.data(), c.issuer_key_id.size());
  return c;
}

inline model::SignedCertificate signed_certificate(Rng& rng,
                                                   const crypto::SigKeyPair& kp) {
  model::SignedCertificate sc;
  sc.body = random_certificate(rng);
  Bytes fp = crypto::fingerprint(as_view(kp.public_key));
  std::copy(fp.begin(), fp.end(), sc.body.issuer_key_id.begin());
  sc.signature =
      crypto::sign(kp.private_key, as_view(model::encode_certificate_body(sc.body)));
  return sc;
}

// Pearson chi-square statistic against a uniform distribution.
inline double chi_square_uniform(const std::vector<std::uint64_t>& counts,
                                 std::uint64_t n) {
  double expected = static_cast<double>(n) / counts.size();
  double stat = 0;
  for (std::uint64_t c : counts) {
    double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace testutil

#endif  // SECUREABC_TESTS_HELPERS_HPP
