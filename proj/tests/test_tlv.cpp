#include <catch2/catch_amalgamated.hpp>

#include "secureabc/tlv.hpp"

using namespace secureabc;

TEST_CASE("writer emits tag/length/value with 4-byte big-endian lengths") {
  tlv::Writer w;
  w.add_u8(tlv::kTagVersion, 1);
  w.add(tlv::kTagName, str_view("ab"));
  Bytes out = w.take();
  REQUIRE(out == Bytes{0x01, 0, 0, 0, 1, 0x01, 0x02, 0, 0, 0, 2, 'a', 'b'});
}

TEST_CASE("writer rejects out-of-order and post-signature fields") {
  tlv::Writer w;
  w.add_u8(tlv::kTagPhoto, 1);
  REQUIRE_THROWS_AS(w.add_u8(tlv::kTagName, 1), Error);
  REQUIRE_THROWS_AS(w.add_u8(tlv::kTagPhoto, 1), Error);  // duplicate

  tlv::Writer w2;
  w2.add_u8(tlv::kTagVersion, 1);
  w2.add(tlv::kTagSignature, str_view("sig"));
  REQUIRE_THROWS_AS(w2.add_u8(tlv::kTagIssuerKeyId, 1), Error);
}

TEST_CASE("writer allows repeated revocation entries") {
  tlv::Writer w;
  w.add_u8(tlv::kTagListKind, 1);
  w.add(tlv::kTagRevocationEntry, str_view("aa"));
  w.add(tlv::kTagRevocationEntry, str_view("bb"));
  REQUIRE(w.bytes().size() == 7 + 7 + 6);
}

TEST_CASE("reader round-trips writer output") {
  tlv::Writer w;
  w.add_u8(tlv::kTagVersion, 7);
  w.add_u64(tlv::kTagValidFrom, 0x1122334455667788ull);
  w.add(tlv::kTagSignature, str_view("xyz"));
  Bytes out = w.take();

  tlv::Reader r(as_view(out));
  auto f1 = r.expect_len(tlv::kTagVersion, 1);
  REQUIRE(f1.value[0] == 7);
  auto f2 = r.expect_len(tlv::kTagValidFrom, 8);
  REQUIRE(get_u64_be(f2.value) == 0x1122334455667788ull);
  auto f3 = r.expect(tlv::kTagSignature);
  REQUIRE(to_string(f3.value) == "xyz");
  REQUIRE_NOTHROW(r.expect_end());
}

TEST_CASE("reader rejects out-of-order tags") {
  // name (0x02) before version (0x01)
  Bytes bad = {0x02, 0, 0, 0, 1, 'x', 0x01, 0, 0, 0, 1, 1};
  tlv::Reader r(as_view(bad));
  r.next();
  REQUIRE_THROWS_AS(r.next(), MalformedError);
}

TEST_CASE("reader rejects truncated headers and overlong lengths") {
  Bytes truncated = {0x01, 0, 0};
  tlv::Reader r1(as_view(truncated));
  try {
    r1.next();
    FAIL("expected MalformedError");
  } catch (const MalformedError& e) {
    REQUIRE(e.offset() == 0);
  }

  Bytes overlong = {0x01, 0, 0, 0, 9, 'x'};  // claims 9 bytes, has 1
  tlv::Reader r2(as_view(overlong));
  REQUIRE_THROWS_AS(r2.next(), MalformedError);
}

TEST_CASE("reader rejects fields after the signature") {
  Bytes bad = {0x07, 0, 0, 0, 1, 's', 0x08, 0, 0, 0, 1, 'k'};
  tlv::Reader r(as_view(bad));
  r.next();
  REQUIRE_THROWS_AS(r.next(), MalformedError);
}

TEST_CASE("trailing bytes are rejected") {
  Bytes payload = {0x01, 0, 0, 0, 1, 1, 0xAA};
  tlv::Reader r(as_view(payload));
  r.next();
  try {
    r.expect_end();
    FAIL("expected MalformedError");
  } catch (const MalformedError& e) {
    REQUIRE(e.offset() == 6);
  }
}
