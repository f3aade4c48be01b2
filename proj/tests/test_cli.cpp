#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "secureabc/bytes.hpp"
#include "secureabc/rng.hpp"

using namespace secureabc;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = SECUREABC_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("secureabc_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run(const std::string& args, const std::string& stdout_to = "") {
  std::string cmd = kCli + " " + args;
  if (!stdout_to.empty()) cmd += " > " + stdout_to;
  cmd += " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json run_json(const std::string& args, const TempDir& dir) {
  std::string out = dir / "cmd_out.json";
  REQUIRE(run(args + " --json", out) == 0);
  std::ifstream in(out);
  return json::parse(in);
}

Bytes slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return Bytes(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
}

void write_photo(const std::string& path, std::size_t size) {
  Bytes photo = {0xff, 0xd8};
  Rng rng(123);
  Bytes tail = rng.bytes(size - 2);
  photo.insert(photo.end(), tail.begin(), tail.end());
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(photo.data()),
            static_cast<std::streamsize>(photo.size()));
}

// Shared pipeline: keys, endorsements, one issued certificate, wallet.
struct Pipeline {
  TempDir dir;
  std::string cid;

  std::string p(const std::string& n) const { return dir / n; }

  void set_up(const std::string& now = "1590000000") {
    REQUIRE(run("keygen --kind sign --role root --seed 1 --out " + p("root.key") +
                " --public-out " + p("root.pub")) == 0);
    REQUIRE(run("keygen --kind sign --role issuer --seed 2 --out " +
                p("issuer.key") + " --public-out " + p("issuer.pub")) == 0);
    REQUIRE(run("keygen --kind enc --role verifier --seed 3 --out " +
                p("verifier.key") + " --public-out " + p("verifier.pub")) == 0);
    REQUIRE(run("keygen --kind enc --role helper --seed 4 --out " +
                p("helper.key") + " --public-out " + p("helper.pub")) == 0);
    REQUIRE(run("endorse --root-key " + p("root.key") + " --subject-key " +
                p("issuer.pub") + " --role issuer --now " + now + " --out " +
                p("issuer.cred")) == 0);
    REQUIRE(run("endorse --root-key " + p("root.key") + " --subject-key " +
                p("verifier.pub") + " --role verifier --now " + now +
                " --out " + p("verifier.cred")) == 0);
    write_photo(p("photo.jpg"), 1800);

    json issued = run_json(
        "issue --key " + p("issuer.key") + " --journal " + p("journal") +
            " --outbox " + p("outbox") + " --person alice --tid T1" +
            " --name \"Alice Example\" --photo " + p("photo.jpg") +
            " --comm email --address a@x.org --days 30 --now " + now +
            " --seed 5 --out " + p("cert.tlv"),
        dir);
    cid = issued.at("cid");

    REQUIRE(run("publish-rev --key " + p("issuer.key") + " --journal " +
                p("journal") + " --now " + now + " --out " + p("rev0.rev")) ==
            0);
    REQUIRE(run("publish-revv --root-key " + p("root.key") + " --now " + now +
                " --out " + p("revv0.rev")) == 0);
    REQUIRE(run("holder init --wallet " + p("wallet.tlv") + " --cert " +
                p("cert.tlv") + " --root " + p("root.pub")) == 0);
    REQUIRE(run("holder refresh-revV --wallet " + p("wallet.tlv") +
                " --list " + p("revv0.rev") + " --now " + now) == 0);
  }

  std::string verify_args() const {
    return " --root " + p("root.pub") + " --issuer-cred " + p("issuer.cred");
  }
};

}  // namespace

TEST_CASE("end-to-end pipeline: issue, verify, revoke, mutual auth") {
  Pipeline pl;
  pl.set_up();

  SECTION("paper verification accepts the honest certificate") {
    REQUIRE(run("verify --payload " + pl.p("cert.tlv") + " --revlist " +
                pl.p("rev0.rev") + " --now 1590000100" + pl.verify_args() +
                " --photo-out " + pl.p("photo_out.jpg")) == 0);
    REQUIRE(slurp(pl.p("photo_out.jpg")) == slurp(pl.p("photo.jpg")));
  }

  SECTION("text QR payload round-trips through verify --text") {
    REQUIRE(run("holder export-qr --wallet " + pl.p("wallet.tlv") + " --out " +
                pl.p("qr.txt") + " --text") == 0);
    REQUIRE(slurp(pl.p("qr.txt")).size() <= 2953);
    REQUIRE(run("verify --payload " + pl.p("qr.txt") + " --text --revlist " +
                pl.p("rev0.rev") + " --now 1590000100" + pl.verify_args()) ==
            0);
  }

  SECTION("duplicate issue exits 7") {
    REQUIRE(run("issue --key " + pl.p("issuer.key") + " --journal " +
                pl.p("journal") + " --person alice --tid T2 --name Alice" +
                " --photo " + pl.p("photo.jpg") +
                " --days 30 --now 1590000200 --seed 6 --out " +
                pl.p("cert2.tlv")) == 7);
  }

  SECTION("revocation propagates through publish and verify exits 3") {
    REQUIRE(run("revoke --key " + pl.p("issuer.key") + " --journal " +
                pl.p("journal") + " --cid " + pl.cid + " --reason loss") == 0);
    REQUIRE(run("publish-rev --key " + pl.p("issuer.key") + " --journal " +
                pl.p("journal") + " --now 1590000300 --out " +
                pl.p("rev1.rev")) == 0);
    REQUIRE(run("verify --payload " + pl.p("cert.tlv") + " --revlist " +
                pl.p("rev1.rev") + " --now 1590000400" + pl.verify_args()) ==
            3);
    // The old list still verifies the certificate (stale verifier).
    REQUIRE(run("verify --payload " + pl.p("cert.tlv") + " --revlist " +
                pl.p("rev0.rev") + " --now 1590000400" + pl.verify_args()) ==
            0);
  }

  SECTION("expired certificates exit 4") {
    REQUIRE(run("verify --payload " + pl.p("cert.tlv") + " --revlist " +
                pl.p("rev0.rev") + " --now 1689999999" + pl.verify_args()) ==
            4);
  }

  SECTION("tampered payloads exit 2 or 5") {
    Bytes cert = slurp(pl.p("cert.tlv"));
    cert[40] ^= 1;
    std::ofstream out(pl.p("bad.tlv"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(cert.data()),
              static_cast<std::streamsize>(cert.size()));
    out.close();
    int code = run("verify --payload " + pl.p("bad.tlv") + " --revlist " +
                   pl.p("rev0.rev") + " --now 1590000100" + pl.verify_args());
    REQUIRE((code == 2 || code == 5));
  }

  SECTION("mutual authentication gates the app response") {
    // Responding before any check is a protocol violation.
    REQUIRE(run("holder respond --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("verifier.cred") +
                " --now 1590000100 --seed 9 --out " + pl.p("ct.bin")) == 1);

    REQUIRE(run("holder check-verifier --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("verifier.cred") +
                " --now 1590000100") == 0);
    REQUIRE(run("holder respond --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("verifier.cred") +
                " --now 1590000150 --seed 9 --out " + pl.p("ct.bin")) == 0);
    REQUIRE(run("verify --ciphertext " + pl.p("ct.bin") + " --enc-key " +
                pl.p("verifier.key") + " --revlist " + pl.p("rev0.rev") +
                " --now 1590000200" + pl.verify_args()) == 0);

    // Sessions expire: five minutes later the respond is refused.
    REQUIRE(run("holder respond --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("verifier.cred") +
                " --now 1590000500 --seed 10 --out " + pl.p("ct2.bin")) == 1);
  }

  SECTION("a revoked verifier aborts the holder with exit 9") {
    REQUIRE(run("publish-revv --root-key " + pl.p("root.key") +
                " --now 1590000300 --revoke-key " + pl.p("verifier.pub") +
                " --out " + pl.p("revv1.rev")) == 0);
    REQUIRE(run("holder refresh-revV --wallet " + pl.p("wallet.tlv") +
                " --list " + pl.p("revv1.rev") + " --now 1590000300") == 0);
    REQUIRE(run("holder check-verifier --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("verifier.cred") +
                " --now 1590000400") == 9);
    // Rolling back to the older list is refused.
    REQUIRE(run("holder refresh-revV --wallet " + pl.p("wallet.tlv") +
                " --list " + pl.p("revv0.rev") + " --now 1590000500") == 1);
  }

  SECTION("issuer-signed verifier credentials need the compat flag") {
    REQUIRE(run("endorse --root-key " + pl.p("issuer.key") +
                " --subject-key " + pl.p("verifier.pub") +
                " --role verifier --now 1590000000 --out " +
                pl.p("issuer_signed.cred")) == 0);
    REQUIRE(run("holder check-verifier --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("issuer_signed.cred") +
                " --now 1590000100") == 2);
    REQUIRE(run("holder check-verifier --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("issuer_signed.cred") +
                " --now 1590000100 --accept-issuer-signed " +
                pl.p("issuer.pub")) == 0);
  }

  SECTION("self-signed verifier credentials exit 2") {
    REQUIRE(run("keygen --kind sign --role root --seed 66 --out " +
                pl.p("rogue.key")) == 0);
    REQUIRE(run("endorse --root-key " + pl.p("rogue.key") + " --subject-key " +
                pl.p("verifier.pub") + " --role verifier --now 1590000000" +
                " --out " + pl.p("rogue.cred")) == 0);
    REQUIRE(run("holder check-verifier --wallet " + pl.p("wallet.tlv") +
                " --credential " + pl.p("rogue.cred") + " --now 1590000100") ==
            2);
  }
}

TEST_CASE("the pipeline is byte-for-byte reproducible under fixed seeds") {
  Pipeline a, b;
  a.set_up();
  b.set_up();
  for (const char* artifact :
       {"cert.tlv", "rev0.rev", "revv0.rev", "issuer.cred", "verifier.cred",
        "wallet.tlv", "root.key", "issuer.key"}) {
    INFO(artifact);
    REQUIRE(slurp(a.p(artifact)) == slurp(b.p(artifact)));
  }
  REQUIRE(a.cid == b.cid);

  // Journal replay also reproduces the published list bitwise.
  REQUIRE(run("publish-rev --key " + a.p("issuer.key") + " --journal " +
              a.p("journal") + " --now 1590000000 --out " + a.p("rev_again")) ==
          0);
  REQUIRE(slurp(a.p("rev_again")) == slurp(a.p("rev0.rev")));
}

TEST_CASE("dp token lifecycle through the CLI") {
  Pipeline pl;
  pl.set_up();

  json issued = run_json("token issue-dp --key " + pl.p("issuer.key") +
                             " --i-true 1 --k 3 --epsilon 1.0986122886681098" +
                             " --now 1590000000 --days 7 --seed 21 --out " +
                             pl.p("tok.dp"),
                         pl.dir);
  REQUIRE(issued.at("i_true") == 1);

  REQUIRE(run("token verify-dp --token " + pl.p("tok.dp") + " --issuer-pub " +
              pl.p("issuer.pub") + " --state " + pl.p("dp.json") +
              " --now 1590000100") == 0);
  // Replay within the same period exits 7.
  REQUIRE(run("token verify-dp --token " + pl.p("tok.dp") + " --issuer-pub " +
              pl.p("issuer.pub") + " --state " + pl.p("dp.json") +
              " --now 1590000200") == 7);
  // Expired tokens exit 4.
  REQUIRE(run("token verify-dp --token " + pl.p("tok.dp") + " --issuer-pub " +
              pl.p("issuer.pub") + " --state " + pl.p("dp.json") +
              " --now 1591000000") == 4);

  REQUIRE(run("token report-dp --state " + pl.p("dp.json") +
              " --mode unbiased --csv " + pl.p("dp.csv")) == 0);
  std::ifstream csv(pl.p("dp.csv"));
  std::string header;
  std::getline(csv, header);
  REQUIRE(header == "period,level,count,f_tilde,f_hat");
  int rows = 0;
  std::string line;
  while (std::getline(csv, line)) ++rows;
  REQUIRE(rows == 3);  // one per level
}

TEST_CASE("ss token lifecycle through the CLI") {
  Pipeline pl;
  pl.set_up();

  for (int i = 0; i < 2; ++i) {
    REQUIRE(run("token issue-ss --key " + pl.p("issuer.key") +
                " --helper-pub " + pl.p("helper.pub") + " --i-true " +
                std::to_string(i + 1) + " --k 3 --now 1590000000 --days 7" +
                " --seed " + std::to_string(31 + i) + " --out " +
                pl.p("tok" + std::to_string(i) + ".ss")) == 0);
    REQUIRE(run("verifier ingest-ss --token " +
                pl.p("tok" + std::to_string(i) + ".ss") + " --issuer-pub " +
                pl.p("issuer.pub") + " --state " + pl.p("ssv.json") +
                " --now 1590000100 --forward " + pl.p("fwd.msgs")) == 0);
  }
  // Replay exits 7 and leaves the accumulator unchanged.
  REQUIRE(run("verifier ingest-ss --token " + pl.p("tok0.ss") +
              " --issuer-pub " + pl.p("issuer.pub") + " --state " +
              pl.p("ssv.json") + " --now 1590000200 --forward " +
              pl.p("fwd.msgs")) == 7);

  REQUIRE(run("helper ingest-ss --msgs " + pl.p("fwd.msgs") + " --key " +
              pl.p("helper.key") + " --issuer-pub " + pl.p("issuer.pub") +
              " --state " + pl.p("ssh.json")) == 0);
  // Re-running the helper does not double-count (cursor).
  REQUIRE(run("helper ingest-ss --msgs " + pl.p("fwd.msgs") + " --key " +
              pl.p("helper.key") + " --issuer-pub " + pl.p("issuer.pub") +
              " --state " + pl.p("ssh.json")) == 0);

  json agg = run_json("aggregate-ss --verifier-state " + pl.p("ssv.json") +
                          " --helper-state " + pl.p("ssh.json") +
                          " --period 2020-05-20",
                      pl.dir);
  REQUIRE(agg.at("total") == 3);  // 1 + 2
  REQUIRE(agg.at("verifier_count") == 2);
  REQUIRE(agg.at("helper_count") == 2);
}

TEST_CASE("simulation commands emit deterministic files") {
  TempDir dir;
  std::string curve_args =
      "sim error-curve --n 100 --n 1000 --trials 10 --seed 3 --csv ";
  REQUIRE(run(curve_args + (dir / "a.csv")) == 0);
  REQUIRE(run(curve_args + (dir / "b.csv")) == 0);
  Bytes a = slurp(dir / "a.csv");
  REQUIRE(a == slurp(dir / "b.csv"));
  REQUIRE(to_string(as_view(a)).rfind("epsilon,n,trials,mean_abs_error", 0) ==
          0);

  std::string scen_args =
      "sim scenario --population 20 --days 3 --issue-rate 8 --auth-rate 10"
      " --revoke-rate 1 --seed 5 --json ";
  REQUIRE(run(scen_args + (dir / "s1.json")) == 0);
  REQUIRE(run(scen_args + (dir / "s2.json")) == 0);
  REQUIRE(slurp(dir / "s1.json") == slurp(dir / "s2.json"));
  std::ifstream in(dir / "s1.json");
  json rep = json::parse(in);
  REQUIRE(rep.at("ss").at("exact") == true);
}

TEST_CASE("unknown subcommands exit 1 with usage on stderr") {
  REQUIRE(run("no-such-command") == 1);
  REQUIRE(run("") == 1);
}
