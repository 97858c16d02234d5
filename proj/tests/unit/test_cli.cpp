#include <csignal>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>

#include "doctest.h"
#include "geoterms/hash.hpp"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using geoterms::read_file;

namespace {
struct Result {
  int code = -1;
  std::string out;
};

Result sh(const std::string& args) {
  std::string cmd = std::string(GEOTERMS_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string dir_bytes(const fs::path& dir) {
  return read_file(dir / "manifest.json") + read_file(dir / "triples.tsv") + read_file(dir / "summaries.tsv");
}

std::string field(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "\t", 0) == 0) return line.substr(key.size() + 1);
  }
  return "";
}

const std::string sample = std::string(GEOTERMS_SOURCE_DIR) + "/data/sample/nsf_sample.jsonl";
const std::string nsf_config = std::string(GEOTERMS_SOURCE_DIR) + "/config/nsf.json";
}  // namespace

TEST_CASE("ingest is worker-count invariant and reports counts") {
  geoterms::testing::TempDir tmp;
  auto synth = sh("synth --preset nsf --docs 300 --seed 3 --mean-chars 400 --out " + (tmp / "in.jsonl").string());
  REQUIRE(synth.code == 0);
  std::string inputs = " --input " + sample + " --input " + (tmp / "in.jsonl").string();
  auto a = sh("ingest --offline --config " + nsf_config + inputs + " --workers 1 --out " + (tmp / "w1").string());
  auto b = sh("ingest --offline --config " + nsf_config + inputs + " --workers 8 --out " + (tmp / "w8").string());
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(dir_bytes(tmp / "w1") == dir_bytes(tmp / "w8"));
  CHECK(a.out == b.out);
  CHECK(field(a.out, "accepted") == "321");
  CHECK(field(a.out, "skipped.unresolved_geo") == "1");
  CHECK(field(a.out, "skipped.malformed") == "1");
  CHECK(field(a.out, "fingerprint").size() == 16);
  auto again = sh("ingest --offline --config " + nsf_config + inputs + " --out " + (tmp / "again").string());
  CHECK(field(again.out, "fingerprint") == field(a.out, "fingerprint"));
}

TEST_CASE("empty input gives a valid empty dataset") {
  geoterms::testing::TempDir tmp;
  std::ofstream(tmp / "empty.jsonl").close();
  auto r = sh("ingest --offline --preset nsf --input " + (tmp / "empty.jsonl").string() + " --out " +
              (tmp / "ds").string());
  CHECK(r.code == 0);
  CHECK(field(r.out, "accepted") == "0");
  CHECK(read_file(tmp / "ds" / "triples.tsv").empty());
}

TEST_CASE("exit codes") {
  geoterms::testing::TempDir tmp;
  CHECK(sh("ingest --offline --preset nsf --input /nonexistent.jsonl --out " + (tmp / "x").string()).code == 1);
  CHECK(sh("ingest --offline --preset bogus --input " + sample + " --out " + (tmp / "x").string()).code == 2);
  CHECK(sh("ingest --bogus-flag").code == 2);
  CHECK(sh("").code == 2);
  std::ofstream(tmp / "bad.json") << R"({"preset":"nsf","overrides":{"max_ngram":7}})";
  CHECK(sh("ingest --offline --config " + (tmp / "bad.json").string() + " --input " + sample + " --out " +
           (tmp / "x").string())
            .code == 2);
  CHECK(sh("shard --offline --preset nsf --input " + sample + " --part 3/2 --out " + (tmp / "s").string()).code == 2);
}

TEST_CASE("append") {
  geoterms::testing::TempDir tmp;
  std::ifstream in(sample);
  std::ofstream a(tmp / "a.jsonl"), b(tmp / "b.jsonl");
  std::string line;
  for (int i = 0; std::getline(in, line); ++i) (i % 3 ? a : b) << line << '\n';
  a.close();
  b.close();
  REQUIRE(sh("ingest --offline --preset nsf --input " + sample + " --out " + (tmp / "full").string()).code == 0);
  REQUIRE(sh("ingest --offline --preset nsf --input " + (tmp / "a.jsonl").string() + " --out " +
             (tmp / "inc").string())
              .code == 0);
  REQUIRE(sh("append --offline --preset nsf --dataset " + (tmp / "inc").string() + " --input " +
             (tmp / "b.jsonl").string())
              .code == 0);
  CHECK(dir_bytes(tmp / "inc") == dir_bytes(tmp / "full"));

  std::ofstream(tmp / "none.jsonl").close();
  auto before = dir_bytes(tmp / "full");
  REQUIRE(sh("append --offline --preset nsf --dataset " + (tmp / "full").string() + " --input " +
             (tmp / "none.jsonl").string())
              .code == 0);
  CHECK(dir_bytes(tmp / "full") == before);

  auto mismatch = sh("append --offline --preset twitter --dataset " + (tmp / "full").string() + " --input " +
                     (tmp / "b.jsonl").string());
  CHECK(mismatch.code == 2);
  CHECK(mismatch.out.find("fingerprint") != std::string::npos);
  CHECK(dir_bytes(tmp / "full") == before);
}

TEST_CASE("shard and merge") {
  geoterms::testing::TempDir tmp;
  REQUIRE(sh("ingest --offline --preset nsf --input " + sample + " --out " + (tmp / "direct").string()).code == 0);
  for (int i = 0; i < 2; ++i) {
    REQUIRE(sh("shard --offline --preset nsf --input " + sample + " --part " + std::to_string(i) + "/2 --out " +
               (tmp / ("s" + std::to_string(i) + ".tsv")).string())
                .code == 0);
  }
  std::string s0 = (tmp / "s0.tsv").string(), s1 = (tmp / "s1.tsv").string();
  REQUIRE(sh("merge " + s0 + " " + s1 + " --out " + (tmp / "m01").string()).code == 0);
  REQUIRE(sh("merge " + s1 + " " + s0 + " --out " + (tmp / "m10").string()).code == 0);
  CHECK(dir_bytes(tmp / "m01") == dir_bytes(tmp / "direct"));
  CHECK(dir_bytes(tmp / "m10") == dir_bytes(tmp / "direct"));

  REQUIRE(sh("shard --offline --preset nsf --input " + sample + " --out " + (tmp / "all.tsv").string()).code == 0);
  REQUIRE(sh("merge " + (tmp / "all.tsv").string() + " --out " + (tmp / "single").string()).code == 0);
  CHECK(dir_bytes(tmp / "single") == dir_bytes(tmp / "direct"));

  REQUIRE(sh("shard --offline --preset twitter --input " + sample + " --out " + (tmp / "tw.tsv").string()).code == 0);
  CHECK(sh("merge " + s0 + " " + (tmp / "tw.tsv").string() + " --out " + (tmp / "bad").string()).code == 2);
}

TEST_CASE("cloud-svg frames") {
  geoterms::testing::TempDir tmp;
  REQUIRE(sh("ingest --offline --preset nsf --input " + sample + " --out " + (tmp / "ds").string()).code == 0);
  auto r = sh("cloud-svg --dataset " + (tmp / "ds").string() + " 29.7633 -95.3633 --bins 2008..2010 --sparklines --out " +
              (tmp / "frames").string());
  REQUIRE(r.code == 0);
  for (const char* label : {"2008", "2009", "2010"}) CHECK(fs::exists(tmp / "frames" / (std::string(label) + ".svg")));
  auto frame = read_file(tmp / "frames" / "2008.svg");
  CHECK(frame.find(">magnetosphere</text>") != std::string::npos);
  CHECK(frame.find("<polyline") != std::string::npos);
  REQUIRE(sh("cloud-svg --dataset " + (tmp / "ds").string() + " 29.7633 -95.3633 --bins 2008..2010 --sparklines --out " +
             (tmp / "again").string())
              .code == 0);
  CHECK(read_file(tmp / "again" / "2009.svg") == read_file(tmp / "frames" / "2009.svg"));

  REQUIRE(sh("cloud-svg --dataset " + (tmp / "ds").string() + " 0 0 --bins 2008 --out " + (tmp / "empty").string())
              .code == 0);
  auto empty = read_file(tmp / "empty" / "2008.svg");
  CHECK(empty.find("<circle") != std::string::npos);
  CHECK(empty.find("<text") == std::string::npos);
}

TEST_CASE("bench prints csv") {
  auto r = sh("bench --offline --preset nsf --docs 40 --workers 1,2 --ngram 2");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  CHECK(header == "docs,workers,ngram,seconds");
  CHECK(row1.rfind("40,1,2,", 0) == 0);
  CHECK(row2.rfind("40,2,2,", 0) == 0);
}

TEST_CASE("serve answers with the ingest fingerprint and reloads on SIGHUP") {
  geoterms::testing::TempDir tmp;
  auto ingest = sh("ingest --offline --preset nsf --input " + sample + " --out " + (tmp / "ds").string());
  REQUIRE(ingest.code == 0);
  std::string cmd = "sh -c 'echo $$; exec " + std::string(GEOTERMS_CLI) + " serve --host 127.0.0.1 --port 0 --dataset " +
                    (tmp / "ds").string() + "'";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char line[256];
  REQUIRE(std::fgets(line, sizeof line, p));
  pid_t pid = static_cast<pid_t>(std::stol(line));
  REQUIRE(std::fgets(line, sizeof line, p));
  std::string listening = line;
  REQUIRE(listening.rfind("listening\t", 0) == 0);
  int port = std::stoi(listening.substr(10));

  httplib::Client client("127.0.0.1", port);
  httplib::Result meta;
  for (int attempt = 0; attempt < 100 && !meta; ++attempt) {
    meta = client.Get("/api/meta");
    if (!meta) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(meta);
  CHECK(nlohmann::json::parse(meta->body)["fingerprint"] == field(ingest.out, "fingerprint"));

  auto twitter = sh("ingest --offline --preset twitter --input " + sample + " --out " + (tmp / "ds").string());
  REQUIRE(twitter.code == 0);
  ::kill(pid, SIGHUP);
  std::string seen;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto m = client.Get("/api/meta");
    if (m) seen = nlohmann::json::parse(m->body)["fingerprint"];
    if (seen == field(twitter.out, "fingerprint")) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(seen == field(twitter.out, "fingerprint"));

  ::kill(pid, SIGTERM);
  int status = ::pclose(p);
  CHECK(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
}
